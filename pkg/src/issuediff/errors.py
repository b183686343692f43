"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all issuediff errors."""


class ConfigError(PipelineError):
    """Invalid pipeline configuration; fatal, mapped to exit code 1."""


class RepoNotFound(PipelineError):
    pass


class BranchNotFound(PipelineError):
    pass


class UnknownCommit(PipelineError):
    pass


class WorkdirNotWritable(PipelineError):
    pass


class AnalyzerCrashed(PipelineError):
    def __init__(self, exit_code: int, stderr_tail: str):
        super().__init__(f"analyzer exited with code {exit_code}: {stderr_tail!r}")
        self.exit_code = exit_code
        self.stderr_tail = stderr_tail


class ReportMissing(PipelineError):
    pass


class ParseError(PipelineError):
    """Raised on malformed report text; carries the byte offset of the bad line."""

    def __init__(self, message: str, offset: int, line_no: int, source: str = ""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}line {line_no} (byte {offset}): {message}")
        self.message = message
        self.offset = offset
        self.line_no = line_no
        self.source = source


class ConfigMismatch(PipelineError):
    pass


class MissingDiff(PipelineError):
    pass


class FileUnreadable(PipelineError):
    pass


class NothingExtractable(PipelineError):
    pass


class SingleClassTrainingSet(PipelineError):
    pass


class SingleClassEvalSet(PipelineError):
    pass


class DimensionMismatch(PipelineError):
    pass


class EmptyModelList(PipelineError):
    pass


class UninitializedWorkdir(PipelineError):
    pass
