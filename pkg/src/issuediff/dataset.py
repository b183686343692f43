"""Dataset record construction.

Turns label decisions into full records: extracts the function bodies a
trace passes through, marks the ones the fixing commit touched, derives
after-fix negatives by re-extracting the same functions from the fixed
tree, and splits the result stratified by bug type.
"""

from __future__ import annotations

import base64
import gzip
import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import cfuncs
from ._util import write_text_atomic
from .errors import FileUnreadable, NothingExtractable
from .gitrepo import CommitDiff, FileChange, VersionPair
from .labeler import LabelDecision
from .report import Issue, TraceStep, step_from_dict, step_to_dict

AUTO_LABELER = "auto_labeler"
AFTER_FIX = "after_fix_extractor"
UNKNOWN_FUNCTION = "<unknown>"

SPLIT_NAMES = ("train", "dev", "test")
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


@dataclass(frozen=True)
class FunctionExtract:
    file: str
    name: str
    start_line: int
    end_line: int
    code: str
    touched_by_commit: bool = False

    def to_dict(self) -> Dict:
        return {
            "file": self.file,
            "name": self.name,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "code": self.code,
            "touched_by_commit": self.touched_by_commit,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "FunctionExtract":
        return FunctionExtract(
            file=d["file"],
            name=d["name"],
            start_line=int(d["start_line"]),
            end_line=int(d["end_line"]),
            code=d["code"],
            touched_by_commit=bool(d["touched_by_commit"]),
        )


@dataclass(frozen=True)
class LabeledExample:
    id: str
    label: int
    label_source: str
    project: str
    bug_type: str
    bug_info: Dict[str, object]
    versions: Dict[str, str]
    commit: Dict[str, object]
    trace: Tuple[TraceStep, ...]
    functions: Tuple[FunctionExtract, ...]
    compiler_args: str = ""
    zipped_bug_report: Optional[str] = None
    warnings: Tuple[str, ...] = ()


def zip_report(raw_report: str) -> str:
    """gzip + base64 a report; fixed mtime so the encoding is deterministic."""
    payload = gzip.compress(raw_report.encode("utf-8"), mtime=0)
    return base64.b64encode(payload).decode("ascii")


def unzip_report(encoded: str) -> str:
    return gzip.decompress(base64.b64decode(encoded)).decode("utf-8")


def example_to_dict(ex: LabeledExample) -> Dict:
    d: Dict[str, object] = {
        "id": ex.id,
        "label": ex.label,
        "label_source": ex.label_source,
        "project": ex.project,
        "bug_type": ex.bug_type,
        "bug_info": dict(ex.bug_info),
        "versions": dict(ex.versions),
        "commit": dict(ex.commit),
        "trace": [step_to_dict(s) for s in ex.trace],
        "functions": [f.to_dict() for f in ex.functions],
        "compiler_args": ex.compiler_args,
    }
    if ex.zipped_bug_report is not None:
        d["zipped_bug_report"] = ex.zipped_bug_report
    if ex.warnings:
        d["warnings"] = list(ex.warnings)
    return d


def example_from_dict(d: Mapping) -> LabeledExample:
    return LabeledExample(
        id=d["id"],
        label=int(d["label"]),
        label_source=d["label_source"],
        project=d["project"],
        bug_type=d["bug_type"],
        bug_info=dict(d["bug_info"]),
        versions=dict(d["versions"]),
        commit=dict(d["commit"]),
        trace=tuple(step_from_dict(s) for s in d["trace"]),
        functions=tuple(FunctionExtract.from_dict(f) for f in d["functions"]),
        compiler_args=d.get("compiler_args", ""),
        zipped_bug_report=d.get("zipped_bug_report"),
        warnings=tuple(d.get("warnings", ())),
    )


def write_dataset(path: Path, examples: Sequence[LabeledExample]) -> None:
    ordered = sorted(examples, key=lambda e: e.id)
    lines = "".join(
        json.dumps(example_to_dict(e), sort_keys=True, separators=(",", ":")) + "\n"
        for e in ordered
    )
    write_text_atomic(path, lines)


def read_dataset(path: Path) -> List[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                examples.append(example_from_dict(json.loads(line)))
    return examples


def extract_function(tree: Path, file: str, line: int) -> FunctionExtract:
    """Extract the function enclosing ``line`` of ``file`` under ``tree``.

    Falls back to a fixed-radius line window named "<unknown>" when no
    enclosing function brace pair is found.
    """
    path = Path(tree) / file
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise FileUnreadable(f"{file}: {exc.strerror or exc}") from exc
    span = cfuncs.enclosing_function(text, line)
    if span is not None:
        name, start, end = span.name, span.start_line, span.end_line
    else:
        name = UNKNOWN_FUNCTION
        start, end = cfuncs.line_window(text, line)
    return FunctionExtract(
        file=file,
        name=name,
        start_line=start,
        end_line=end,
        code=cfuncs.slice_lines(text, start, end),
    )


def remap_line(line: int, hunks: Sequence) -> Optional[int]:
    """Map a before-version line number to the after version.

    Returns None when the line falls inside a removed range (no after
    counterpart). Hunks with before_count 0 are pure insertions placed
    after their before_start line.
    """
    delta = 0
    for h in sorted(hunks, key=lambda h: (h.before_start, h.after_start)):
        if h.before_count == 0:
            if line > h.before_start:
                delta += h.after_count
            continue
        end = h.before_start + h.before_count - 1
        if line > end:
            delta += h.after_count - h.before_count
        elif line >= h.before_start:
            return None
    return line + delta


def _overlaps(start: int, end: int, ranges: Sequence[Tuple[int, int]]) -> bool:
    return any(start <= hi and lo <= end for lo, hi in ranges)


def _message_digest(message: str) -> str:
    return hashlib.sha1(message.encode("utf-8")).hexdigest()


def extraction_side(decision: LabelDecision) -> str:
    """Which tree of the deciding pair the issue's source lives in.

    An issue first observed as introduced by its deciding commit only
    exists in the after tree; everything else is present before the fix.
    """
    for pair, classification in decision.occurrences:
        if pair == decision.pair:
            return "after" if classification == "introduced" else "before"
    return "before"


def example_id(fingerprint: str, before_hash: str) -> str:
    return f"{fingerprint}/{before_hash[:8]}"


def build_auto_labeler_example(
    decision: LabelDecision,
    issue: Issue,
    pair: VersionPair,
    diff: CommitDiff,
    before_tree: Path,
    after_tree: Path,
    project: str,
    compiler_args: str = "",
) -> LabeledExample:
    side = extraction_side(decision)
    if side == "after":
        tree = after_tree
        touched = diff.added_ranges_by_file()
    else:
        tree = before_tree
        touched = diff.removed_ranges_by_file()

    functions: List[FunctionExtract] = []
    warnings: List[str] = []
    seen = set()
    for step in issue.trace:
        try:
            fe = extract_function(tree, step.file, step.line)
        except FileUnreadable as exc:
            note = f"{step.file}:{step.line}: {exc}"
            if note not in warnings:
                warnings.append(note)
            continue
        key = (fe.file, fe.start_line, fe.end_line)
        if key in seen:
            continue
        seen.add(key)
        if _overlaps(fe.start_line, fe.end_line, touched.get(fe.file, ())):
            fe = FunctionExtract(
                fe.file, fe.name, fe.start_line, fe.end_line, fe.code, True
            )
        functions.append(fe)

    return LabeledExample(
        id=example_id(decision.fingerprint, pair.before_hash),
        label=decision.label,
        label_source=AUTO_LABELER,
        project=project,
        bug_type=issue.bug_type,
        bug_info={
            "file": issue.file,
            "line": issue.line,
            "column": issue.column,
            "qualifier": issue.qualifier,
            "procedure": issue.procedure,
        },
        versions={"before": pair.before_hash, "after": pair.after_hash},
        commit={
            "hash": pair.after_hash,
            "author_date": pair.meta.author_date,
            "message_digest": _message_digest(pair.meta.message),
        },
        trace=issue.trace,
        functions=tuple(functions),
        compiler_args=compiler_args,
        zipped_bug_report=zip_report(issue.raw_report),
        warnings=tuple(warnings),
    )


def _file_change(diff: CommitDiff, before_path: str) -> Optional[FileChange]:
    for fc in diff.files:
        if fc.before_path == before_path:
            return fc
    return None


def _containing_extract(
    positive: LabeledExample, file: str, line: int
) -> Optional[FunctionExtract]:
    for fe in positive.functions:
        if fe.file == file and fe.start_line <= line <= fe.end_line:
            return fe
    return None


def build_after_fix_example(
    positive: LabeledExample, after_tree: Path, diff: CommitDiff
) -> LabeledExample:
    """Re-extract a positive's functions from the fixed tree as a negative.

    Trace line targets are remapped through the commit's hunks; a step
    whose line was removed falls back to the surviving function of the
    same name, and is dropped when there is none.
    """
    if positive.label != 1 or positive.label_source != AUTO_LABELER:
        raise ValueError(
            "after-fix extraction requires a label-1 auto-labeler example, got "
            f"label={positive.label} source={positive.label_source}"
        )
    added = diff.added_ranges_by_file()

    functions: List[FunctionExtract] = []
    warnings: List[str] = []
    seen = set()

    def add(fe: FunctionExtract) -> None:
        key = (fe.file, fe.start_line, fe.end_line)
        if key in seen:
            return
        seen.add(key)
        if _overlaps(fe.start_line, fe.end_line, added.get(fe.file, ())):
            fe = FunctionExtract(
                fe.file, fe.name, fe.start_line, fe.end_line, fe.code, True
            )
        functions.append(fe)

    for step in positive.trace:
        fc = _file_change(diff, step.file)
        if fc is not None and fc.after_path is None:
            continue  # file deleted by the fix
        after_path = fc.after_path if fc is not None else step.file
        target = remap_line(step.line, fc.hunks) if fc is not None else step.line
        if target is not None:
            try:
                add(extract_function(after_tree, after_path, target))
            except FileUnreadable as exc:
                note = f"{after_path}:{target}: {exc}"
                if note not in warnings:
                    warnings.append(note)
            continue
        # The step's line was removed: fall back to the same-named function.
        origin = _containing_extract(positive, step.file, step.line)
        if origin is None or origin.name == UNKNOWN_FUNCTION:
            continue
        try:
            path = Path(after_tree) / after_path
            text = path.read_text(encoding="utf-8", errors="replace")
        except OSError:
            continue
        for span in cfuncs.function_spans(text):
            if span.name == origin.name:
                add(
                    FunctionExtract(
                        file=after_path,
                        name=span.name,
                        start_line=span.start_line,
                        end_line=span.end_line,
                        code=cfuncs.slice_lines(text, span.start_line, span.end_line),
                    )
                )
                break

    if not functions:
        raise NothingExtractable(positive.id)

    return LabeledExample(
        id=positive.id + "/after_fix",
        label=0,
        label_source=AFTER_FIX,
        project=positive.project,
        bug_type=positive.bug_type,
        bug_info=dict(positive.bug_info),
        versions=dict(positive.versions),
        commit=dict(positive.commit),
        trace=positive.trace,
        functions=tuple(functions),
        compiler_args=positive.compiler_args,
        zipped_bug_report=None,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class DatasetSplit:
    train: Tuple[str, ...]
    dev: Tuple[str, ...]
    test: Tuple[str, ...]
    ratios: Tuple[float, float, float]
    seed: int

    def part(self, name: str) -> Tuple[str, ...]:
        return {"train": self.train, "dev": self.dev, "test": self.test}[name]


def largest_remainder_counts(n: int, ratios: Sequence[float]) -> List[int]:
    """Integer allocation of n items to ratios, remainders to the largest
    fractional parts (earlier ratio wins ties)."""
    quotas = [n * r for r in ratios]
    counts = [int(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def split_dataset(
    examples: Sequence[LabeledExample],
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> DatasetSplit:
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {tuple(ratios)}")
    strata: Dict[str, List[str]] = {}
    for ex in examples:
        strata.setdefault(ex.bug_type, []).append(ex.id)
    parts: Tuple[List[str], List[str], List[str]] = ([], [], [])
    for bug_type in sorted(strata):
        ids = sorted(strata[bug_type])
        random.Random(f"{seed}:{bug_type}").shuffle(ids)
        counts = largest_remainder_counts(len(ids), ratios)
        pos = 0
        for part, count in zip(parts, counts):
            part.extend(ids[pos : pos + count])
            pos += count
    train, dev, test = (tuple(sorted(p)) for p in parts)
    return DatasetSplit(train, dev, test, tuple(ratios), seed)


def write_split(dirpath: Path, split: DatasetSplit) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    for name in SPLIT_NAMES:
        body = "".join(i + "\n" for i in split.part(name))
        write_text_atomic(dirpath / f"{name}.txt", body)


def read_split_ids(dirpath: Path, name: str) -> List[str]:
    path = Path(dirpath) / f"{name}.txt"
    return [line for line in path.read_text(encoding="utf-8").splitlines() if line]
