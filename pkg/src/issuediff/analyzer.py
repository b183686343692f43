"""Analyzer gateway: run the external analyzer once per commit, cache forever.

The analyzer is any command that takes a checked-out tree and writes bug
reports in the canonical grammar into an output directory. Results are
cached under ``cache/<config_hash>/<commit_hash>/`` as one issue per
ndjson line plus a ``meta`` descriptor (stdout/stderr digests, wall time);
a per-key lock plus a re-check after acquiring it give at most one
invocation per (config, commit) even with concurrent workers. Cache entries
are never evicted automatically: analyses are the expensive part of the
pipeline, so stale entries are removed only by an explicit ``--clear-cache``.
"""

from __future__ import annotations

import hashlib
import json
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from ._util import file_lock, write_text_atomic
from .errors import AnalyzerCrashed, ConfigMismatch, ReportMissing
from .report import Issue, issue_from_dict, issue_to_dict, parse_report

_STDERR_TAIL = 2000
COMPILE_DB_NAME = "compile_commands.json"


@dataclass(frozen=True)
class AnalyzerConfig:
    """How to invoke the analyzer.

    ``command_template`` must contain the placeholders ``{tree}`` and
    ``{out}`` exactly once each; they expand to the source snapshot and a
    scratch output directory. ``report_path_pattern`` is a glob, relative
    to the output directory, matching the report files to parse.
    """

    command_template: str
    report_path_pattern: str = "report.txt"
    version: str = ""
    enabled_checks: Tuple[str, ...] = ()

    def __post_init__(self):
        for placeholder in ("{tree}", "{out}"):
            if self.command_template.count(placeholder) != 1:
                raise ValueError(
                    f"command template must contain {placeholder} exactly once: "
                    f"{self.command_template!r}"
                )

    @property
    def config_hash(self) -> str:
        blob = json.dumps(
            {
                "command_template": self.command_template,
                "report_path_pattern": self.report_path_pattern,
                "version": self.version,
                "enabled_checks": list(self.enabled_checks),
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def build_command(self, tree: Path, out: Path) -> List[str]:
        return [
            part.replace("{tree}", str(tree)).replace("{out}", str(out))
            for part in shlex.split(self.command_template)
        ]

    def to_dict(self) -> dict:
        return {
            "command_template": self.command_template,
            "report_path_pattern": self.report_path_pattern,
            "version": self.version,
            "enabled_checks": list(self.enabled_checks),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzerConfig":
        return cls(
            command_template=d["command_template"],
            report_path_pattern=d.get("report_path_pattern", "report.txt"),
            version=d.get("version", ""),
            enabled_checks=tuple(d.get("enabled_checks", ())),
        )


@dataclass(frozen=True)
class IssueSet:
    """Issues found at one commit; deduplicated so no two entries share a
    fingerprint (first occurrence in report order wins)."""

    commit_hash: str
    issues: Tuple[Issue, ...]
    analyzer_config_hash: str


class AnalyzerGateway:
    """Cache-fronted access to analyzer results, safe under concurrency."""

    def __init__(self, config: AnalyzerConfig, cache_root: Path):
        self.config = config
        self.cache_root = Path(cache_root)
        self._invocations = 0
        self._mutex = threading.Lock()

    @property
    def invocations(self) -> int:
        """How many times this gateway actually spawned the analyzer."""
        with self._mutex:
            return self._invocations

    def cache_dir(self, commit_hash: str) -> Path:
        return self.cache_root / self.config.config_hash / commit_hash

    def cached(self, commit_hash: str) -> Optional[IssueSet]:
        """Load a cached result, or None when absent. Raises ConfigMismatch
        when the entry disagrees with this gateway's config or is torn."""
        cdir = self.cache_dir(commit_hash)
        issues_path = cdir / "issues.ndjson"
        meta_path = cdir / "meta"
        if not issues_path.is_file() or not meta_path.is_file():
            return None
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("config_hash") != self.config.config_hash or meta.get("commit") != commit_hash:
            raise ConfigMismatch(
                f"cache entry at {cdir} was written for commit "
                f"{meta.get('commit')!r} / config {meta.get('config_hash')!r}"
            )
        issues = tuple(
            issue_from_dict(json.loads(line))
            for line in issues_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
        if len(issues) != meta.get("n_issues"):
            raise ConfigMismatch(
                f"cache entry at {cdir} holds {len(issues)} issues, meta says "
                f"{meta.get('n_issues')}"
            )
        return IssueSet(
            commit_hash=commit_hash,
            issues=issues,
            analyzer_config_hash=self.config.config_hash,
        )

    def run_analyzer(self, tree: Path, commit_hash: str) -> IssueSet:
        """Analyzer result for one commit snapshot, from cache when possible."""
        hit = self.cached(commit_hash)
        if hit is not None:
            return hit
        key_dir = self.cache_root / self.config.config_hash
        key_dir.mkdir(parents=True, exist_ok=True)
        with file_lock(key_dir / f"{commit_hash}.lock"):
            hit = self.cached(commit_hash)
            if hit is not None:
                return hit
            issues, digests, wall, compile_db = self._invoke(tree)
            issues = _dedup_by_fingerprint(issues)
            self._store(commit_hash, issues, digests, wall, compile_db)
        return IssueSet(
            commit_hash=commit_hash,
            issues=tuple(issues),
            analyzer_config_hash=self.config.config_hash,
        )

    def compile_args_for(self, commit_hash: str, file: str) -> str:
        """Compiler arguments for ``file`` from the compilation database the
        analyzer wrote for this commit, or "" when none was produced."""
        db_path = self.cache_dir(commit_hash) / COMPILE_DB_NAME
        if not db_path.is_file():
            return ""
        try:
            entries = json.loads(db_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return ""
        for entry in entries:
            if entry.get("file") == file:
                if "command" in entry:
                    return str(entry["command"])
                if "arguments" in entry:
                    return " ".join(str(a) for a in entry["arguments"])
        return ""

    def _invoke(
        self, tree: Path
    ) -> Tuple[List[Issue], Tuple[str, str], float, Optional[str]]:
        with tempfile.TemporaryDirectory(prefix="analyzer-out.") as out_dir:
            cmd = self.config.build_command(Path(tree), Path(out_dir))
            started = time.monotonic()
            proc = subprocess.run(
                cmd,
                capture_output=True,
                text=True,
                encoding="utf-8",
                errors="replace",
            )
            wall = time.monotonic() - started
            with self._mutex:
                self._invocations += 1
            if proc.returncode != 0:
                raise AnalyzerCrashed(proc.returncode, proc.stderr[-_STDERR_TAIL:])
            reports = sorted(Path(out_dir).glob(self.config.report_path_pattern))
            if not reports:
                raise ReportMissing(
                    f"no report matching {self.config.report_path_pattern!r} under {out_dir}"
                )
            issues: List[Issue] = []
            for report in reports:
                text = report.read_text(encoding="utf-8")
                issues.extend(parse_report(text, source=report.name))
            digests = (
                hashlib.sha1(proc.stdout.encode("utf-8")).hexdigest(),
                hashlib.sha1(proc.stderr.encode("utf-8")).hexdigest(),
            )
            compile_db = None
            db_path = Path(out_dir) / COMPILE_DB_NAME
            if db_path.is_file():
                compile_db = db_path.read_text(encoding="utf-8")
            return issues, digests, wall, compile_db

    def _store(
        self,
        commit_hash: str,
        issues: List[Issue],
        digests: Tuple[str, str],
        wall: float,
        compile_db: Optional[str],
    ) -> None:
        cdir = self.cache_dir(commit_hash)
        if compile_db is not None:
            write_text_atomic(cdir / COMPILE_DB_NAME, compile_db)
        lines = "".join(
            json.dumps(issue_to_dict(i), sort_keys=True, separators=(",", ":")) + "\n"
            for i in issues
        )
        meta = {
            "commit": commit_hash,
            "config_hash": self.config.config_hash,
            "command_template": self.config.command_template,
            "n_issues": len(issues),
            "stdout_sha1": digests[0],
            "stderr_sha1": digests[1],
            "wall_time_s": round(wall, 3),
        }
        write_text_atomic(cdir / "issues.ndjson", lines)
        write_text_atomic(
            cdir / "meta", json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n"
        )


def _dedup_by_fingerprint(issues: List[Issue]) -> List[Issue]:
    from .labeler import fingerprint  # local import; labeler type-checks against IssueSet

    seen = set()
    out = []
    for issue in issues:
        fp = fingerprint(issue)
        if fp not in seen:
            seen.add(fp)
            out.append(issue)
    return out
