"""Read-only git access: commit listing, tree snapshots, and unified diffs.

Everything here shells out to the git binary through subprocess; the
repository under inspection is never checked out or mutated. Snapshots are
extracted with ``git archive`` and cached by tree id, so commits sharing a
tree share one extraction, and re-running is free.
"""

from __future__ import annotations

import io
import re
import shutil
import subprocess
import tarfile
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ._util import file_lock, run
from .errors import BranchNotFound, RepoNotFound, UnknownCommit, WorkdirNotWritable

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


@dataclass(frozen=True)
class CommitMeta:
    """A single-parent commit; merge commits never make it into one."""

    hash: str
    parent_hash: str
    author_date: int
    message: str

    def to_dict(self) -> dict:
        return {
            "hash": self.hash,
            "parent_hash": self.parent_hash,
            "author_date": self.author_date,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CommitMeta":
        return cls(d["hash"], d["parent_hash"], d["author_date"], d["message"])


@dataclass(frozen=True)
class VersionPair:
    """The two versions around a fix: before = parent, after = the commit."""

    before_hash: str
    after_hash: str
    meta: CommitMeta

    @classmethod
    def from_meta(cls, meta: CommitMeta) -> "VersionPair":
        return cls(before_hash=meta.parent_hash, after_hash=meta.hash, meta=meta)


@dataclass(frozen=True)
class Hunk:
    """One zero-context diff hunk. ``before_count`` 0 means pure insertion
    after line ``before_start``; ``after_count`` 0 means pure deletion."""

    before_start: int
    before_count: int
    after_start: int
    after_count: int

    def as_list(self) -> List[int]:
        return [self.before_start, self.before_count, self.after_start, self.after_count]


@dataclass
class FileChange:
    before_path: Optional[str]  # None when the file was added
    after_path: Optional[str]  # None when the file was deleted
    hunks: List[Hunk] = field(default_factory=list)

    @property
    def path(self) -> str:
        """Before-version path when one exists (diff coordinates are
        before-relative), else the added file's path."""
        return self.before_path if self.before_path is not None else (self.after_path or "")

    @property
    def removed_ranges(self) -> List[Tuple[int, int]]:
        return [
            (h.before_start, h.before_start + h.before_count - 1)
            for h in self.hunks
            if h.before_count > 0
        ]

    @property
    def added_ranges(self) -> List[Tuple[int, int]]:
        return [
            (h.after_start, h.after_start + h.after_count - 1)
            for h in self.hunks
            if h.after_count > 0
        ]

    def to_dict(self) -> dict:
        return {
            "before_path": self.before_path,
            "after_path": self.after_path,
            "hunks": [h.as_list() for h in self.hunks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FileChange":
        return cls(
            before_path=d["before_path"],
            after_path=d["after_path"],
            hunks=[Hunk(*quad) for quad in d["hunks"]],
        )


@dataclass
class CommitDiff:
    commit: CommitMeta
    files: List[FileChange]

    def removed_ranges_by_file(self) -> Dict[str, List[Tuple[int, int]]]:
        out: Dict[str, List[Tuple[int, int]]] = {}
        for fc in self.files:
            if fc.before_path is not None and fc.removed_ranges:
                out.setdefault(fc.before_path, []).extend(fc.removed_ranges)
        return out

    def added_ranges_by_file(self) -> Dict[str, List[Tuple[int, int]]]:
        out: Dict[str, List[Tuple[int, int]]] = {}
        for fc in self.files:
            if fc.after_path is not None and fc.added_ranges:
                out.setdefault(fc.after_path, []).extend(fc.added_ranges)
        return out

    def touches_c_source(self) -> bool:
        for fc in self.files:
            for p in (fc.before_path, fc.after_path):
                if p is not None and (p.endswith(".c") or p.endswith(".h")):
                    return True
        return False


def open_repo(path: Path) -> Path:
    """Validate that ``path`` is a git repository and return it resolved."""
    path = Path(path)
    if not path.is_dir():
        raise RepoNotFound(f"not a directory: {path}")
    proc = run(["git", "rev-parse", "--git-dir"], cwd=path)
    if proc.returncode != 0:
        raise RepoNotFound(f"not a git repository: {path}")
    return path.resolve()


def list_candidate_commits(
    repo: Path, branch: str, limit: Optional[int] = None
) -> List[CommitMeta]:
    """Commits reachable from ``branch`` that have exactly one parent
    (merges and roots excluded), newest author date first with the commit
    hash breaking ties, truncated to ``limit`` when given."""
    proc = run(
        ["git", "log", "--format=%H%x00%P%x00%at%x00%B%x1e", branch],
        cwd=repo,
    )
    if proc.returncode != 0:
        raise BranchNotFound(f"cannot list commits on {branch!r}: {proc.stderr.strip()}")
    commits = []
    for record in proc.stdout.split("\x1e"):
        if not record.strip():
            continue
        chash, parents, date, message = record.lstrip("\n").split("\x00", 3)
        parent_list = parents.split()
        if len(parent_list) != 1:
            continue
        commits.append(
            CommitMeta(
                hash=chash.strip(),
                parent_hash=parent_list[0],
                author_date=int(date),
                message=message,
            )
        )
    commits.sort(key=lambda c: (-c.author_date, c.hash))
    if limit is not None:
        commits = commits[:limit]
    return commits


def tree_id(repo: Path, commit: str) -> str:
    proc = run(["git", "rev-parse", f"{commit}^{{tree}}"], cwd=repo)
    if proc.returncode != 0:
        raise UnknownCommit(f"unknown commit {commit}: {proc.stderr.strip()}")
    return proc.stdout.strip()


def snapshot_tree(repo: Path, commit: str, snapshots_root: Path) -> Path:
    """Extract the commit's tree under ``snapshots_root`` and return its
    path. Snapshots are keyed by tree id and built atomically (extract to
    a temp dir, then rename); a lock makes concurrent workers wanting the
    same tree do the work once.
    """
    tid = tree_id(repo, commit)
    dest = snapshots_root / tid
    if dest.is_dir():
        return dest
    try:
        snapshots_root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WorkdirNotWritable(f"cannot create {snapshots_root}: {exc}") from exc
    with file_lock(snapshots_root / f"{tid}.lock"):
        if dest.is_dir():
            return dest
        raw = subprocess.run(
            ["git", "archive", "--format=tar", commit],
            cwd=str(repo),
            capture_output=True,
        )
        if raw.returncode != 0:
            raise UnknownCommit(
                f"cannot archive {commit}: {raw.stderr.decode('utf-8', 'replace').strip()}"
            )
        try:
            tmp = Path(tempfile.mkdtemp(dir=str(snapshots_root), prefix=tid + ".tmp"))
        except OSError as exc:
            raise WorkdirNotWritable(f"cannot write under {snapshots_root}: {exc}") from exc
        try:
            with tarfile.open(fileobj=io.BytesIO(raw.stdout)) as tar:
                tar.extractall(tmp)
            tmp.replace(dest)
        except OSError:
            shutil.rmtree(tmp, ignore_errors=True)
            if dest.is_dir():
                return dest
            raise
    return dest


def checkout_pair(repo: Path, pair: VersionPair, workdir: Path) -> Tuple[Path, Path]:
    """Snapshot both sides of a pair; returns (before_tree, after_tree)."""
    before = snapshot_tree(repo, pair.before_hash, workdir)
    after = snapshot_tree(repo, pair.after_hash, workdir)
    return before, after


def compute_diff(repo: Path, pair: VersionPair) -> CommitDiff:
    """Zero-context unified diff across the pair, rename detection on.
    Removed ranges are in before-version line coordinates, added ranges in
    after-version coordinates."""
    proc = run(
        [
            "git",
            "diff",
            "--no-color",
            "--no-ext-diff",
            "--unified=0",
            "-M",
            pair.before_hash,
            pair.after_hash,
        ],
        cwd=repo,
    )
    if proc.returncode not in (0, 1):
        raise UnknownCommit(
            f"cannot diff {pair.before_hash}..{pair.after_hash}: {proc.stderr.strip()}"
        )
    return CommitDiff(commit=pair.meta, files=_parse_diff(proc.stdout))


def _strip_prefix(path: str, prefix: str) -> Optional[str]:
    if path == "/dev/null":
        return None
    if path.startswith(prefix):
        return path[len(prefix):]
    return path


def _parse_diff(text: str) -> List[FileChange]:
    files: List[FileChange] = []
    current: Optional[FileChange] = None
    rename_from: Optional[str] = None
    rename_to: Optional[str] = None

    def flush_pure_rename() -> None:
        # A 100% rename has no ---/+++ lines, only rename from/to.
        nonlocal rename_from, rename_to
        if current is None and rename_from is not None and rename_to is not None:
            files.append(FileChange(before_path=rename_from, after_path=rename_to))
        rename_from = None
        rename_to = None

    for line in text.split("\n"):
        if line.startswith("diff --git "):
            flush_pure_rename()
            current = None
        elif line.startswith("rename from "):
            rename_from = line[len("rename from "):]
        elif line.startswith("rename to "):
            rename_to = line[len("rename to "):]
        elif line.startswith("--- "):
            rename_from = None
            rename_to = None
            current = FileChange(before_path=_strip_prefix(line[4:], "a/"), after_path=None)
        elif line.startswith("+++ "):
            after_path = _strip_prefix(line[4:], "b/")
            if current is None:
                current = FileChange(before_path=None, after_path=after_path)
            else:
                current.after_path = after_path
            files.append(current)
        elif line.startswith("@@ "):
            m = _HUNK_RE.match(line)
            if m and current is not None:
                current.hunks.append(
                    Hunk(
                        before_start=int(m.group(1)),
                        before_count=int(m.group(2)) if m.group(2) is not None else 1,
                        after_start=int(m.group(3)),
                        after_count=int(m.group(4)) if m.group(4) is not None else 1,
                    )
                )
    flush_pure_rename()
    return files
