"""A tiny deterministic C analyzer used for fixtures and pipeline tests.

It scans ``.c``/``.h`` files with three line-oriented lexical rules:

* NULL_DEREFERENCE  a variable assigned NULL and later dereferenced with no
                    guard or reassignment in between
* MEMORY_LEAK       malloc/calloc result neither freed nor returned inside
                    the same function
* BUFFER_OVERRUN    constant index at or past the declared array size

Reports use the canonical grammar and are fully determined by the source
tree: same input, same bytes out. That is the property the pipeline needs
from a real analyzer, minus the cost of running one. Usage::

    python -m issuediff.fixture_analyzer SRC_DIR OUT_DIR

Writes ``report.txt`` and ``compile_commands.json`` into OUT_DIR. The
environment variable FIXTURE_ANALYZER_CRASH, when set to a nonzero integer,
makes the process exit with that code before writing anything (for
exercising failure handling).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from .cfuncs import FunctionSpan, function_spans
from .report import Issue, make_issue, make_step, render_report

_ASSIGN_NULL = re.compile(r"\b([A-Za-z_]\w*)\s*=\s*NULL\b")
_DEREF_STAR = re.compile(r"(?<![\w)])\*([A-Za-z_]\w*)")
_DEREF_ARROW = re.compile(r"\b([A-Za-z_]\w*)\s*->")
_GUARD_HEAD = re.compile(r"\b(?:if|while)\s*\(")
_ALLOC = re.compile(r"\b([A-Za-z_]\w*)\s*=\s*(?:\([^)]*\)\s*)?(?:malloc|calloc)\s*\(")
_ARRAY_DECL = re.compile(r"\b[A-Za-z_]\w*\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]")


def _context(lines: List[str], line: int) -> Tuple[List[str], int]:
    lo = max(1, line - 2)
    hi = min(len(lines), line + 2)
    return lines[lo - 1 : hi], line - lo


class _FileScanner:
    def __init__(self, rel_path: str, text: str):
        self.rel = rel_path
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.spans = function_spans(text)
        self.issues: List[Issue] = []

    def _step(self, index: int, line: int, col: int, description: str):
        ctx, center = _context(self.lines, line)
        return make_step(index, self.rel, line, col, description, ctx, center)

    def _finish(self, bug_type: str, qualifier: str, steps) -> None:
        self.issues.append(make_issue(bug_type, qualifier, steps))

    def scan(self) -> List[Issue]:
        for fn in self.spans:
            body = [
                (no, self.lines[no - 1])
                for no in range(fn.start_line, min(fn.end_line, len(self.lines)) + 1)
            ]
            self._scan_null_deref(fn, body)
            self._scan_leaks(fn, body)
            self._scan_overruns(fn, body)
        self.issues.sort(key=lambda i: (i.file, i.line, i.column, i.bug_type))
        return self.issues

    def _scan_null_deref(self, fn: FunctionSpan, body) -> None:
        tracked = {}  # var -> line where it became NULL
        for no, line in body:
            if _GUARD_HEAD.search(line):
                for var in list(tracked):
                    if re.search(rf"\b{re.escape(var)}\b", line):
                        del tracked[var]
            for rx in (_DEREF_STAR, _DEREF_ARROW):
                for m in rx.finditer(line):
                    var = m.group(1)
                    if var in tracked:
                        assign_line = tracked.pop(var)
                        col = m.start(1) + 1
                        steps = [
                            self._entry_step_for(fn),
                            self._step(2, assign_line, 1, f"Assignment: {var} = NULL"),
                            self._step(3, no, col, f"Dereference of {var}"),
                        ]
                        self._finish(
                            "NULL_DEREFERENCE",
                            f"pointer `{var}` assigned null at line {assign_line} "
                            f"is dereferenced at line {no}",
                            steps,
                        )
            for m in _ASSIGN_NULL.finditer(line):
                tracked.setdefault(m.group(1), no)
            for var in list(tracked):
                if tracked[var] != no and re.search(
                    rf"\b{re.escape(var)}\s*=(?!=)\s*(?!NULL\b)", line
                ):
                    del tracked[var]

    def _scan_leaks(self, fn: FunctionSpan, body) -> None:
        for no, line in body:
            for m in _ALLOC.finditer(line):
                var = m.group(1)
                rest = [text for n2, text in body if n2 > no]
                escapes = re.compile(
                    rf"\bfree\s*\(\s*{re.escape(var)}\b|\breturn\s*\(?\s*{re.escape(var)}\b"
                )
                if any(escapes.search(text) for text in rest):
                    continue
                col = m.start(1) + 1
                steps = [
                    self._entry_step_for(fn),
                    self._step(2, no, col, f"Call: {var} = malloc()"),
                ]
                self._finish(
                    "MEMORY_LEAK",
                    f"memory allocated at line {no} into `{var}` is never freed",
                    steps,
                )

    def _scan_overruns(self, fn: FunctionSpan, body) -> None:
        decls = {}  # buf -> (size, decl line)
        for no, line in body:
            for m in _ARRAY_DECL.finditer(line):
                decls.setdefault(m.group(1), (int(m.group(2)), no))
        flagged = set()
        for no, line in body:
            for buf, (size, decl_line) in decls.items():
                if buf in flagged or no <= decl_line:
                    continue
                for m in re.finditer(rf"\b{re.escape(buf)}\s*\[\s*(\d+)\s*\]", line):
                    idx = int(m.group(1))
                    if idx >= size:
                        flagged.add(buf)
                        col = m.start() + 1
                        steps = [
                            self._entry_step_for(fn),
                            self._step(
                                2, decl_line, 1, f"Array declaration: {buf} has {size} elements"
                            ),
                            self._step(3, no, col, f"Offset added: index {idx} of {buf}"),
                        ]
                        self._finish(
                            "BUFFER_OVERRUN",
                            f"index {idx} is out of bounds for `{buf}` of size {size} "
                            f"declared at line {decl_line}",
                            steps,
                        )
                        break

    def _entry_step_for(self, fn: FunctionSpan):
        ctx, center = _context(self.lines, fn.start_line)
        return make_step(1, self.rel, fn.start_line, 1, f"start of procedure {fn.name}", ctx, center)


def analyze_tree(src: Path) -> List[Issue]:
    src = Path(src)
    issues: List[Issue] = []
    for path in sorted(src.rglob("*")):
        if path.suffix not in (".c", ".h") or not path.is_file():
            continue
        rel = path.relative_to(src).as_posix()
        text = path.read_text(encoding="utf-8", errors="replace")
        issues.extend(_FileScanner(rel, text).scan())
    issues.sort(key=lambda i: (i.file, i.line, i.column, i.bug_type))
    return issues


def scanned_files(src: Path) -> List[str]:
    return [
        p.relative_to(src).as_posix()
        for p in sorted(Path(src).rglob("*"))
        if p.suffix in (".c", ".h") and p.is_file()
    ]


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fixture-analyzer", description="deterministic toy C analyzer"
    )
    parser.add_argument("src", type=Path, help="source tree to scan")
    parser.add_argument("out", type=Path, help="directory for report.txt")
    args = parser.parse_args(argv)

    crash = int(os.environ.get("FIXTURE_ANALYZER_CRASH", "0") or "0")
    if crash:
        print("induced crash", file=sys.stderr)
        return crash

    issues = analyze_tree(args.src)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.txt").write_text(render_report(issues), encoding="utf-8")
    commands = [
        {"directory": str(Path(args.src).resolve()), "file": rel, "command": f"cc -c {rel}"}
        for rel in scanned_files(args.src)
    ]
    (args.out / "compile_commands.json").write_text(
        json.dumps(commands, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
