"""Canonical analyzer report grammar: data types, parser, and renderer.

A report document is UTF-8 text holding zero or more issue blocks separated
by a line of exactly eight dashes. One block looks like::

    src/core/parse.c:42:9: error: NULL_DEREFERENCE
      pointer `p` could be null when dereferenced at line 42
    <blank line>
    1. src/core/parse.c:38:0: start of procedure fill_table
      static void fill_table(struct tab *t)
      {
    >     int *p = NULL;
          int i = 0;
          for (i = 0; i < t->n; i++) {
    2. src/core/parse.c:42:9: Assignment: *p = i
      ...

Each step carries up to five context lines: the involved line is prefixed
with ``> ``, the rest with two spaces, and the involved line sits in the
middle except near the start or end of a file. A column of 0 means the
column is unknown. Steps whose description starts with
``start of procedure`` mark function entries; the issue's enclosing
procedure is the name from the last such step (``<unknown>`` when absent).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, List

from .errors import ParseError

SEPARATOR = "-" * 8
FUNCTION_ENTRY_PREFIX = "start of procedure"

_HEADER_RE = re.compile(r"^(?P<file>.+?):(?P<line>\d+):(?P<col>\d+): error: (?P<type>[A-Z][A-Z0-9_]*)$")
_STEP_RE = re.compile(r"^(?P<index>\d+)\. (?P<file>.+?):(?P<line>\d+):(?P<col>\d+): (?P<desc>.*)$")


@dataclass(frozen=True)
class TraceStep:
    index: int
    file: str
    line: int
    column: int
    description: str
    context: tuple[str, ...] = ()
    center: int = 0
    is_function_entry: bool = False

    def involved_line(self) -> str:
        if not self.context:
            return ""
        return self.context[self.center]


@dataclass(frozen=True)
class Issue:
    bug_type: str
    file: str
    line: int
    column: int
    procedure: str
    qualifier: str
    trace: tuple[TraceStep, ...]
    raw_report: str


def make_step(
    index: int,
    file: str,
    line: int,
    column: int,
    description: str,
    context: Iterable[str] = (),
    center: int = 0,
) -> TraceStep:
    """Build a step, deriving the function-entry flag from the description."""
    return TraceStep(
        index=index,
        file=file,
        line=line,
        column=column,
        description=description,
        context=tuple(context),
        center=center,
        is_function_entry=description.startswith(FUNCTION_ENTRY_PREFIX),
    )


def procedure_of(trace: Iterable[TraceStep]) -> str:
    """Enclosing procedure: the name from the last function-entry step."""
    name = "<unknown>"
    for step in trace:
        if step.is_function_entry:
            tail = step.description[len(FUNCTION_ENTRY_PREFIX):].strip()
            if tail.endswith("()"):
                tail = tail[:-2]
            if tail:
                name = tail
    return name


def make_issue(
    bug_type: str,
    qualifier: str,
    trace: Iterable[TraceStep],
) -> Issue:
    """Build an issue located at its final trace step; raw_report is filled
    with the canonical rendering so fingerprints and caches agree."""
    steps = tuple(trace)
    if not steps:
        raise ValueError("trace must be non-empty")
    last = steps[-1]
    issue = Issue(
        bug_type=bug_type,
        file=last.file,
        line=last.line,
        column=last.column,
        procedure=procedure_of(steps),
        qualifier=qualifier,
        trace=steps,
        raw_report="",
    )
    return replace(issue, raw_report=render_issue(issue))


def render_issue(issue: Issue) -> str:
    lines: List[str] = [
        f"{issue.file}:{issue.line}:{issue.column}: error: {issue.bug_type}",
        f"  {issue.qualifier}",
        "",
    ]
    for step in issue.trace:
        lines.append(f"{step.index}. {step.file}:{step.line}:{step.column}: {step.description}")
        for i, ctx in enumerate(step.context):
            prefix = "> " if i == step.center else "  "
            lines.append(prefix + ctx)
    return "\n".join(lines) + "\n"


def render_report(issues: Iterable[Issue]) -> str:
    blocks = [render_issue(issue) for issue in issues]
    return (SEPARATOR + "\n").join(blocks)


class _Cursor:
    """Line iterator that tracks byte offsets for error reporting."""

    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
        self.pos = 0
        self.offset = 0

    def peek(self) -> str | None:
        if self.pos >= len(self.lines):
            return None
        return self.lines[self.pos]

    def advance(self) -> str:
        line = self.lines[self.pos]
        self.pos += 1
        self.offset += len(line.encode("utf-8")) + 1
        return line

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.offset, self.pos + 1)


def parse_report(text: str, source: str = "") -> List[Issue]:
    """Parse a report document into issues, in input order.

    Raises ParseError (with byte offset) on any departure from the grammar,
    including a final step whose location disagrees with the header.
    """
    cur = _Cursor(text)
    issues: List[Issue] = []
    try:
        while cur.peek() is not None:
            issues.append(_parse_block(cur))
            if cur.peek() == SEPARATOR:
                cur.advance()
                if cur.peek() is None:
                    raise cur.error("separator not followed by an issue block")
    except ParseError as exc:
        if source and not exc.source:
            raise ParseError(exc.message, exc.offset, exc.line_no, source) from None
        raise
    return issues


def _parse_block(cur: _Cursor) -> Issue:
    block_lines: List[str] = []

    header = cur.peek()
    assert header is not None
    m = _HEADER_RE.match(header)
    if not m:
        raise cur.error(f"malformed issue header: {header!r}")
    block_lines.append(cur.advance())

    qual_line = cur.peek()
    if qual_line is None or not qual_line.startswith("  "):
        raise cur.error("expected two-space-indented qualifier line")
    block_lines.append(cur.advance())
    qualifier = qual_line[2:]

    if cur.peek() != "":
        raise cur.error("expected blank line after qualifier")
    block_lines.append(cur.advance())

    steps: List[TraceStep] = []
    while True:
        line = cur.peek()
        if line is None or line == SEPARATOR:
            break
        sm = _STEP_RE.match(line)
        if not sm:
            raise cur.error(f"expected trace step, got: {line!r}")
        block_lines.append(cur.advance())

        context: List[str] = []
        center = -1
        while True:
            ctx = cur.peek()
            if ctx is None or ctx == SEPARATOR or _STEP_RE.match(ctx):
                break
            if ctx.startswith("> "):
                if center >= 0:
                    raise cur.error("step has two involved-line markers")
                center = len(context)
            elif not ctx.startswith("  "):
                raise cur.error(f"malformed context line: {ctx!r}")
            block_lines.append(cur.advance())
            context.append(ctx[2:])
        if len(context) > 5:
            raise cur.error(f"step has {len(context)} context lines (max 5)")
        if context and center < 0:
            raise cur.error("step context lacks the involved-line marker")

        index = int(sm.group("index"))
        if steps and index <= steps[-1].index:
            raise cur.error(f"step index {index} does not increase")
        steps.append(
            make_step(
                index=index,
                file=sm.group("file"),
                line=int(sm.group("line")),
                column=int(sm.group("col")),
                description=sm.group("desc"),
                context=context,
                center=max(center, 0),
            )
        )

    if not steps:
        raise cur.error("issue block has no trace steps")
    hdr_file, hdr_line = m.group("file"), int(m.group("line"))
    if (steps[-1].file, steps[-1].line) != (hdr_file, hdr_line):
        raise cur.error(
            f"final step at {steps[-1].file}:{steps[-1].line} does not match "
            f"header location {hdr_file}:{hdr_line}"
        )

    return Issue(
        bug_type=m.group("type"),
        file=hdr_file,
        line=hdr_line,
        column=int(m.group("col")),
        procedure=procedure_of(steps),
        qualifier=qualifier,
        trace=tuple(steps),
        raw_report="\n".join(block_lines) + "\n",
    )


def step_to_dict(step: TraceStep) -> dict:
    return {
        "index": step.index,
        "file": step.file,
        "line": step.line,
        "column": step.column,
        "description": step.description,
        "context": list(step.context),
        "center": step.center,
        "is_function_entry": step.is_function_entry,
    }


def step_from_dict(d: dict) -> TraceStep:
    return TraceStep(
        index=d["index"],
        file=d["file"],
        line=d["line"],
        column=d["column"],
        description=d["description"],
        context=tuple(d["context"]),
        center=d["center"],
        is_function_entry=d["is_function_entry"],
    )


def issue_to_dict(issue: Issue) -> dict:
    return {
        "bug_type": issue.bug_type,
        "file": issue.file,
        "line": issue.line,
        "column": issue.column,
        "procedure": issue.procedure,
        "qualifier": issue.qualifier,
        "trace": [step_to_dict(s) for s in issue.trace],
        "raw_report": issue.raw_report,
    }


def issue_from_dict(d: dict) -> Issue:
    return Issue(
        bug_type=d["bug_type"],
        file=d["file"],
        line=d["line"],
        column=d["column"],
        procedure=d["procedure"],
        qualifier=d["qualifier"],
        trace=tuple(step_from_dict(s) for s in d["trace"]),
        raw_report=d["raw_report"],
    )
