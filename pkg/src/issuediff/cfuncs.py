"""Locating C function bodies without a real parser.

Comments, string and character literals, and preprocessor lines are masked
to spaces first, so brace counting only ever sees code. A function is a
top-level brace block whose header (the text since the previous top-level
``;`` or ``}``) ends in a parameter list preceded by an identifier. When an
issue line sits outside every recognized function (macros, K&R
definitions, file-scope code), callers fall back to a fixed window of
lines around it.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass
from typing import List, Optional, Tuple

WINDOW_RADIUS = 25

_IDENT_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)$")

# Identifiers that cannot be function names when found before a paren group.
_NOT_NAMES = frozenset(
    {
        "if", "for", "while", "switch", "return", "do", "else", "case",
        "sizeof", "void", "int", "char", "long", "short", "float", "double",
        "signed", "unsigned", "const", "static", "inline", "struct", "union",
        "enum", "__attribute__", "__declspec", "_Alignas", "_Static_assert",
    }
)


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    start_line: int  # 1-based, inclusive
    end_line: int


def mask_non_code(text: str) -> str:
    """Replace comment, literal, and preprocessor content with spaces,
    preserving newlines and total length."""
    out = list(text)
    n = len(text)
    i = 0
    at_line_start = True
    CODE, LINE_C, BLOCK_C, STRING, CHAR, PREPROC = range(6)
    state = CODE
    while i < n:
        c = text[i]
        if state == CODE:
            if c == "\n":
                at_line_start = True
            elif c in " \t":
                pass
            elif c == "#" and at_line_start:
                state = PREPROC
                out[i] = " "
                at_line_start = False
            elif c == "/" and i + 1 < n and text[i + 1] == "/":
                state = LINE_C
                out[i] = " "
                at_line_start = False
            elif c == "/" and i + 1 < n and text[i + 1] == "*":
                state = BLOCK_C
                out[i] = " "
                at_line_start = False
            elif c == '"':
                state = STRING
                out[i] = " "
                at_line_start = False
            elif c == "'":
                state = CHAR
                at_line_start = False
                out[i] = " "
            else:
                at_line_start = False
        elif state in (LINE_C, PREPROC):
            if c == "\n":
                if i > 0 and text[i - 1] == "\\":
                    pass  # line continuation
                else:
                    state = CODE
                    at_line_start = True
            else:
                out[i] = " "
        elif state == BLOCK_C:
            if c == "*" and i + 1 < n and text[i + 1] == "/":
                out[i] = " "
                out[i + 1] = " "
                i += 1
                state = CODE
            elif c != "\n":
                out[i] = " "
        elif state in (STRING, CHAR):
            quote = '"' if state == STRING else "'"
            if c == "\\" and i + 1 < n:
                out[i] = " "
                if text[i + 1] != "\n":
                    out[i + 1] = " "
                i += 1
            elif c == quote:
                out[i] = " "
                state = CODE
            elif c != "\n":
                out[i] = " "
        i += 1
    return "".join(out)


def _function_name(header: str) -> Optional[str]:
    """The identifier owning the rightmost plausible parameter list."""
    stripped = header.rstrip()
    if stripped.endswith(("=", ",")):
        return None  # brace starts an initializer
    pos = len(header)
    while True:
        close = header.rfind(")", 0, pos)
        if close < 0:
            return None
        depth = 0
        j = close
        while j >= 0:
            if header[j] == ")":
                depth += 1
            elif header[j] == "(":
                depth -= 1
                if depth == 0:
                    break
            j -= 1
        if j < 0:
            return None
        m = _IDENT_RE.search(header[:j].rstrip())
        if m and m.group(1) not in _NOT_NAMES:
            return m.group(1)
        pos = j


def _match_brace(masked: str, open_idx: int) -> Optional[int]:
    depth = 0
    for i in range(open_idx, len(masked)):
        if masked[i] == "{":
            depth += 1
        elif masked[i] == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


def function_spans(text: str) -> List[FunctionSpan]:
    """All top-level function definitions, in file order."""
    masked = mask_non_code(text)
    newlines = [i for i, ch in enumerate(masked) if ch == "\n"]

    def line_of(idx: int) -> int:
        return bisect_left(newlines, idx) + 1

    spans: List[FunctionSpan] = []
    depth = 0
    boundary = 0
    i = 0
    n = len(masked)
    while i < n:
        c = masked[i]
        if depth == 0:
            if c == ";":
                boundary = i + 1
            elif c == "}":
                boundary = i + 1
            elif c == "{":
                header = masked[boundary:i]
                name = _function_name(header)
                if name is not None:
                    end = _match_brace(masked, i)
                    if end is None:
                        break
                    lead = len(header) - len(header.lstrip())
                    spans.append(
                        FunctionSpan(
                            name=name,
                            start_line=line_of(boundary + lead),
                            end_line=line_of(end),
                        )
                    )
                    i = end
                    boundary = end + 1
                else:
                    depth = 1
        else:
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    boundary = i + 1
        i += 1
    return spans


def enclosing_function(text: str, line: int) -> Optional[FunctionSpan]:
    for span in function_spans(text):
        if span.start_line <= line <= span.end_line:
            return span
    return None


def line_window(text: str, line: int, radius: int = WINDOW_RADIUS) -> Tuple[int, int]:
    """Clamped 1-based inclusive line range centered on ``line``."""
    total = len(text.split("\n"))
    if text.endswith("\n"):
        total -= 1
    total = max(total, 1)
    line = min(max(line, 1), total)
    return max(1, line - radius), min(total, line + radius)


def slice_lines(text: str, start: int, end: int) -> str:
    """Lines ``start``..``end`` (1-based, inclusive), newline-terminated."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    chunk = lines[start - 1 : end]
    return "\n".join(chunk) + ("\n" if chunk else "")
