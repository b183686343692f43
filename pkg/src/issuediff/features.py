"""Bug-report feature extraction and min-max normalization.

Each issue yields a fixed vector of 25 named features computed from the
report text alone (plus the enclosing function's span for one of them).
A Normalizer fitted on training rows maps every entry into [0,1]: the
categorical `error` entry through a dense category code scaled by the
code count, everything else through per-feature min-max with clipping.
"""

from __future__ import annotations

import json
import posixpath
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ._util import write_text_atomic
from .report import Issue

FEATURE_NAMES: Tuple[str, ...] = (
    "error",
    "error_line",
    "error_line_len",
    "error_line_depth",
    "average_error_line_depth",
    "max_error_line_depth",
    "error_pos_fun",
    "average_code_line_length",
    "max_code_line_length",
    "length",
    "code_line_count",
    "alias_count",
    "arithmetic_count",
    "assignment_count",
    "call_count",
    "cfile_count",
    "for_count",
    "infinity_count",
    "keywords_count",
    "package_count",
    "question_count",
    "return_count",
    "size_calculating_count",
    "parameter_count",
    "offset_added",
)

N_FEATURES = len(FEATURE_NAMES)

C_KEYWORDS = (
    "auto", "break", "case", "char", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if", "int",
    "long", "register", "return", "short", "signed", "sizeof", "static",
    "struct", "switch", "typedef", "union", "unsigned", "void", "volatile",
    "while",
)

_KEYWORD_RE = re.compile(r"\b(?:" + "|".join(C_KEYWORDS) + r")\b")
_BRANCH_RE = re.compile(r"\b(?:if|else|switch|case)\b")
_SIZE_CALC_RE = re.compile(r"\b(?:sizeof|strlen)\b")
_FOR_RE = re.compile(r"\bfor\b")
_ARITH_RE = re.compile(r"<<|>>|[+\-*/%]")
_ADDR_ASSIGN_RE = re.compile(r"=\s*&")
_PTR_ASSIGN_RE = re.compile(r"\*\s*[A-Za-z_]\w*\s*=(?!=)")
_OFFSET_ADDED_RE = re.compile(r"offset added", re.IGNORECASE)


@dataclass(frozen=True)
class FeatureRow:
    """Raw feature values for one issue.

    The `error` entry is categorical; raw rows hold 0.0 there and carry
    the bug type alongside, so the Normalizer can assign dense codes
    from training data only.
    """

    bug_type: str
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(
                f"expected {N_FEATURES} feature values, got {len(self.values)}"
            )


def _indent(line: str) -> int:
    depth = 0
    for ch in line:
        if ch == " ":
            depth += 1
        elif ch == "\t":
            depth += 4
        else:
            break
    return depth


def _count_arith(line: str) -> int:
    return len(_ARITH_RE.findall(line.replace("->", "")))


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def extract_features(
    issue: Issue, function_span: Optional[Tuple[int, int]] = None
) -> FeatureRow:
    """Compute the 25 features for one issue.

    function_span is the (start_line, end_line) of the function enclosing
    the error location, when known; it drives error_pos_fun only.
    """
    steps = issue.trace
    n_steps = len(steps)
    all_lines = [line for s in steps for line in s.context]
    flow_lines = [s.involved_line() for s in steps if s.context]
    error_line_text = steps[-1].involved_line() if steps else ""

    if function_span is not None:
        start, end = function_span
        error_pos_fun = (issue.line - start) / max(1, end - start + 1)
    else:
        error_pos_fun = 0.0

    def fraction(pred) -> float:
        return sum(1 for s in steps if pred(s)) / n_steps if n_steps else 0.0

    values = {
        "error": 0.0,
        "error_line": float(issue.line),
        "error_line_len": float(len(error_line_text)),
        "error_line_depth": float(_indent(error_line_text)),
        "average_error_line_depth": _mean([_indent(l) for l in all_lines]),
        "max_error_line_depth": float(max((_indent(l) for l in all_lines), default=0)),
        "error_pos_fun": float(error_pos_fun),
        "average_code_line_length": _mean([len(l) for l in flow_lines]),
        "max_code_line_length": float(max((len(l) for l in flow_lines), default=0)),
        "length": float(len(all_lines)),
        "code_line_count": float(len(flow_lines)),
        "alias_count": float(
            sum(
                1
                for l in flow_lines
                if _ADDR_ASSIGN_RE.search(l) or _PTR_ASSIGN_RE.search(l)
            )
        ),
        "arithmetic_count": _mean(
            [float(_count_arith(s.involved_line())) for s in steps]
        ),
        "assignment_count": fraction(lambda s: s.description.startswith("Assignment")),
        "call_count": fraction(lambda s: s.description.startswith("Call")),
        "cfile_count": float(len({s.file for s in steps if s.file.endswith(".c")})),
        "for_count": float(sum(len(_FOR_RE.findall(l)) for l in flow_lines)),
        "infinity_count": fraction(lambda s: "+oo" in s.description),
        "keywords_count": float(sum(len(_KEYWORD_RE.findall(l)) for l in all_lines)),
        "package_count": float(len({posixpath.dirname(s.file) for s in steps})),
        "question_count": fraction(lambda s: "??" in s.description),
        "return_count": _mean(
            [float(len(_BRANCH_RE.findall(s.involved_line()))) for s in steps]
        ),
        "size_calculating_count": _mean(
            [float(len(_SIZE_CALC_RE.findall(s.involved_line()))) for s in steps]
        ),
        "parameter_count": fraction(lambda s: s.description.startswith("Parameter")),
        "offset_added": float(len(_OFFSET_ADDED_RE.findall(issue.raw_report))),
    }
    return FeatureRow(
        bug_type=issue.bug_type,
        values=tuple(values[name] for name in FEATURE_NAMES),
    )


@dataclass(frozen=True)
class Normalizer:
    mins: Tuple[float, ...]
    maxs: Tuple[float, ...]
    categories: Mapping[str, int]

    def transform(self, row: FeatureRow) -> Tuple[float, ...]:
        out = []
        k = len(self.categories)
        for i, name in enumerate(FEATURE_NAMES):
            if name == "error":
                code = self.categories.get(row.bug_type, 0)
                v = code / k if k > 1 else 0.0
            else:
                lo, hi = self.mins[i], self.maxs[i]
                v = (row.values[i] - lo) / (hi - lo) if hi > lo else 0.0
            out.append(min(1.0, max(0.0, v)))
        return tuple(out)

    def to_dict(self) -> Dict:
        return {
            "min": dict(zip(FEATURE_NAMES, self.mins)),
            "max": dict(zip(FEATURE_NAMES, self.maxs)),
            "categories": dict(self.categories),
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Normalizer":
        return Normalizer(
            mins=tuple(float(d["min"][n]) for n in FEATURE_NAMES),
            maxs=tuple(float(d["max"][n]) for n in FEATURE_NAMES),
            categories={k: int(v) for k, v in d["categories"].items()},
        )


def fit_normalizer(rows: Sequence[FeatureRow]) -> Normalizer:
    """Per-feature min/max and error category codes, from training rows only.

    Category codes are dense 1..k over the sorted distinct bug types; an
    unseen type maps to the reserved code 0 at transform time.
    """
    if not rows:
        raise ValueError("cannot fit a normalizer on zero rows")
    matrix = [r.values for r in rows]
    mins = tuple(min(col) for col in zip(*matrix))
    maxs = tuple(max(col) for col in zip(*matrix))
    categories = {
        bt: i for i, bt in enumerate(sorted({r.bug_type for r in rows}), start=1)
    }
    return Normalizer(mins=mins, maxs=maxs, categories=categories)


def save_normalizer(path: Path, norm: Normalizer) -> None:
    write_text_atomic(path, json.dumps(norm.to_dict(), sort_keys=True, indent=2) + "\n")


def load_normalizer(path: Path) -> Normalizer:
    return Normalizer.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_features(path: Path, ids: Sequence[str], matrix: Sequence[Sequence[float]]) -> None:
    """CSV with the 25 feature columns then an id column."""
    if len(ids) != len(matrix):
        raise ValueError("ids and matrix row count differ")
    lines = [",".join(FEATURE_NAMES + ("id",))]
    for row_id, row in zip(ids, matrix):
        if len(row) != N_FEATURES:
            raise ValueError(f"row for {row_id} has {len(row)} values")
        lines.append(",".join(repr(float(v)) for v in row) + "," + row_id)
    write_text_atomic(path, "\n".join(lines) + "\n")


def read_features(path: Path) -> Tuple[List[str], np.ndarray]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [l for l in text.splitlines() if l]
    header = lines[0].split(",")
    if tuple(header) != FEATURE_NAMES + ("id",):
        raise ValueError(f"unexpected features header in {path}")
    ids = []
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append([float(p) for p in parts[:N_FEATURES]])
        ids.append(",".join(parts[N_FEATURES:]))
    matrix = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, N_FEATURES))
    return ids, matrix
