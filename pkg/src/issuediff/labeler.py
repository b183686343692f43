"""Issue fingerprinting, version-pair differencing, and label assignment.

The before/after issue sets of a fix commit are compared by location-free
fingerprint: issues that disappear across the fix are candidates for
label 1, and every candidate that fails a history filter is demoted to 0
with a recorded reason:

* ``fixed``              vanished at the fix and stayed gone
* ``never_fixed``        survives every observed fix
* ``fixed_then_unfixed`` vanished but reappears somewhere later in history
* ``untouched_by_diff``  vanished although the fix deleted no line the
                         trace passes through, so the disappearance is
                         collateral and not evidence of a real bug
"""

from __future__ import annotations

import hashlib
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Tuple

from .errors import ConfigMismatch, MissingDiff
from .gitrepo import CommitDiff, VersionPair
from .report import Issue

if TYPE_CHECKING:
    from .analyzer import IssueSet

_DIGITS = re.compile(r"\d+")

LABEL_REASONS = ("fixed", "never_fixed", "fixed_then_unfixed", "untouched_by_diff")
CLASSIFICATIONS = ("fixed", "pre_existing", "introduced")


def fingerprint(issue: Issue) -> str:
    """Location-free identity of an issue, stable across code motion.

    sha1 over the bug type, the digit-masked qualifier, and for every trace
    step its digit-masked description plus context lines stripped of
    leading/trailing whitespace. File paths, line numbers, and column
    numbers never enter the hash, so unrelated edits that shift an issue
    around do not change its identity; digit masking keeps line numbers
    embedded in analyzer prose from leaking location back in.
    """
    parts = [issue.bug_type, _DIGITS.sub("#", issue.qualifier)]
    for step in issue.trace:
        parts.append(_DIGITS.sub("#", step.description))
        parts.append("\x01".join(line.strip() for line in step.context))
    blob = "\x00".join(parts).encode("utf-8")
    return hashlib.sha1(blob).hexdigest()


def trace_overlaps_diff(issue: Issue, diff: CommitDiff) -> bool:
    """True iff some trace step lands on a line the commit removed
    (removed ranges are in before-version coordinates, as is the trace)."""
    ranges = diff.removed_ranges_by_file()
    for step in issue.trace:
        for start, end in ranges.get(step.file, ()):
            if start <= step.line <= end:
                return True
    return False


@dataclass(frozen=True)
class VersionPairResult:
    """Partition of one pair's fingerprints into fixed / pre-existing /
    introduced, with a lookup from fingerprint to a representative issue
    (before-version issues except for introduced ones)."""

    pair: VersionPair
    fixed: frozenset
    pre_existing: frozenset
    introduced: frozenset
    issue_by_fp: Dict[str, Issue]


def diff_pair(pair: VersionPair, before: "IssueSet", after: "IssueSet") -> VersionPairResult:
    """Set algebra over the pair's fingerprints: fixed = before \\ after,
    pre_existing = intersection, introduced = after \\ before."""
    if before.analyzer_config_hash != after.analyzer_config_hash:
        raise ConfigMismatch(
            f"issue sets come from different analyzer configs: "
            f"{before.analyzer_config_hash} vs {after.analyzer_config_hash}"
        )
    if before.commit_hash != pair.before_hash or after.commit_hash != pair.after_hash:
        raise ConfigMismatch(
            f"issue sets ({before.commit_hash}, {after.commit_hash}) do not "
            f"belong to pair ({pair.before_hash}, {pair.after_hash})"
        )

    before_fp: Dict[str, Issue] = {}
    for issue in before.issues:
        before_fp.setdefault(fingerprint(issue), issue)
    after_fp: Dict[str, Issue] = {}
    for issue in after.issues:
        after_fp.setdefault(fingerprint(issue), issue)

    fixed = frozenset(fp for fp in before_fp if fp not in after_fp)
    pre_existing = frozenset(fp for fp in before_fp if fp in after_fp)
    introduced = frozenset(fp for fp in after_fp if fp not in before_fp)

    issue_by_fp = dict(before_fp)
    for fp in introduced:
        issue_by_fp[fp] = after_fp[fp]
    return VersionPairResult(
        pair=pair,
        fixed=fixed,
        pre_existing=pre_existing,
        introduced=introduced,
        issue_by_fp=issue_by_fp,
    )


@dataclass(frozen=True)
class LabelDecision:
    fingerprint: str
    label: int
    reason: str
    pair: VersionPair  # the deciding occurrence's pair
    occurrences: Tuple[Tuple[VersionPair, str], ...]  # (pair, classification), history order

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "label": self.label,
            "reason": self.reason,
            "pair": {"before_hash": self.pair.before_hash, "after_hash": self.pair.after_hash},
            "occurrences": [
                {
                    "before_hash": p.before_hash,
                    "after_hash": p.after_hash,
                    "classification": cls,
                }
                for p, cls in self.occurrences
            ],
        }


def merge_history(
    results: Iterable[VersionPairResult],
    diffs: Mapping[VersionPair, CommitDiff],
) -> List[LabelDecision]:
    """Combine per-pair results into one decision per fingerprint.

    Pairs are processed in (author_date asc, commit hash asc) order, so the
    outcome is independent of input ordering. A fingerprint is labeled 1
    exactly when some pair fixed it, no pair with a strictly greater
    author_date sees it again in any set, and the earliest fixing commit's
    diff removed a line its trace passes through. The deciding pair is the
    earliest fixing pair when one exists (also for fixed_then_unfixed: the
    fix that got invalidated), otherwise the earliest occurrence. Output is
    sorted by fingerprint.
    """
    ordered = sorted(results, key=lambda r: (r.pair.meta.author_date, r.pair.after_hash))
    diff_index = {
        (pair.before_hash, pair.after_hash): diff for pair, diff in diffs.items()
    }

    occurrences: Dict[str, List[Tuple[int, str]]] = defaultdict(list)
    for idx, result in enumerate(ordered):
        for classification in CLASSIFICATIONS:
            for fp in getattr(result, classification):
                occurrences[fp].append((idx, classification))

    decisions: List[LabelDecision] = []
    for fp in sorted(occurrences):
        occ = occurrences[fp]
        occ.sort(key=lambda item: item[0])
        occ_pairs = tuple((ordered[idx].pair, cls) for idx, cls in occ)
        fix_indices = [idx for idx, cls in occ if cls == "fixed"]

        if not fix_indices:
            deciding = ordered[occ[0][0]]
            decisions.append(
                LabelDecision(fp, 0, "never_fixed", deciding.pair, occ_pairs)
            )
            continue

        fix_result = ordered[fix_indices[0]]
        fix_date = fix_result.pair.meta.author_date
        reappears = any(
            ordered[idx].pair.meta.author_date > fix_date for idx, _ in occ
        )
        if reappears:
            decisions.append(
                LabelDecision(fp, 0, "fixed_then_unfixed", fix_result.pair, occ_pairs)
            )
            continue

        key = (fix_result.pair.before_hash, fix_result.pair.after_hash)
        if key not in diff_index:
            raise MissingDiff(
                f"no diff for pair {key[0][:12]}..{key[1][:12]} needed by {fp}"
            )
        if not trace_overlaps_diff(fix_result.issue_by_fp[fp], diff_index[key]):
            decisions.append(
                LabelDecision(fp, 0, "untouched_by_diff", fix_result.pair, occ_pairs)
            )
        else:
            decisions.append(LabelDecision(fp, 1, "fixed", fix_result.pair, occ_pairs))
    return decisions
