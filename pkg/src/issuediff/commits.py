"""Fix-commit selection by weighted message lexicon.

Commit messages are cleaned into lowercase tokens, scored by summing the
weights of matched lexicon terms (single tokens and adjacent two-token
phrases), and selected when the score clears a threshold. The lexicon is a
tab-separated text file (``term<TAB>weight<TAB>category``); a default one
covering common C bug-fix vocabulary ships with the package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import ParseError

_URL_RE = re.compile(r"https?://\S+")
_EMAIL_RE = re.compile(r"\S+@\S+")
_HEX_ID_RE = re.compile(r"\b(?=[0-9a-fA-F]*\d)[0-9a-fA-F]{7,40}\b")
_INLINE_CODE_RE = re.compile(r"`[^`\n]*`")
_NON_ALNUM_RE = re.compile(r"[^0-9A-Za-z]+")

# Metadata trailer keys whose whole line is dropped before tokenizing.
_TRAILER_KEYS = frozenset(
    {
        "signed-off-by",
        "co-authored-by",
        "co-developed-by",
        "reviewed-by",
        "reviewed-on",
        "acked-by",
        "tested-by",
        "reported-by",
        "suggested-by",
        "cc",
        "link",
        "fixes",
        "closes",
        "bug",
        "change-id",
        "ref",
        "refs",
        "see-also",
    }
)


@dataclass(frozen=True)
class CleanedMessage:
    commit_hash: str
    tokens: Tuple[str, ...]
    raw_length: int


def clean_message(message: str, commit_hash: str = "") -> CleanedMessage:
    """Normalize a commit message into lowercase alphanumeric tokens.

    Fenced code blocks and metadata trailer lines are dropped first, then
    in order: URLs, email addresses, hex ids of 7+ characters containing a
    digit, inline backtick code spans. Remaining punctuation becomes
    whitespace, everything is lowercased, and pure-digit tokens are
    discarded (so "CVE-2016-1234" survives as the marker token "cve").
    """
    kept: List[str] = []
    in_fence = False
    for line in message.split("\n"):
        stripped = line.strip()
        if stripped.startswith("```"):
            in_fence = not in_fence
            continue
        if in_fence:
            continue
        if ":" in stripped and stripped.split(":", 1)[0].lower() in _TRAILER_KEYS:
            continue
        kept.append(line)
    text = "\n".join(kept)
    text = _URL_RE.sub(" ", text)
    text = _EMAIL_RE.sub(" ", text)
    text = _HEX_ID_RE.sub(" ", text)
    text = _INLINE_CODE_RE.sub(" ", text)
    text = _NON_ALNUM_RE.sub(" ", text).lower()
    tokens = tuple(tok for tok in text.split() if not tok.isdigit())
    return CleanedMessage(commit_hash=commit_hash, tokens=tokens, raw_length=len(message))


@dataclass(frozen=True)
class LexiconEntry:
    term: str  # single token or two tokens separated by one space
    weight: float
    category: str


@dataclass
class Lexicon:
    entries: Dict[str, LexiconEntry]
    source: str = ""

    @property
    def single_terms(self) -> Dict[str, LexiconEntry]:
        return {t: e for t, e in self.entries.items() if " " not in t}

    @property
    def phrase_terms(self) -> Dict[str, LexiconEntry]:
        return {t: e for t, e in self.entries.items() if " " in t}

    @classmethod
    def load(cls, path: Path) -> "Lexicon":
        return cls(
            entries=_parse_lexicon(Path(path).read_text(encoding="utf-8"), str(path)),
            source=str(path),
        )

    @classmethod
    def default(cls) -> "Lexicon":
        text = resources.files("issuediff").joinpath("data/lexicon.txt").read_text("utf-8")
        return cls(entries=_parse_lexicon(text, "<default>"), source="<default>")


def _parse_lexicon(text: str, source: str) -> Dict[str, LexiconEntry]:
    entries: Dict[str, LexiconEntry] = {}
    offset = 0
    for line_no, line in enumerate(text.split("\n"), start=1):

        def fail(message: str) -> ParseError:
            return ParseError(message, offset, line_no, source)

        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            fields = line.split("\t")
            if len(fields) != 3:
                raise fail(f"expected 3 tab-separated fields, got {len(fields)}")
            term, weight_text, category = (f.strip() for f in fields)
            words = term.split(" ")
            if not term or len(words) > 2 or any(
                not w or _NON_ALNUM_RE.search(w) or w != w.lower() for w in words
            ):
                raise fail(
                    f"term must be one or two lowercase alphanumeric words: {term!r}"
                )
            try:
                weight = float(weight_text)
            except ValueError:
                raise fail(f"bad weight: {weight_text!r}") from None
            if weight <= 0:
                raise fail(f"weight must be positive: {weight}")
            if not category:
                raise fail("empty category")
            if term in entries:
                raise fail(f"duplicate term: {term!r}")
            entries[term] = LexiconEntry(term=term, weight=weight, category=category)
        offset += len(line.encode("utf-8")) + 1
    return entries


@dataclass(frozen=True)
class CommitScore:
    commit_hash: str
    score: float
    category: Optional[str]  # set exactly when score cleared the threshold
    matched_terms: Tuple[str, ...]
    author_date: int  # carried through for the selection ordering

    def to_dict(self) -> dict:
        return {
            "commit_hash": self.commit_hash,
            "score": self.score,
            "category": self.category,
            "matched_terms": list(self.matched_terms),
            "author_date": self.author_date,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CommitScore":
        return cls(
            commit_hash=d["commit_hash"],
            score=d["score"],
            category=d["category"],
            matched_terms=tuple(d["matched_terms"]),
            author_date=d["author_date"],
        )


def score_commit(
    cleaned: CleanedMessage,
    lexicon: Lexicon,
    threshold: float = 1.0,
    author_date: int = 0,
) -> CommitScore:
    """Sum the weights of distinct matched terms (single tokens plus
    adjacent two-token phrases). The category is the group of the
    highest-weight matched term and is set exactly when the score clears
    the threshold."""
    tokens = cleaned.tokens
    candidates = set(tokens)
    candidates.update(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    matched = sorted(t for t in candidates if t in lexicon.entries)
    score = sum(lexicon.entries[t].weight for t in matched)

    category: Optional[str] = None
    if matched and score >= threshold:
        best = min(matched, key=lambda t: (-lexicon.entries[t].weight, t))
        category = lexicon.entries[best].category
    return CommitScore(
        commit_hash=cleaned.commit_hash,
        score=score,
        category=category,
        matched_terms=tuple(matched),
        author_date=author_date,
    )


def select_commits(
    scores: Iterable[CommitScore],
    threshold: float = 1.0,
    max_count: Optional[int] = None,
) -> List[str]:
    """Hashes of commits scoring at or above the threshold, ordered by
    (score desc, author_date desc, hash asc), truncated to ``max_count``."""
    chosen = [cs for cs in scores if cs.score >= threshold and cs.matched_terms]
    chosen.sort(key=lambda cs: (-cs.score, -cs.author_date, cs.commit_hash))
    hashes = [cs.commit_hash for cs in chosen]
    if max_count is not None:
        hashes = hashes[:max_count]
    return hashes
