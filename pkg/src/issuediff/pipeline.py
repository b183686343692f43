"""Staged, resumable pipeline.

Stage order: select commits from their messages, snapshot and analyze both
sides of every selected pair under a worker pool, diff and classify the
issue sets, merge history into label decisions, emit dataset records plus
after-fix negatives, split stratified by bug type, and extract features
for the records that carry a bug report.

Every artifact is written atomically, so an interrupted run resumes from
the last completed step and re-running a finished pipeline rewrites
nothing. Per-pair progress lives in status/<commit>.json files with
forward-only states pending -> analyzed -> diffed (or failed).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import dataset as ds
from ._util import write_text_atomic
from .analyzer import AnalyzerGateway, IssueSet
from .commits import Lexicon, clean_message, score_commit, select_commits
from .config import PipelineConfig
from .errors import (
    AnalyzerCrashed,
    ConfigError,
    NothingExtractable,
    PipelineError,
    UninitializedWorkdir,
)
from .features import extract_features, fit_normalizer, read_features, save_normalizer, write_features
from .gitrepo import (
    CommitDiff,
    CommitMeta,
    FileChange,
    VersionPair,
    checkout_pair,
    compute_diff,
    list_candidate_commits,
    open_repo,
    snapshot_tree,
)
from .labeler import CLASSIFICATIONS, LabelDecision, VersionPairResult, diff_pair, merge_history
from .report import Issue, issue_from_dict, issue_to_dict

PENDING = "pending"
ANALYZED = "analyzed"
DIFFED = "diffed"
FAILED = "failed"

_MARKER_NAME = "workdir.json"


@dataclass(frozen=True)
class PairStatus:
    pair: VersionPair
    state: str
    failure_reason: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "pair": self.pair.meta.to_dict(),
            "state": self.state,
            "failure_reason": self.failure_reason,
        }

    @staticmethod
    def from_dict(d: Mapping) -> "PairStatus":
        meta = CommitMeta.from_dict(d["pair"])
        return PairStatus(
            pair=VersionPair.from_meta(meta),
            state=d["state"],
            failure_reason=d.get("failure_reason"),
        )


@dataclass(frozen=True)
class RunSummary:
    selected: int
    analyzed: int
    failed: int
    pending: int
    examples: int
    by_label: Dict[int, int]
    by_label_source: Dict[str, int]
    after_fix_skipped: int

    def to_dict(self) -> Dict:
        return {
            "pairs": {
                "selected": self.selected,
                "analyzed": self.analyzed,
                "failed": self.failed,
                "pending": self.pending,
            },
            "examples": {
                "total": self.examples,
                "by_label": {str(k): v for k, v in sorted(self.by_label.items())},
                "by_label_source": dict(sorted(self.by_label_source.items())),
            },
            "after_fix_skipped": self.after_fix_skipped,
        }


class PipelineEnv:
    """Opened handles and resolved paths for one workdir."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.workdir = Path(config.workdir)
        self.repo: Optional[Path] = None
        self.gateway = AnalyzerGateway(config.analyzer, self.workdir / "cache")

    def open_repo(self) -> Path:
        if self.repo is None:
            value = self.config.repo_url_or_path
            if "://" in value:
                raise ConfigError(
                    f"remote repository URLs are not supported, clone {value} locally first"
                )
            self.repo = open_repo(Path(value))
        return self.repo

    @property
    def marker_path(self) -> Path:
        return self.workdir / _MARKER_NAME

    @property
    def selected_path(self) -> Path:
        return self.workdir / "selected.tsv"

    @property
    def status_dir(self) -> Path:
        return self.workdir / "status"

    @property
    def pairs_dir(self) -> Path:
        return self.workdir / "pairs"

    @property
    def snapshots_dir(self) -> Path:
        return self.workdir / "snapshots"

    @property
    def labels_path(self) -> Path:
        return self.workdir / "labels.ndjson"

    @property
    def records_path(self) -> Path:
        return self.workdir / "dataset" / "records.ndjson"

    @property
    def build_meta_path(self) -> Path:
        return self.workdir / "dataset" / "build_meta.json"

    @property
    def splits_dir(self) -> Path:
        return self.workdir / "splits"

    @property
    def features_path(self) -> Path:
        return self.workdir / "features" / "features.csv"

    @property
    def normalizer_path(self) -> Path:
        return self.workdir / "features" / "normalizer.json"

    @property
    def models_dir(self) -> Path:
        return self.workdir / "models"

    def status_path(self, pair: VersionPair) -> Path:
        return self.status_dir / f"{pair.after_hash}.json"

    def pair_path(self, pair: VersionPair) -> Path:
        return self.pairs_dir / f"{pair.after_hash}.ndjson"


def init_workdir(config: PipelineConfig) -> PipelineEnv:
    env = PipelineEnv(config)
    for sub in (
        env.workdir,
        env.status_dir,
        env.pairs_dir,
        env.workdir / "dataset",
        env.splits_dir,
        env.workdir / "features",
        env.models_dir,
    ):
        sub.mkdir(parents=True, exist_ok=True)
    if not env.marker_path.is_file():
        marker = {"format": 1, "project_name": config.project_name}
        write_text_atomic(env.marker_path, json.dumps(marker, sort_keys=True) + "\n")
    return env


def open_env(config: PipelineConfig) -> PipelineEnv:
    """Environment over an already-initialized workdir."""
    env = PipelineEnv(config)
    if not env.marker_path.is_file():
        raise UninitializedWorkdir(
            f"{env.workdir} has no {_MARKER_NAME}; run `init` (or `run`) first"
        )
    return env


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_status(env: PipelineEnv, status: PairStatus) -> None:
    write_text_atomic(env.status_path(status.pair), _dump(status.to_dict()) + "\n")


def _load_status(env: PipelineEnv, pair: VersionPair) -> PairStatus:
    path = env.status_path(pair)
    if not path.is_file():
        return PairStatus(pair=pair, state=PENDING)
    return PairStatus.from_dict(json.loads(path.read_text(encoding="utf-8")))


def _load_lexicon(config: PipelineConfig) -> Lexicon:
    if config.cma.lexicon:
        return Lexicon.load(Path(config.cma.lexicon))
    return Lexicon.default()


def select_stage(
    env: PipelineEnv,
    out_path: Optional[Path] = None,
    threshold: Optional[float] = None,
    limit: Optional[int] = None,
    lexicon_path: Optional[Path] = None,
    force: bool = False,
) -> List[VersionPair]:
    """Score commit messages, keep fix-like commits (optionally only those
    touching C sources), and record them with pending status entries.

    With the default out_path, an existing selected.tsv is trusted and the
    stage is skipped unless force is set.
    """
    config = env.config
    standard = out_path is None
    out = env.selected_path if standard else Path(out_path)
    if standard and not force and out.is_file():
        loaded = _load_selected(env)
        if loaded is not None:
            return loaded

    repo = env.open_repo()
    lexicon = (
        Lexicon.load(Path(lexicon_path)) if lexicon_path else _load_lexicon(config)
    )
    thr = config.cma.threshold if threshold is None else threshold
    cap = config.cma.limit if limit is None else limit

    metas = list_candidate_commits(repo, config.branch)
    meta_by_hash = {m.hash: m for m in metas}
    scores = [
        score_commit(
            clean_message(m.message, m.hash), lexicon, thr, author_date=m.author_date
        )
        for m in metas
    ]
    score_by_hash = {s.commit_hash: s for s in scores}
    chosen = select_commits(scores, threshold=thr, max_count=None)

    pairs: List[VersionPair] = []
    for commit_hash in chosen:
        pair = VersionPair.from_meta(meta_by_hash[commit_hash])
        if config.require_c_change:
            if not compute_diff(repo, pair).touches_c_source():
                continue
        pairs.append(pair)
        if cap is not None and len(pairs) >= cap:
            break

    if standard:
        for pair in pairs:
            current = _load_status(env, pair)
            if current.state == PENDING:
                _write_status(env, current)
    lines = "".join(
        f"{p.after_hash}\t{score_by_hash[p.after_hash].score!r}"
        f"\t{score_by_hash[p.after_hash].category}\n"
        for p in pairs
    )
    write_text_atomic(out, lines)
    return pairs


def _load_selected(env: PipelineEnv) -> Optional[List[VersionPair]]:
    """Rebuild the selected pair list from selected.tsv + status files.
    Returns None when the bookkeeping is incomplete (forces re-selection)."""
    pairs = []
    for line in env.selected_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        commit_hash = line.split("\t", 1)[0]
        status_path = env.status_dir / f"{commit_hash}.json"
        if not status_path.is_file():
            return None
        status = PairStatus.from_dict(
            json.loads(status_path.read_text(encoding="utf-8"))
        )
        pairs.append(status.pair)
    return pairs


def selected_pairs(env: PipelineEnv) -> List[VersionPair]:
    if not env.selected_path.is_file():
        raise UninitializedWorkdir(
            f"{env.workdir} has no selected.tsv; run `select-commits` first"
        )
    pairs = _load_selected(env)
    if pairs is None:
        raise UninitializedWorkdir(
            f"{env.workdir} has selected.tsv but incomplete status records; "
            "re-run `select-commits`"
        )
    return pairs


def pair_statuses(env: PipelineEnv) -> List[PairStatus]:
    return [_load_status(env, pair) for pair in selected_pairs(env)]


def clear_cache(env: PipelineEnv) -> None:
    """Discard analyzer outputs and send every pair (failed ones included)
    back to pending, so the next analyze or run recomputes from scratch."""
    import shutil

    cache_root = env.workdir / "cache"
    if cache_root.is_dir():
        shutil.rmtree(cache_root)
    for status in pair_statuses(env):
        if status.state != PENDING:
            _write_status(env, PairStatus(pair=status.pair, state=PENDING))


def _analyze_with_retry(gateway: AnalyzerGateway, tree: Path, commit: str) -> IssueSet:
    try:
        return gateway.run_analyzer(tree, commit)
    except AnalyzerCrashed:
        return gateway.run_analyzer(tree, commit)


def _issue_set_for(env: PipelineEnv, commit: str) -> IssueSet:
    cached = env.gateway.cached(commit)
    if cached is not None:
        return cached
    tree = snapshot_tree(env.open_repo(), commit, env.snapshots_dir)
    return _analyze_with_retry(env.gateway, tree, commit)


def _write_pair_file(path: Path, result: VersionPairResult, diff: CommitDiff) -> None:
    lines = [
        _dump({"kind": "pair", **result.pair.meta.to_dict()}),
        _dump({"kind": "diff", "files": [fc.to_dict() for fc in diff.files]}),
    ]
    for classification in CLASSIFICATIONS:
        for fp in sorted(getattr(result, classification)):
            lines.append(
                _dump(
                    {
                        "kind": "issue",
                        "fingerprint": fp,
                        "classification": classification,
                        "issue": issue_to_dict(result.issue_by_fp[fp]),
                    }
                )
            )
    write_text_atomic(path, "".join(line + "\n" for line in lines))


def _read_pair_file(path: Path) -> Tuple[VersionPairResult, CommitDiff]:
    pair: Optional[VersionPair] = None
    diff: Optional[CommitDiff] = None
    sets: Dict[str, set] = {c: set() for c in CLASSIFICATIONS}
    issue_by_fp: Dict[str, Issue] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        kind = doc.pop("kind")
        if kind == "pair":
            pair = VersionPair.from_meta(CommitMeta.from_dict(doc))
        elif kind == "diff":
            assert pair is not None, f"{path}: diff record before pair record"
            diff = CommitDiff(
                commit=pair.meta,
                files=tuple(FileChange.from_dict(f) for f in doc["files"]),
            )
        else:
            sets[doc["classification"]].add(doc["fingerprint"])
            issue_by_fp[doc["fingerprint"]] = issue_from_dict(doc["issue"])
    assert pair is not None and diff is not None, f"{path}: incomplete pair file"
    result = VersionPairResult(
        pair=pair,
        fixed=frozenset(sets["fixed"]),
        pre_existing=frozenset(sets["pre_existing"]),
        introduced=frozenset(sets["introduced"]),
        issue_by_fp=issue_by_fp,
    )
    return result, diff


def _process_one(env: PipelineEnv, pair: VersionPair, do_analyze: bool, do_diff: bool) -> Tuple[PairStatus, bool]:
    status = _load_status(env, pair)
    progressed = False
    if status.state == PENDING and do_analyze:
        try:
            before_tree, after_tree = checkout_pair(
                env.open_repo(), pair, env.snapshots_dir
            )
            _analyze_with_retry(env.gateway, before_tree, pair.before_hash)
            _analyze_with_retry(env.gateway, after_tree, pair.after_hash)
            status = PairStatus(pair=pair, state=ANALYZED)
        except PipelineError as exc:
            status = PairStatus(
                pair=pair,
                state=FAILED,
                failure_reason=f"{type(exc).__name__}: {exc}",
            )
        _write_status(env, status)
        progressed = True
    if status.state == ANALYZED and do_diff:
        try:
            before_set = _issue_set_for(env, pair.before_hash)
            after_set = _issue_set_for(env, pair.after_hash)
            diff = compute_diff(env.open_repo(), pair)
            result = diff_pair(pair, before_set, after_set)
            _write_pair_file(env.pair_path(pair), result, diff)
            status = PairStatus(pair=pair, state=DIFFED)
        except PipelineError as exc:
            status = PairStatus(
                pair=pair,
                state=FAILED,
                failure_reason=f"{type(exc).__name__}: {exc}",
            )
        _write_status(env, status)
        progressed = True
    return status, progressed


def process_pairs(
    env: PipelineEnv,
    pairs: Sequence[VersionPair],
    do_analyze: bool = True,
    do_diff: bool = True,
) -> Tuple[List[PairStatus], int]:
    """Run the per-pair stages under a worker pool; returns the final
    statuses in input order and how many pairs made progress."""
    if not pairs:
        return [], 0
    with ThreadPoolExecutor(max_workers=env.config.workers) as pool:
        results = list(
            pool.map(lambda p: _process_one(env, p, do_analyze, do_diff), pairs)
        )
    statuses = [status for status, _ in results]
    progressed = sum(1 for _, moved in results if moved)
    return statuses, progressed


def _diffed_results(
    env: PipelineEnv, statuses: Sequence[PairStatus]
) -> Tuple[List[VersionPairResult], Dict[VersionPair, CommitDiff]]:
    results = []
    diffs: Dict[VersionPair, CommitDiff] = {}
    for status in statuses:
        if status.state != DIFFED:
            continue
        result, diff = _read_pair_file(env.pair_path(status.pair))
        results.append(result)
        diffs[result.pair] = diff
    return results, diffs


def label_stage(
    env: PipelineEnv, statuses: Sequence[PairStatus], force: bool = True
) -> List[LabelDecision]:
    if not force and env.labels_path.is_file():
        return _load_decisions(env, statuses)
    results, diffs = _diffed_results(env, statuses)
    decisions = merge_history(results, diffs)
    write_text_atomic(
        env.labels_path, "".join(_dump(d.to_dict()) + "\n" for d in decisions)
    )
    return decisions


def _load_decisions(
    env: PipelineEnv, statuses: Sequence[PairStatus]
) -> List[LabelDecision]:
    pair_by_hashes = {
        (s.pair.before_hash, s.pair.after_hash): s.pair for s in statuses
    }
    decisions = []
    for line in env.labels_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        deciding = pair_by_hashes[
            (doc["pair"]["before_hash"], doc["pair"]["after_hash"])
        ]
        occurrences = tuple(
            (pair_by_hashes[(o["before_hash"], o["after_hash"])], o["classification"])
            for o in doc["occurrences"]
        )
        decisions.append(
            LabelDecision(
                fingerprint=doc["fingerprint"],
                label=int(doc["label"]),
                reason=doc["reason"],
                pair=deciding,
                occurrences=occurrences,
            )
        )
    return decisions


def build_stage(
    env: PipelineEnv,
    statuses: Sequence[PairStatus],
    decisions: Sequence[LabelDecision],
    force: bool = True,
) -> Tuple[List[ds.LabeledExample], int]:
    if not force and env.records_path.is_file() and env.build_meta_path.is_file():
        meta = json.loads(env.build_meta_path.read_text(encoding="utf-8"))
        return ds.read_dataset(env.records_path), int(meta["after_fix_skipped"])

    repo = env.open_repo()
    issue_lookup: Dict[VersionPair, Dict[str, Issue]] = {}
    diffs: Dict[VersionPair, CommitDiff] = {}
    for status in statuses:
        if status.state != DIFFED:
            continue
        result, diff = _read_pair_file(env.pair_path(status.pair))
        issue_lookup[result.pair] = result.issue_by_fp
        diffs[result.pair] = diff

    examples: List[ds.LabeledExample] = []
    skipped = 0
    for decision in decisions:
        pair = decision.pair
        issue = issue_lookup[pair][decision.fingerprint]
        diff = diffs[pair]
        before_tree, after_tree = checkout_pair(repo, pair, env.snapshots_dir)
        side_commit = (
            pair.after_hash
            if ds.extraction_side(decision) == "after"
            else pair.before_hash
        )
        compiler_args = env.gateway.compile_args_for(side_commit, issue.file)
        example = ds.build_auto_labeler_example(
            decision,
            issue,
            pair,
            diff,
            before_tree,
            after_tree,
            project=env.config.project_name,
            compiler_args=compiler_args,
        )
        examples.append(example)
        if example.label == 1:
            try:
                examples.append(ds.build_after_fix_example(example, after_tree, diff))
            except NothingExtractable:
                skipped += 1

    env.records_path.parent.mkdir(parents=True, exist_ok=True)
    ds.write_dataset(env.records_path, examples)
    write_text_atomic(
        env.build_meta_path, _dump({"after_fix_skipped": skipped}) + "\n"
    )
    return sorted(examples, key=lambda e: e.id), skipped


def split_stage(
    env: PipelineEnv, examples: Sequence[ds.LabeledExample], force: bool = True
) -> ds.DatasetSplit:
    manifest_done = all(
        (env.splits_dir / f"{name}.txt").is_file() for name in ds.SPLIT_NAMES
    )
    split = ds.split_dataset(examples, env.config.split_ratios, env.config.seed)
    if force or not manifest_done:
        ds.write_split(env.splits_dir, split)
    return split


def _issue_from_example(ex: ds.LabeledExample) -> Issue:
    raw = ds.unzip_report(ex.zipped_bug_report) if ex.zipped_bug_report else ""
    return Issue(
        bug_type=ex.bug_type,
        file=str(ex.bug_info["file"]),
        line=int(ex.bug_info["line"]),
        column=int(ex.bug_info["column"]),
        procedure=str(ex.bug_info["procedure"]),
        qualifier=str(ex.bug_info["qualifier"]),
        trace=ex.trace,
        raw_report=raw,
    )


def _error_function_span(ex: ds.LabeledExample) -> Optional[Tuple[int, int]]:
    file = str(ex.bug_info["file"])
    line = int(ex.bug_info["line"])
    for fe in ex.functions:
        if (
            fe.file == file
            and fe.name != ds.UNKNOWN_FUNCTION
            and fe.start_line <= line <= fe.end_line
        ):
            return fe.start_line, fe.end_line
    return None


def features_stage(
    env: PipelineEnv, examples: Sequence[ds.LabeledExample], force: bool = True
) -> int:
    """Extract and normalize features for the auto-labeled records; the
    normalizer is fitted on training-split rows only. Returns row count."""
    if (
        not force
        and env.features_path.is_file()
        and env.normalizer_path.is_file()
    ):
        ids, _ = read_features(env.features_path)
        return len(ids)

    reported = [ex for ex in examples if ex.label_source == ds.AUTO_LABELER]
    reported.sort(key=lambda e: e.id)
    rows = [
        extract_features(_issue_from_example(ex), _error_function_span(ex))
        for ex in reported
    ]
    if not rows:
        env.features_path.parent.mkdir(parents=True, exist_ok=True)
        write_features(env.features_path, [], [])
        return 0
    train_ids = set(ds.read_split_ids(env.splits_dir, "train"))
    train_rows = [row for ex, row in zip(reported, rows) if ex.id in train_ids]
    if not train_rows:
        # Degenerate tiny datasets can put every reported record outside
        # the train split; fall back to fitting on everything.
        train_rows = rows
    normalizer = fit_normalizer(train_rows)
    matrix = [normalizer.transform(row) for row in rows]
    env.features_path.parent.mkdir(parents=True, exist_ok=True)
    write_features(env.features_path, [ex.id for ex in reported], matrix)
    save_normalizer(env.normalizer_path, normalizer)
    return len(rows)


def _summarize(
    statuses: Sequence[PairStatus],
    examples: Sequence[ds.LabeledExample],
    after_fix_skipped: int,
) -> RunSummary:
    by_state: Dict[str, int] = {}
    for status in statuses:
        by_state[status.state] = by_state.get(status.state, 0) + 1
    by_label: Dict[int, int] = {}
    by_source: Dict[str, int] = {}
    for ex in examples:
        by_label[ex.label] = by_label.get(ex.label, 0) + 1
        by_source[ex.label_source] = by_source.get(ex.label_source, 0) + 1
    return RunSummary(
        selected=len(statuses),
        analyzed=by_state.get(ANALYZED, 0) + by_state.get(DIFFED, 0),
        failed=by_state.get(FAILED, 0),
        pending=by_state.get(PENDING, 0),
        examples=len(examples),
        by_label=by_label,
        by_label_source=by_source,
        after_fix_skipped=after_fix_skipped,
    )


def run_pipeline(config: PipelineConfig) -> RunSummary:
    env = init_workdir(config)
    pairs = select_stage(env)
    statuses, progressed = process_pairs(env, pairs)
    force = progressed > 0
    decisions = label_stage(env, statuses, force=force)
    examples, skipped = build_stage(env, statuses, decisions, force=force)
    split_stage(env, examples, force=force)
    features_stage(env, examples, force=force)
    return _summarize(statuses, examples, skipped)


def status(config: PipelineConfig) -> List[PairStatus]:
    env = open_env(config)
    if not env.selected_path.is_file():
        return []
    return pair_statuses(env)


def train_model(
    config: PipelineConfig,
    kind: str,
    hyperparams: Optional[Mapping] = None,
    out_path: Optional[Path] = None,
) -> Path:
    from .model import KIND_ALIASES, VOTING, fit, fit_voting, save_model

    env = open_env(config)
    full_kind = KIND_ALIASES.get(kind)
    if full_kind is None:
        raise ConfigError(f"unknown model kind {kind!r}; use rf, etc, gbt, or voting")
    ids, x, y = _training_rows(env, "train")
    if full_kind == VOTING:
        by_kind = {k: hyperparams for k in KIND_ALIASES.values()} if hyperparams else None
        model = fit_voting(x, y, by_kind, seed=config.seed)
    else:
        model = fit(full_kind, x, y, hyperparams, seed=config.seed)
    out = Path(out_path) if out_path else env.models_dir / f"{kind}.json"
    save_model(out, model, normalizer_ref="features/normalizer.json")
    return out


def _training_rows(env: PipelineEnv, split_name: str):
    import numpy as np

    ids, matrix = read_features(env.features_path)
    labels_by_id = {ex.id: ex.label for ex in ds.read_dataset(env.records_path)}
    wanted = set(ds.read_split_ids(env.splits_dir, split_name))
    keep = [i for i, row_id in enumerate(ids) if row_id in wanted]
    kept_ids = [ids[i] for i in keep]
    x = matrix[keep]
    y = np.asarray([labels_by_id[row_id] for row_id in kept_ids], dtype=np.int64)
    return kept_ids, x, y


def predict_scores(
    config: PipelineConfig, model_path: Path, split_name: str
) -> Tuple[List[str], List[float]]:
    from .model import load_model, predict_proba

    env = open_env(config)
    model, _ = load_model(Path(model_path))
    ids, x, _ = _training_rows(env, split_name)
    scores = predict_proba(model, x)
    return ids, [float(s) for s in scores]


def evaluate_model(
    config: PipelineConfig, model_path: Path, split_name: str, threshold_spec: str
):
    from .model import evaluate, load_model, predict_proba, roc_auc

    env = open_env(config)
    model, _ = load_model(Path(model_path))
    ids, x, y = _training_rows(env, split_name)
    scores = predict_proba(model, x)
    if threshold_spec == "corner":
        threshold = roc_auc(scores, y).corner_threshold
    else:
        try:
            threshold = float(threshold_spec)
        except ValueError as exc:
            raise ConfigError(
                f"threshold must be 'corner' or a number, got {threshold_spec!r}"
            ) from exc
    return evaluate(scores, y, threshold)
