"""Tree ensembles trained from scratch: random forest, extra trees, and
depth-wise gradient boosting with logistic loss, plus soft voting.

Determinism: rows are first brought into a canonical order (lexicographic
over feature columns, then label) so training is invariant under input
row permutation; each tree draws from numpy's default generator seeded by
a hash of (master seed, kind, tree index).
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .._util import write_text_atomic
from ..errors import DimensionMismatch, EmptyModelList, SingleClassTrainingSet
from .backend import get_kernels

RANDOM_FOREST = "random_forest"
EXTRA_TREES = "extra_trees"
GRADIENT_BOOSTED = "gradient_boosted"
VOTING = "voting"

KIND_ALIASES = {
    "rf": RANDOM_FOREST,
    "etc": EXTRA_TREES,
    "gbt": GRADIENT_BOOSTED,
    RANDOM_FOREST: RANDOM_FOREST,
    EXTRA_TREES: EXTRA_TREES,
    GRADIENT_BOOSTED: GRADIENT_BOOSTED,
    VOTING: VOTING,
}

DEFAULT_HYPERPARAMS: Dict[str, Dict] = {
    RANDOM_FOREST: {
        "n_estimators": 1000,
        "max_depth": 12,
        "min_samples_leaf": 2,
        "max_features": None,
    },
    EXTRA_TREES: {
        "n_estimators": 500,
        "max_depth": 12,
        "min_samples_leaf": 2,
        "max_features": None,
    },
    GRADIENT_BOOSTED: {
        "n_estimators": 500,
        "learning_rate": 0.03,
        "max_depth": 12,
        "min_samples_leaf": 2,
    },
}

_NEWTON_EPS = 1e-12  # matches the kernels' EPS


@dataclass(frozen=True)
class Tree:
    """Flattened decision tree. feature[i] is -1 at leaves; value[i] holds
    the node's payload (class-1 probability, or the Newton leaf value for
    boosting stages)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def to_dict(self) -> Dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @staticmethod
    def from_dict(d: Mapping) -> "Tree":
        return Tree(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
        )


@dataclass(frozen=True)
class Ensemble:
    kind: str
    trees: Tuple[Tree, ...]
    n_features: int
    hyperparams: Dict
    seed: int
    base_score: float = 0.0

    @property
    def n_estimators(self) -> int:
        return len(self.trees)


@dataclass(frozen=True)
class VotingModel:
    models: Tuple[Ensemble, ...]
    seed: int
    kind: str = VOTING

    @property
    def n_features(self) -> int:
        return self.models[0].n_features


Model = Union[Ensemble, VotingModel]


def _tree_seed(seed: int, kind: str, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{kind}:{index}".encode("ascii")).hexdigest()
    return int(digest, 16)


def _sigmoid(v: np.ndarray) -> np.ndarray:
    out = np.empty_like(v, dtype=np.float64)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Deterministic row permutation independent of input ordering."""
    keys = (y,) + tuple(x[:, j] for j in range(x.shape[1] - 1, -1, -1))
    return np.lexsort(keys)


class _TreeBuilder:
    """Best-first growth over a frontier ordered by n_rows * split gain."""

    def __init__(
        self,
        x: np.ndarray,
        max_depth: int,
        min_leaf: int,
        find_split: Callable[[np.ndarray], Optional[Tuple[float, int, float]]],
        node_value: Callable[[np.ndarray], float],
    ) -> None:
        self.x = x
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.find_split = find_split
        self.node_value = node_value
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[float] = []

    def _new_node(self, rows: np.ndarray) -> int:
        nid = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(self.node_value(rows))
        return nid

    def build(self, rows: np.ndarray) -> Tree:
        heap: List[Tuple[float, int, int, int, np.ndarray, Tuple[float, int, float]]] = []
        tick = itertools.count()
        root = self._new_node(rows)
        self._consider(heap, tick, root, 0, rows)
        while heap:
            _, _, nid, depth, node_rows, (gain, feat, thr) = heapq.heappop(heap)
            mask = self.x[node_rows, feat] < thr
            left_rows = node_rows[mask]
            right_rows = node_rows[~mask]
            self.feature[nid] = feat
            self.threshold[nid] = thr
            lid = self._new_node(left_rows)
            rid = self._new_node(right_rows)
            self.left[nid] = lid
            self.right[nid] = rid
            self._consider(heap, tick, lid, depth + 1, left_rows)
            self._consider(heap, tick, rid, depth + 1, right_rows)
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
        )

    def _consider(self, heap, tick, nid: int, depth: int, rows: np.ndarray) -> None:
        if depth >= self.max_depth or len(rows) < 2 * self.min_leaf:
            return
        cand = self.find_split(rows)
        if cand is None:
            return
        improvement = len(rows) * cand[0]
        heapq.heappush(heap, (-improvement, next(tick), nid, depth, rows, cand))


def _feature_subset(rng: np.random.Generator, d: int, mtry: int) -> np.ndarray:
    if mtry >= d:
        return np.arange(d)
    return rng.permutation(d)[:mtry]


def _grow_classification(
    kernels, x: np.ndarray, y: np.ndarray, rng: np.random.Generator, params: Dict
) -> Tree:
    min_leaf = params["min_samples_leaf"]
    d = x.shape[1]
    mtry = params.get("max_features") or max(1, int(math.sqrt(d)))

    def find_split(rows: np.ndarray):
        best = None
        yr = y[rows]
        for f in _feature_subset(rng, d, mtry):
            col = np.ascontiguousarray(x[rows, f])
            order = np.argsort(col, kind="stable")
            gain, thr, _ = kernels.scan_split_class(
                np.ascontiguousarray(col[order]),
                np.ascontiguousarray(yr[order]),
                min_leaf,
            )
            if gain > 0.0 and (best is None or gain > best[0]):
                best = (gain, int(f), thr)
        return best

    def node_value(rows: np.ndarray) -> float:
        return float(y[rows].sum()) / len(rows)

    builder = _TreeBuilder(x, params["max_depth"], min_leaf, find_split, node_value)
    return builder.build(np.arange(len(y)))


def _grow_randomized(
    kernels, x: np.ndarray, y: np.ndarray, rng: np.random.Generator, params: Dict
) -> Tree:
    min_leaf = params["min_samples_leaf"]
    d = x.shape[1]
    mtry = params.get("max_features") or max(1, int(math.sqrt(d)))

    def find_split(rows: np.ndarray):
        best = None
        yr = np.ascontiguousarray(y[rows])
        for f in _feature_subset(rng, d, mtry):
            col = np.ascontiguousarray(x[rows, f])
            lo = float(col.min())
            hi = float(col.max())
            if hi <= lo:
                continue
            thr = float(rng.uniform(lo, hi))
            gain = kernels.gain_at_threshold_class(col, yr, thr, min_leaf)
            if gain > 0.0 and (best is None or gain > best[0]):
                best = (gain, int(f), thr)
        return best

    def node_value(rows: np.ndarray) -> float:
        return float(y[rows].sum()) / len(rows)

    builder = _TreeBuilder(x, params["max_depth"], min_leaf, find_split, node_value)
    return builder.build(np.arange(len(y)))


def _grow_regression(
    kernels, x: np.ndarray, g: np.ndarray, h: np.ndarray, params: Dict
) -> Tree:
    min_leaf = params["min_samples_leaf"]
    d = x.shape[1]

    def find_split(rows: np.ndarray):
        best = None
        gr = g[rows]
        hr = h[rows]
        for f in range(d):
            col = np.ascontiguousarray(x[rows, f])
            order = np.argsort(col, kind="stable")
            gain, thr, _ = kernels.scan_split_reg(
                np.ascontiguousarray(col[order]),
                np.ascontiguousarray(gr[order]),
                np.ascontiguousarray(hr[order]),
                min_leaf,
            )
            if gain > 0.0 and (best is None or gain > best[0]):
                best = (gain, int(f), thr)
        return best

    def node_value(rows: np.ndarray) -> float:
        return float(g[rows].sum()) / (float(h[rows].sum()) + _NEWTON_EPS)

    builder = _TreeBuilder(x, params["max_depth"], min_leaf, find_split, node_value)
    return builder.build(np.arange(len(g)))


def _validate_training_set(x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {x.shape}")
    if len(y) != x.shape[0]:
        raise ValueError(f"{x.shape[0]} rows but {len(y)} labels")
    classes = np.unique(y)
    if not np.isin(classes, (0, 1)).all():
        raise ValueError(f"labels must be 0/1, got {classes.tolist()}")
    if len(classes) < 2:
        raise SingleClassTrainingSet(
            f"training set holds only class {classes.tolist()}"
        )


def fit(
    kind: str,
    x,
    y,
    hyperparams: Optional[Mapping] = None,
    seed: int = 0,
) -> Ensemble:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in DEFAULT_HYPERPARAMS:
        raise ValueError(f"unknown model kind {kind!r}")
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    y = np.asarray(y)
    _validate_training_set(x, y)
    params = dict(DEFAULT_HYPERPARAMS[kind])
    params.update(hyperparams or {})
    n, d = x.shape
    order = canonical_order(x, y)
    xc = np.ascontiguousarray(x[order])
    yc = np.ascontiguousarray(y[order].astype(np.float64))
    kernels = get_kernels()
    trees: List[Tree] = []

    if kind == GRADIENT_BOOSTED:
        p = float(yc.sum()) / n
        base = math.log(p / (1.0 - p))
        raw = np.full(n, base, dtype=np.float64)
        lr = params["learning_rate"]
        for _ in range(params["n_estimators"]):
            prob = _sigmoid(raw)
            grad = yc - prob
            hess = prob * (1.0 - prob)
            tree = _grow_regression(kernels, xc, grad, hess, params)
            leaves = kernels.apply_tree(
                tree.feature, tree.threshold, tree.left, tree.right, xc
            )
            raw = raw + lr * tree.value[leaves]
            trees.append(tree)
        return Ensemble(kind, tuple(trees), d, params, seed, base_score=base)

    for i in range(params["n_estimators"]):
        rng = np.random.default_rng(_tree_seed(seed, kind, i))
        if kind == RANDOM_FOREST:
            sample = rng.integers(0, n, n)
            xb = np.ascontiguousarray(xc[sample])
            yb = np.ascontiguousarray(yc[sample])
            trees.append(_grow_classification(kernels, xb, yb, rng, params))
        else:
            trees.append(_grow_randomized(kernels, xc, yc, rng, params))
    return Ensemble(kind, tuple(trees), d, params, seed)


def predict_proba(model: Model, x) -> np.ndarray:
    """P(class=1) per row."""
    if isinstance(model, VotingModel):
        return soft_vote(list(model.models), x)
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} features, got shape {tuple(x.shape)}"
        )
    kernels = get_kernels()
    if model.kind == GRADIENT_BOOSTED:
        raw = np.full(x.shape[0], model.base_score, dtype=np.float64)
        lr = model.hyperparams["learning_rate"]
        for tree in model.trees:
            leaves = kernels.apply_tree(
                tree.feature, tree.threshold, tree.left, tree.right, x
            )
            raw = raw + lr * tree.value[leaves]
        return _sigmoid(raw)
    acc = np.zeros(x.shape[0], dtype=np.float64)
    for tree in model.trees:
        leaves = kernels.apply_tree(
            tree.feature, tree.threshold, tree.left, tree.right, x
        )
        acc = acc + tree.value[leaves]
    return acc / len(model.trees)


def soft_vote(models: Sequence[Ensemble], x) -> np.ndarray:
    """Unweighted mean of the models' class-1 probabilities."""
    if not models:
        raise EmptyModelList("soft voting needs at least one model")
    acc = predict_proba(models[0], x)
    for model in models[1:]:
        acc = acc + predict_proba(model, x)
    return acc / len(models)


def fit_voting(
    x,
    y,
    hyperparams_by_kind: Optional[Mapping[str, Mapping]] = None,
    seed: int = 0,
) -> VotingModel:
    by_kind = hyperparams_by_kind or {}
    models = tuple(
        fit(kind, x, y, by_kind.get(kind), seed)
        for kind in (RANDOM_FOREST, EXTRA_TREES, GRADIENT_BOOSTED)
    )
    return VotingModel(models=models, seed=seed)


def model_to_dict(model: Model) -> Dict:
    if isinstance(model, VotingModel):
        return {
            "kind": VOTING,
            "seed": model.seed,
            "models": [model_to_dict(m) for m in model.models],
        }
    return {
        "kind": model.kind,
        "seed": model.seed,
        "n_features": model.n_features,
        "hyperparams": dict(model.hyperparams),
        "base_score": model.base_score,
        "trees": [t.to_dict() for t in model.trees],
    }


def model_from_dict(d: Mapping) -> Model:
    if d["kind"] == VOTING:
        return VotingModel(
            models=tuple(model_from_dict(m) for m in d["models"]),
            seed=int(d["seed"]),
        )
    return Ensemble(
        kind=d["kind"],
        trees=tuple(Tree.from_dict(t) for t in d["trees"]),
        n_features=int(d["n_features"]),
        hyperparams=dict(d["hyperparams"]),
        seed=int(d["seed"]),
        base_score=float(d.get("base_score", 0.0)),
    )


def save_model(path: Path, model: Model, normalizer_ref: Optional[str] = None) -> None:
    doc = model_to_dict(model)
    doc["normalizer"] = normalizer_ref
    write_text_atomic(
        Path(path), json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    )


def load_model(path: Path) -> Tuple[Model, Optional[str]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return model_from_dict(doc), doc.get("normalizer")
