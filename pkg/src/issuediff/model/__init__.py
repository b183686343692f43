"""Tree-ensemble classifiers and evaluation metrics."""

from .backend import backend_name, get_kernels
from .metrics import (
    ConfusionCounts,
    EvalReport,
    RocCurve,
    confusion_counts,
    evaluate,
    fprr,
    macro_f1,
    roc_auc,
)
from .trees import (
    DEFAULT_HYPERPARAMS,
    EXTRA_TREES,
    GRADIENT_BOOSTED,
    KIND_ALIASES,
    RANDOM_FOREST,
    VOTING,
    Ensemble,
    Model,
    Tree,
    VotingModel,
    fit,
    fit_voting,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_proba,
    save_model,
    soft_vote,
)

__all__ = [
    "ConfusionCounts",
    "EvalReport",
    "RocCurve",
    "confusion_counts",
    "evaluate",
    "fprr",
    "macro_f1",
    "roc_auc",
    "backend_name",
    "get_kernels",
    "DEFAULT_HYPERPARAMS",
    "EXTRA_TREES",
    "GRADIENT_BOOSTED",
    "KIND_ALIASES",
    "RANDOM_FOREST",
    "VOTING",
    "Ensemble",
    "Model",
    "Tree",
    "VotingModel",
    "fit",
    "fit_voting",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict_proba",
    "save_model",
    "soft_vote",
]
