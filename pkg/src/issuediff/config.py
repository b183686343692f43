"""Pipeline configuration: YAML loading, validation, defaults.

The config file is a YAML mapping with the PipelineConfig field names as
keys; `analyzer` and `cma` are nested mappings. Example::

    project_name: demo
    repo_url_or_path: /srv/repos/demo
    branch: master
    workdir: ./work
    analyzer:
      command_template: "python3 -m issuediff.fixture_analyzer {tree} {out}"
      report_path_pattern: "report.txt"
    cma:
      lexicon: null        # bundled lexicon when null
      threshold: 1.0
      limit: null
    workers: 1
    seed: 0
    split_ratios: [0.8, 0.1, 0.1]
    require_c_change: true
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Tuple

import yaml

from .analyzer import AnalyzerConfig
from .errors import ConfigError

DEFAULT_SPLIT_RATIOS = (0.8, 0.1, 0.1)


@dataclass(frozen=True)
class CmaSettings:
    """Commit-message analysis knobs: lexicon file (bundled when None),
    selection threshold, and an optional cap on selected commits."""

    lexicon: Optional[str] = None
    threshold: float = 1.0
    limit: Optional[int] = None


@dataclass(frozen=True)
class PipelineConfig:
    project_name: str
    repo_url_or_path: str
    branch: str
    workdir: Path
    analyzer: AnalyzerConfig
    cma: CmaSettings = CmaSettings()
    workers: int = 1
    seed: int = 0
    split_ratios: Tuple[float, float, float] = DEFAULT_SPLIT_RATIOS
    require_c_change: bool = True

    def with_overrides(
        self, workers: Optional[int] = None, seed: Optional[int] = None
    ) -> "PipelineConfig":
        changes = {}
        if workers is not None:
            changes["workers"] = workers
        if seed is not None:
            changes["seed"] = seed
        return dataclasses.replace(self, **changes) if changes else self


def _require(doc: Mapping, key: str):
    if key not in doc or doc[key] is None:
        raise ConfigError(f"config is missing required key {key!r}")
    return doc[key]


def config_from_dict(doc: Mapping, base_dir: Optional[Path] = None) -> PipelineConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config root must be a mapping")
    base = Path(base_dir) if base_dir is not None else Path(".")

    analyzer_doc = _require(doc, "analyzer")
    if not isinstance(analyzer_doc, Mapping):
        raise ConfigError("analyzer section must be a mapping")
    try:
        analyzer = AnalyzerConfig(
            command_template=str(_require(analyzer_doc, "command_template")),
            report_path_pattern=str(analyzer_doc.get("report_path_pattern", "report.txt")),
            version=str(analyzer_doc.get("version", "")),
            enabled_checks=tuple(analyzer_doc.get("enabled_checks") or ()),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    cma_doc = doc.get("cma") or {}
    if not isinstance(cma_doc, Mapping):
        raise ConfigError("cma section must be a mapping")
    lexicon = cma_doc.get("lexicon")
    if lexicon is not None:
        lexicon = str((base / str(lexicon)).resolve())
    limit = cma_doc.get("limit")
    cma = CmaSettings(
        lexicon=lexicon,
        threshold=float(cma_doc.get("threshold", 1.0)),
        limit=None if limit is None else int(limit),
    )

    workdir = Path(str(_require(doc, "workdir")))
    if not workdir.is_absolute():
        workdir = base / workdir
    repo = str(_require(doc, "repo_url_or_path"))
    repo_path = Path(repo)
    if not repo_path.is_absolute() and (base / repo / ".git").exists():
        repo = str(base / repo)

    ratios_doc = doc.get("split_ratios", list(DEFAULT_SPLIT_RATIOS))
    try:
        ratios = tuple(float(r) for r in ratios_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"split_ratios must be three numbers: {exc}") from exc

    config = PipelineConfig(
        project_name=str(_require(doc, "project_name")),
        repo_url_or_path=repo,
        branch=str(doc.get("branch", "master")),
        workdir=workdir,
        analyzer=analyzer,
        cma=cma,
        workers=int(doc.get("workers", 1)),
        seed=int(doc.get("seed", 0)),
        split_ratios=ratios,  # type: ignore[arg-type]
        require_c_change=bool(doc.get("require_c_change", True)),
    )
    validate_config(config)
    return config


def validate_config(config: PipelineConfig) -> None:
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    if len(config.split_ratios) != 3:
        raise ConfigError(
            f"split_ratios needs exactly 3 entries, got {len(config.split_ratios)}"
        )
    if any(r < 0 for r in config.split_ratios):
        raise ConfigError("split_ratios must be non-negative")
    if abs(sum(config.split_ratios) - 1.0) > 1e-9:
        raise ConfigError(
            f"split_ratios must sum to 1, got {sum(config.split_ratios)!r}"
        )
    if config.cma.threshold <= 0:
        raise ConfigError(f"cma.threshold must be > 0, got {config.cma.threshold}")
    if config.cma.limit is not None and config.cma.limit < 1:
        raise ConfigError(f"cma.limit must be >= 1, got {config.cma.limit}")
    if not config.project_name:
        raise ConfigError("project_name must be non-empty")


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return config_from_dict(doc or {}, base_dir=path.parent)
