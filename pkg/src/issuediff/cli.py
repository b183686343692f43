"""Command-line entry point.

Subcommands mirror the pipeline stages (init, select-commits, analyze,
diff, label, build-dataset, split, features), the model workflow (train,
predict, evaluate), plus `status` and the all-in-one `run`.

Exit codes: 0 success, 1 fatal configuration or usage error, 2 completed
but some version pairs were dropped after analyzer failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import dataset as ds
from . import pipeline
from .config import PipelineConfig, load_config, validate_config
from .errors import ConfigError, PipelineError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DROPPED = 2

MODEL_KINDS = ("rf", "etc", "gbt", "voting")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="issuediff",
        description=(
            "Differential static-analysis labeling pipeline: mines likely "
            "fix commits, diffs analyzer reports across each commit, labels "
            "issues, and trains a false-positive filter on the result."
        ),
    )
    parser.add_argument(
        "--config",
        type=Path,
        default=Path("issuediff.yaml"),
        help="pipeline configuration file (default: issuediff.yaml)",
    )
    parser.add_argument(
        "--workers", type=int, default=None, help="override configured worker count"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="override configured random seed"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("init", help="create and mark the working directory")

    p = sub.add_parser("select-commits", help="score and select fix-like commits")
    p.add_argument("--lexicon", type=Path, default=None, help="term lexicon file")
    p.add_argument("--threshold", type=float, default=None, help="minimum score")
    p.add_argument("--limit", type=int, default=None, help="keep at most N commits")
    p.add_argument(
        "--out",
        type=Path,
        default=None,
        help="write selection here instead of the workdir (no status records)",
    )

    p = sub.add_parser("analyze", help="snapshot and analyze both sides of each pair")
    p.add_argument(
        "--clear-cache",
        action="store_true",
        help="drop all cached analyzer results first",
    )

    sub.add_parser("diff", help="diff the issue sets of analyzed pairs")
    sub.add_parser("label", help="merge pair results into label decisions")
    sub.add_parser("build-dataset", help="emit labeled records plus after-fix negatives")

    p = sub.add_parser("split", help="write stratified train/dev/test manifests")
    p.add_argument("--seed", type=int, default=None, dest="split_seed")
    p.add_argument(
        "--ratios",
        type=str,
        default=None,
        help="three comma-separated fractions, e.g. 0.8,0.1,0.1",
    )

    sub.add_parser("features", help="extract and normalize classifier features")

    p = sub.add_parser("train", help="fit a false-positive filter on the train split")
    p.add_argument("--model", choices=MODEL_KINDS, default="voting")
    p.add_argument("--out", type=Path, default=None, help="model artifact path")

    p = sub.add_parser("predict", help="score a split with a trained model")
    p.add_argument("--model", type=str, default="voting", help="model kind or artifact path")
    p.add_argument("--split", choices=ds.SPLIT_NAMES, default="test")
    p.add_argument("--out", type=Path, default=None, help="write id/score lines here")

    p = sub.add_parser("evaluate", help="report counts, FPRR, F1, and AUC on a split")
    p.add_argument("--model", type=str, default="voting", help="model kind or artifact path")
    p.add_argument("--split", choices=ds.SPLIT_NAMES, default="test")
    p.add_argument(
        "--threshold",
        type=str,
        default="corner",
        help="'corner' or an explicit score threshold",
    )

    sub.add_parser("status", help="show per-pair progress")

    p = sub.add_parser("run", help="run every stage end to end")
    p.add_argument(
        "--clear-cache",
        action="store_true",
        help="drop all cached analyzer results first",
    )
    return parser


def _pair_totals_line(selected: int, analyzed: int, failed: int, pending: int) -> str:
    return (
        f"pairs: selected={selected} analyzed={analyzed} "
        f"failed={failed} pending={pending}"
    )


def _print_summary(summary: pipeline.RunSummary) -> None:
    print(
        _pair_totals_line(
            summary.selected, summary.analyzed, summary.failed, summary.pending
        )
    )
    labels = " ".join(
        f"label_{k}={v}" for k, v in sorted(summary.by_label.items())
    )
    sources = " ".join(
        f"{k}={v}" for k, v in sorted(summary.by_label_source.items())
    )
    print(f"examples: total={summary.examples} {labels}".rstrip())
    if sources:
        print(f"sources: {sources}")
    print(f"after_fix_skipped: {summary.after_fix_skipped}")


def _dropped_exit(statuses) -> int:
    failed = sum(1 for s in statuses if s.state == pipeline.FAILED)
    return EXIT_DROPPED if failed else EXIT_OK


def _resolve_model_path(env: pipeline.PipelineEnv, spec: str) -> Path:
    if spec in MODEL_KINDS:
        return env.models_dir / f"{spec}.json"
    return Path(spec)


def _require_artifact(path: Path, hint: str) -> None:
    if not path.is_file():
        raise ConfigError(f"{path} is missing; {hint}")


def _cmd_init(args, config: PipelineConfig) -> int:
    env = pipeline.init_workdir(config)
    print(f"initialized {env.workdir}")
    return EXIT_OK


def _cmd_select(args, config: PipelineConfig) -> int:
    env = pipeline.init_workdir(config)
    pairs = pipeline.select_stage(
        env,
        out_path=args.out,
        threshold=args.threshold,
        limit=args.limit,
        lexicon_path=args.lexicon,
        force=True,
    )
    out = args.out if args.out is not None else env.selected_path
    print(f"selected {len(pairs)} commits -> {out}")
    return EXIT_OK


def _cmd_analyze(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    if args.clear_cache:
        pipeline.clear_cache(env)
    pairs = pipeline.selected_pairs(env)
    statuses, _ = pipeline.process_pairs(env, pairs, do_analyze=True, do_diff=False)
    for status in statuses:
        if status.state == pipeline.FAILED:
            print(f"{status.pair.after_hash} failed: {status.failure_reason}")
    counts = {s.state: 0 for s in statuses}
    for s in statuses:
        counts[s.state] += 1
    print("analyzed " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return _dropped_exit(statuses)


def _cmd_diff(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    pairs = pipeline.selected_pairs(env)
    statuses, _ = pipeline.process_pairs(env, pairs, do_analyze=False, do_diff=True)
    diffed = sum(1 for s in statuses if s.state == pipeline.DIFFED)
    print(f"diffed {diffed} of {len(statuses)} pairs")
    return _dropped_exit(statuses)


def _cmd_label(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    statuses = pipeline.pair_statuses(env)
    decisions = pipeline.label_stage(env, statuses, force=True)
    positives = sum(1 for d in decisions if d.label == 1)
    print(
        f"labeled {len(decisions)} issues ({positives} positive) -> {env.labels_path}"
    )
    return EXIT_OK


def _cmd_build(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    _require_artifact(env.labels_path, "run `label` first")
    statuses = pipeline.pair_statuses(env)
    decisions = pipeline.label_stage(env, statuses, force=False)
    examples, skipped = pipeline.build_stage(env, statuses, decisions, force=True)
    print(
        f"wrote {len(examples)} records -> {env.records_path} "
        f"(after_fix_skipped={skipped})"
    )
    return EXIT_OK


def _cmd_split(args, config: PipelineConfig) -> int:
    if args.ratios is not None:
        try:
            parts = tuple(float(x) for x in args.ratios.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --ratios value {args.ratios!r}") from exc
        if len(parts) != 3:
            raise ConfigError("--ratios needs exactly three fractions")
        config = dataclasses.replace(config, split_ratios=parts)
    if args.split_seed is not None:
        config = config.with_overrides(seed=args.split_seed)
    env = pipeline.open_env(config)
    _require_artifact(env.records_path, "run `build-dataset` first")
    examples = ds.read_dataset(env.records_path)
    split = pipeline.split_stage(env, examples, force=True)
    sizes = " ".join(f"{name}={len(split.part(name))}" for name in ds.SPLIT_NAMES)
    print(f"split {len(examples)} records: {sizes} -> {env.splits_dir}")
    return EXIT_OK


def _cmd_features(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    _require_artifact(env.records_path, "run `build-dataset` first")
    _require_artifact(env.splits_dir / "train.txt", "run `split` first")
    examples = ds.read_dataset(env.records_path)
    n = pipeline.features_stage(env, examples, force=True)
    print(f"extracted {n} feature rows -> {env.features_path}")
    return EXIT_OK


def _cmd_train(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    _require_artifact(env.features_path, "run `features` first")
    out = pipeline.train_model(config, args.model, out_path=args.out)
    print(f"trained {args.model} -> {out}")
    return EXIT_OK


def _cmd_predict(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    model_path = _resolve_model_path(env, args.model)
    _require_artifact(model_path, "run `train` first")
    ids, scores = pipeline.predict_scores(config, model_path, args.split)
    lines = "".join(f"{i}\t{s!r}\n" for i, s in zip(ids, scores))
    if args.out is not None:
        from ._util import write_text_atomic

        write_text_atomic(args.out, lines)
        print(f"scored {len(ids)} records -> {args.out}")
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def _cmd_evaluate(args, config: PipelineConfig) -> int:
    env = pipeline.open_env(config)
    model_path = _resolve_model_path(env, args.model)
    _require_artifact(model_path, "run `train` first")
    report = pipeline.evaluate_model(config, model_path, args.split, args.threshold)
    c = report.counts
    mode = "corner" if args.threshold == "corner" else "fixed"
    print(f"split: {args.split}  threshold: {report.threshold:.6f} ({mode})")
    print(
        f"counts: GP={c.gp} P={c.p} TP={c.tp} GN={c.gn} N={c.n} "
        f"TN={c.tn} FP={c.fp} FN={c.fn}"
    )
    fprr = "n/a" if report.fprr is None else f"{report.fprr:.2f}"
    auc = "n/a" if report.auc is None else f"{report.auc:.4f}"
    print(f"fprr: {fprr}  macro_f1: {report.f1:.4f}  auc: {auc}")
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_status(args, config: PipelineConfig) -> int:
    statuses = pipeline.status(config)
    for status in statuses:
        line = f"{status.pair.after_hash}  {status.state}"
        if status.failure_reason:
            line += f"  {status.failure_reason}"
        print(line)
    counts = {}
    for s in statuses:
        counts[s.state] = counts.get(s.state, 0) + 1
    print(
        _pair_totals_line(
            len(statuses),
            counts.get(pipeline.ANALYZED, 0) + counts.get(pipeline.DIFFED, 0),
            counts.get(pipeline.FAILED, 0),
            counts.get(pipeline.PENDING, 0),
        )
    )
    return EXIT_OK


def _cmd_run(args, config: PipelineConfig) -> int:
    if args.clear_cache:
        pipeline.clear_cache(pipeline.init_workdir(config))
    summary = pipeline.run_pipeline(config)
    _print_summary(summary)
    return EXIT_DROPPED if summary.failed else EXIT_OK


_COMMANDS = {
    "init": _cmd_init,
    "select-commits": _cmd_select,
    "analyze": _cmd_analyze,
    "diff": _cmd_diff,
    "label": _cmd_label,
    "build-dataset": _cmd_build,
    "split": _cmd_split,
    "features": _cmd_features,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "status": _cmd_status,
    "run": _cmd_run,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = config.with_overrides(workers=args.workers, seed=args.seed)
        validate_config(config)
        return _COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PipelineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
