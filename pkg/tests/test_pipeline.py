"""End-to-end pipeline runs against the planted repository."""

from __future__ import annotations

import json
import subprocess
from pathlib import Path


from issuediff.cli import EXIT_DROPPED, EXIT_OK, main
from issuediff.config import load_config
from issuediff.pipeline import init_workdir, process_pairs, select_stage

from conftest import write_pipeline_config

ARTIFACTS = (
    "selected.tsv",
    "labels.ndjson",
    "dataset/records.ndjson",
    "dataset/build_meta.json",
    "features/features.csv",
    "features/normalizer.json",
    "splits/train.txt",
    "splits/dev.txt",
    "splits/test.txt",
)


def _run_cli(config_path, *argv):
    return main(["--config", str(config_path), *argv])


def _artifact_bytes(workdir: Path) -> dict:
    out = {}
    for rel in ARTIFACTS:
        out[rel] = (workdir / rel).read_bytes()
    for sub in ("pairs", "status"):
        for path in sorted((workdir / sub).glob("*")):
            out[f"{sub}/{path.name}"] = path.read_bytes()
    return out


def _full_run(tmp_path, repo, name, workers=1):
    config_path = tmp_path / f"{name}.yaml"
    workdir = tmp_path / name
    write_pipeline_config(config_path, repo, workdir, workers=workers)
    rc = _run_cli(config_path, "run")
    return rc, config_path, workdir


def _git_messages(repo: Path) -> dict:
    out = subprocess.run(
        ["git", "log", "--format=%H %s", "main"],
        cwd=repo, capture_output=True, text=True, check=True,
    ).stdout
    return dict(line.split(" ", 1) for line in out.splitlines())


def test_full_run_builds_every_artifact(tmp_path, planted_repo, capsys):
    rc, _, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "pairs: selected=4 analyzed=4 failed=0 pending=0" in out
    assert "examples: total=5 label_0=4 label_1=1" in out
    assert "after_fix_skipped: 0" in out
    for rel in ARTIFACTS:
        assert (workdir / rel).is_file(), rel

    records = [
        json.loads(line)
        for line in (workdir / "dataset/records.ndjson").read_text().splitlines()
    ]
    assert len(records) == 5
    sources = sorted(r["label_source"] for r in records)
    assert sources.count("auto_labeler") == 4
    assert sources.count("after_fix_extractor") == 1
    for r in records:
        assert r["project"] == "sample"
        assert r["functions"], r["id"]
    negatives = [r for r in records if r["label_source"] == "after_fix_extractor"]
    assert negatives[0]["label"] == 0
    assert negatives[0]["id"].endswith("/after_fix")


def test_label_decisions_on_planted_history(tmp_path, planted_repo):
    rc, _, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    decisions = [
        json.loads(line)
        for line in (workdir / "labels.ndjson").read_text().splitlines()
    ]
    records = [
        json.loads(line)
        for line in (workdir / "dataset/records.ndjson").read_text().splitlines()
    ]
    bug_type_by_fp = {r["id"].split("/")[0]: r["bug_type"] for r in records}
    by_reason = {}
    for d in decisions:
        by_reason.setdefault(d["reason"], []).append(d)

    assert sorted(by_reason) == [
        "fixed", "fixed_then_unfixed", "never_fixed", "untouched_by_diff",
    ]
    assert all(len(v) == 1 for v in by_reason.values())

    fixed = by_reason["fixed"][0]
    assert fixed["label"] == 1
    assert bug_type_by_fp[fixed["fingerprint"]] == "NULL_DEREFERENCE"

    regressed = by_reason["fixed_then_unfixed"][0]
    assert regressed["label"] == 0
    assert bug_type_by_fp[regressed["fingerprint"]] == "BUFFER_OVERRUN"
    assert len(regressed["occurrences"]) >= 2

    guarded = by_reason["untouched_by_diff"][0]
    assert guarded["label"] == 0
    assert bug_type_by_fp[guarded["fingerprint"]] == "NULL_DEREFERENCE"

    leak = by_reason["never_fixed"][0]
    assert leak["label"] == 0
    assert bug_type_by_fp[leak["fingerprint"]] == "MEMORY_LEAK"
    assert all(o["classification"] == "pre_existing" for o in leak["occurrences"])


def test_selection_scores_and_ordering(tmp_path, planted_repo):
    rc, _, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    rows = [
        line.split("\t")
        for line in (workdir / "selected.tsv").read_text().splitlines()
    ]
    assert len(rows) == 4
    scores = [float(score) for _, score, _ in rows]
    assert scores == sorted(scores, reverse=True)
    messages = _git_messages(planted_repo)
    subjects = [messages[h] for h, _, _ in rows]
    assert subjects[0] == "fix null pointer dereference crash in alpha"
    assert subjects[1] == "fix buffer overflow in gamma table writer"
    # doc-only and non-fix commits never make the list
    assert "fix typo in documentation" not in subjects
    assert "update copyright year" not in subjects
    categories = {cat for _, _, cat in rows}
    assert categories  # every selected commit carries its heaviest category


def test_stage_subcommands_reproduce_run(tmp_path, planted_repo, capsys):
    rc, _, base = _full_run(tmp_path, planted_repo, "base")
    assert rc == EXIT_OK

    config_path = tmp_path / "staged.yaml"
    workdir = tmp_path / "staged"
    write_pipeline_config(config_path, planted_repo, workdir)
    for argv in (
        ["init"],
        ["select-commits"],
        ["analyze"],
        ["diff"],
        ["label"],
        ["build-dataset"],
        ["split"],
        ["features"],
    ):
        assert _run_cli(config_path, *argv) == EXIT_OK, argv
    capsys.readouterr()
    assert _artifact_bytes(workdir) == _artifact_bytes(base)


def test_interrupted_run_resumes_to_identical_outputs(tmp_path, planted_repo):
    rc, _, base = _full_run(tmp_path, planted_repo, "base")
    assert rc == EXIT_OK

    config_path = tmp_path / "resumed.yaml"
    workdir = tmp_path / "resumed"
    write_pipeline_config(config_path, planted_repo, workdir)
    config = load_config(config_path)
    # simulate an interruption: select, then process only two pairs
    env = init_workdir(config)
    pairs = select_stage(env)
    assert len(pairs) == 4
    statuses, progressed = process_pairs(env, pairs[:2])
    assert progressed == 2
    assert all(s.state == "diffed" for s in statuses)
    # a later invocation picks up the remaining work
    assert _run_cli(config_path, "run") == EXIT_OK
    assert _artifact_bytes(workdir) == _artifact_bytes(base)


def test_worker_count_does_not_change_outputs(tmp_path, planted_repo):
    rc1, _, one = _full_run(tmp_path, planted_repo, "one", workers=1)
    rc4, _, four = _full_run(tmp_path, planted_repo, "four", workers=4)
    assert rc1 == rc4 == EXIT_OK
    assert _artifact_bytes(one) == _artifact_bytes(four)


def test_second_run_is_incremental(tmp_path, planted_repo, capsys):
    rc, config_path, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    before = {
        rel: (workdir / rel).stat().st_mtime_ns for rel in ARTIFACTS
    }
    assert _run_cli(config_path, "run") == EXIT_OK
    after = {rel: (workdir / rel).stat().st_mtime_ns for rel in ARTIFACTS}
    assert after == before  # nothing was rewritten
    out = capsys.readouterr().out
    assert "pairs: selected=4 analyzed=4 failed=0 pending=0" in out


def test_analyzer_crash_marks_pairs_failed(tmp_path, planted_repo, capsys, monkeypatch):
    config_path = tmp_path / "cfg.yaml"
    workdir = tmp_path / "work"
    write_pipeline_config(config_path, planted_repo, workdir)
    monkeypatch.setenv("FIXTURE_ANALYZER_CRASH", "3")
    rc = _run_cli(config_path, "run")
    assert rc == EXIT_DROPPED
    out = capsys.readouterr().out
    assert "failed=4" in out

    statuses = [
        json.loads(p.read_text()) for p in sorted((workdir / "status").glob("*.json"))
    ]
    assert len(statuses) == 4
    assert all(s["state"] == "failed" for s in statuses)
    assert all("AnalyzerCrashed" in s["failure_reason"] for s in statuses)

    capsys.readouterr()
    assert _run_cli(config_path, "status") == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    per_pair = [l for l in lines if "failed" in l and "AnalyzerCrashed" in l]
    assert len(per_pair) == 4


def test_status_lines_after_clean_run(tmp_path, planted_repo, capsys):
    rc, config_path, _ = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    capsys.readouterr()
    assert _run_cli(config_path, "status") == EXIT_OK
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l and not l.startswith("pairs:")]
    assert len(lines) == 4
    assert all("diffed" in l for l in lines)
    assert "pairs: selected=4 analyzed=4 failed=0 pending=0" in out


def test_clear_cache_reanalyzes(tmp_path, planted_repo, capsys):
    rc, config_path, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    labels_before = (workdir / "labels.ndjson").read_bytes()
    cache_entries = list((workdir / "cache").rglob("issues.ndjson"))
    assert cache_entries
    assert _run_cli(config_path, "analyze", "--clear-cache") == EXIT_OK
    assert list((workdir / "cache").rglob("issues.ndjson"))
    assert _run_cli(config_path, "diff") == EXIT_OK
    assert _run_cli(config_path, "label") == EXIT_OK
    assert (workdir / "labels.ndjson").read_bytes() == labels_before
    capsys.readouterr()


def test_train_predict_evaluate_cli(tmp_path, planted_repo, capsys):
    rc, config_path, workdir = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    capsys.readouterr()

    assert _run_cli(config_path, "train", "--model", "rf") == EXIT_OK
    model_path = workdir / "models" / "rf.json"
    assert model_path.is_file()
    doc = json.loads(model_path.read_text())
    assert doc["kind"] == "random_forest"
    assert doc["normalizer"] == "features/normalizer.json"
    capsys.readouterr()

    out_path = tmp_path / "scores.tsv"
    assert _run_cli(
        config_path, "predict", "--model", "rf", "--split", "train",
        "--out", str(out_path),
    ) == EXIT_OK
    rows = [line.split("\t") for line in out_path.read_text().splitlines()]
    assert len(rows) == 4  # classifier rows come from analyzer-reported issues
    for _, score in rows:
        assert 0.0 <= float(score) <= 1.0

    capsys.readouterr()
    assert _run_cli(
        config_path, "evaluate", "--model", "rf", "--split", "train",
        "--threshold", "0.5",
    ) == EXIT_OK
    out = capsys.readouterr().out
    assert "split: train" in out and "threshold: 0.500000 (fixed)" in out
    payload = json.loads(out.splitlines()[-1])
    assert set(payload) == {"auc", "counts", "f1", "fprr", "threshold"}
    assert payload["counts"]["GP"] + payload["counts"]["GN"] == 4


def test_custom_model_output_path_and_corner_threshold(tmp_path, planted_repo, capsys):
    rc, config_path, _ = _full_run(tmp_path, planted_repo, "work")
    assert rc == EXIT_OK
    out_model = tmp_path / "custom" / "filter.json"
    assert _run_cli(
        config_path, "train", "--model", "etc", "--out", str(out_model)
    ) == EXIT_OK
    assert out_model.is_file()
    capsys.readouterr()
    assert _run_cli(
        config_path, "evaluate", "--model", str(out_model), "--split", "train",
    ) == EXIT_OK
    out = capsys.readouterr().out
    assert "(corner)" in out


def test_build_dataset_requires_labels(tmp_path, planted_repo, capsys):
    config_path = tmp_path / "cfg.yaml"
    write_pipeline_config(config_path, planted_repo, tmp_path / "work")
    assert _run_cli(config_path, "init") == EXIT_OK
    rc = _run_cli(config_path, "build-dataset")
    assert rc == 1
    assert "error:" in capsys.readouterr().err
