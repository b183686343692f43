"""Config parsing/validation and the CLI's argument and exit-code surface."""

from __future__ import annotations

import dataclasses

import pytest
import yaml

from issuediff.cli import EXIT_CONFIG, EXIT_OK, main
from issuediff.config import (
    DEFAULT_SPLIT_RATIOS,
    config_from_dict,
    load_config,
    validate_config,
)
from issuediff.errors import ConfigError

from conftest import write_pipeline_config


def _doc(**overrides):
    doc = {
        "project_name": "demo",
        "repo_url_or_path": "/srv/repos/demo",
        "branch": "main",
        "workdir": "/tmp/demo-work",
        "analyzer": {"command_template": "scan {tree} {out}"},
    }
    doc.update(overrides)
    return doc


def test_minimal_config_fills_defaults():
    cfg = config_from_dict(_doc())
    assert cfg.project_name == "demo"
    assert cfg.branch == "main"
    assert cfg.workers == 1
    assert cfg.seed == 0
    assert cfg.split_ratios == DEFAULT_SPLIT_RATIOS
    assert cfg.require_c_change is True
    assert cfg.cma.threshold == 1.0
    assert cfg.cma.lexicon is None
    assert cfg.analyzer.report_path_pattern == "report.txt"


def test_branch_defaults_to_master():
    doc = _doc()
    del doc["branch"]
    assert config_from_dict(doc).branch == "master"


@pytest.mark.parametrize(
    "missing", ["project_name", "repo_url_or_path", "workdir", "analyzer"]
)
def test_missing_required_key_is_config_error(missing):
    doc = _doc()
    del doc[missing]
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_analyzer_template_validated_at_load():
    with pytest.raises(ConfigError):
        config_from_dict(_doc(analyzer={"command_template": "scan {tree}"}))


def test_relative_paths_resolve_against_config_dir(tmp_path):
    (tmp_path / "repo" / ".git").mkdir(parents=True)
    (tmp_path / "words.txt").write_text("fix\t1.0\n")
    doc = _doc(
        repo_url_or_path="repo",
        workdir="work",
        cma={"lexicon": "words.txt"},
    )
    cfg = config_from_dict(doc, base_dir=tmp_path)
    assert cfg.workdir == tmp_path / "work"
    assert cfg.repo_url_or_path == str(tmp_path / "repo")
    assert cfg.cma.lexicon == str((tmp_path / "words.txt").resolve())


@pytest.mark.parametrize(
    "bad",
    [
        {"workers": 0},
        {"split_ratios": [0.5, 0.5]},
        {"split_ratios": [0.9, 0.2, 0.1]},
        {"split_ratios": [1.2, -0.1, -0.1]},
        {"cma": {"threshold": 0}},
        {"cma": {"threshold": -2}},
        {"cma": {"limit": 0}},
        {"project_name": ""},
    ],
)
def test_validation_rejects_bad_values(bad):
    with pytest.raises(ConfigError):
        config_from_dict(_doc(**bad))


def test_validate_config_direct():
    cfg = config_from_dict(_doc())
    validate_config(cfg)  # no error
    with pytest.raises(ConfigError):
        validate_config(dataclasses.replace(cfg, workers=-1))


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("analyzer: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    with pytest.raises(ConfigError):
        load_config(empty)


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "ok.yaml"
    path.write_text(yaml.safe_dump(_doc(workers=3, seed=11)))
    cfg = load_config(path)
    assert (cfg.workers, cfg.seed) == (3, 11)
    assert cfg.with_overrides(workers=5).workers == 5
    assert cfg.with_overrides().seed == 11


# --- CLI surface -----------------------------------------------------------


def test_cli_missing_config_exits_one(tmp_path, capsys):
    rc = main(["--config", str(tmp_path / "none.yaml"), "status"])
    assert rc == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_cli_rejects_unknown_subcommand(planted_config):
    with pytest.raises(SystemExit) as exc:
        main(["--config", str(planted_config), "frobnicate"])
    assert exc.value.code == 2  # argparse usage failure


def test_cli_worker_override_must_be_positive(planted_config, capsys):
    rc = main(["--config", str(planted_config), "--workers", "0", "status"])
    assert rc == EXIT_CONFIG
    assert "workers" in capsys.readouterr().err


def test_cli_init_and_status_flow(tmp_path, planted_repo, capsys):
    config_path = tmp_path / "cfg.yaml"
    write_pipeline_config(config_path, planted_repo, tmp_path / "work")
    assert main(["--config", str(config_path), "init"]) == EXIT_OK
    assert (tmp_path / "work" / "workdir.json").is_file()
    capsys.readouterr()
    # nothing selected yet: status succeeds with an empty listing
    assert main(["--config", str(config_path), "status"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "selected=0" in out


def test_cli_status_requires_initialized_workdir(tmp_path, planted_repo, capsys):
    config_path = tmp_path / "cfg.yaml"
    write_pipeline_config(config_path, planted_repo, tmp_path / "work")
    rc = main(["--config", str(config_path), "status"])
    assert rc == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_cli_split_ratio_parsing(tmp_path, planted_repo, capsys):
    config_path = tmp_path / "cfg.yaml"
    write_pipeline_config(config_path, planted_repo, tmp_path / "work")
    main(["--config", str(config_path), "init"])
    rc = main(["--config", str(config_path), "split", "--ratios", "0.8,0.1"])
    assert rc == EXIT_CONFIG
    rc = main(["--config", str(config_path), "split", "--ratios", "a,b,c"])
    assert rc == EXIT_CONFIG
    capsys.readouterr()


def test_cli_train_rejects_unknown_model(tmp_path, planted_repo, capsys):
    config_path = tmp_path / "cfg.yaml"
    write_pipeline_config(config_path, planted_repo, tmp_path / "work")
    main(["--config", str(config_path), "init"])
    with pytest.raises(SystemExit):  # argparse choices
        main(["--config", str(config_path), "train", "--model", "svm"])


def test_cli_remote_repo_url_is_rejected(tmp_path, capsys):
    config_path = tmp_path / "cfg.yaml"
    config_path.write_text(
        yaml.safe_dump(
            {
                "project_name": "demo",
                "repo_url_or_path": "https://example.org/demo.git",
                "workdir": str(tmp_path / "work"),
                "analyzer": {"command_template": "scan {tree} {out}"},
            }
        )
    )
    assert main(["--config", str(config_path), "init"]) == EXIT_OK
    rc = main(["--config", str(config_path), "select-commits"])
    assert rc == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "error:" in err
