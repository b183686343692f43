"""Shared fixtures: scripted git repositories with planted analyzer
findings that exercise every labeling path, plus a config factory."""

from __future__ import annotations

import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

GIT_ENV = {
    "GIT_AUTHOR_NAME": "Dev One",
    "GIT_AUTHOR_EMAIL": "dev@example.org",
    "GIT_COMMITTER_NAME": "Dev One",
    "GIT_COMMITTER_EMAIL": "dev@example.org",
}

# lib/alpha.c: null dereference, properly fixed (scenario: label 1 / fixed).
ALPHA_BUGGY = """\
static int storage;

int alpha_use(void) {
    int *a = NULL;
    *a = 3;
    storage = 1;
    return storage;
}
"""

ALPHA_FIXED = ALPHA_BUGGY.replace("int *a = NULL;", "int *a = &storage;")

# lib/beta.c: memory leak nobody ever fixes (scenario: 0 / never_fixed).
BETA = """\
#include <stdlib.h>

void beta_fill(int n) {
    char *scratch;
    scratch = malloc(n);
    if (scratch) {
        scratch[0] = 'b';
    }
}
"""

# lib/gamma.c: buffer overrun, fixed then reverted (0 / fixed_then_unfixed).
GAMMA_BUGGY = """\
int gamma_store(void) {
    int buf[4];
    buf[0] = 1;
    buf[7] = 9;
    return buf[0];
}
"""

GAMMA_FIXED = GAMMA_BUGGY.replace("buf[7] = 9;", "buf[3] = 9;")

# lib/delta.c: null dereference silenced by a pure-insertion guard, so the
# fixing diff never touches the trace (scenario: 0 / untouched_by_diff).
DELTA_BUGGY = """\
void delta_reset(int flag) {
    int *d = NULL;
    int unused = flag;
    *d = 9;
}
"""

DELTA_GUARDED = DELTA_BUGGY.replace(
    "    *d = 9;",
    "    if (!d) {\n        return;\n    }\n    *d = 9;",
)


def run_git(repo: Path, *args: str, date: int = None) -> str:
    env = {**os.environ, **GIT_ENV}
    if date is not None:
        env["GIT_AUTHOR_DATE"] = f"{date} +0000"
        env["GIT_COMMITTER_DATE"] = f"{date} +0000"
    proc = subprocess.run(
        ["git", *args], cwd=str(repo), env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, f"git {' '.join(args)} failed: {proc.stderr}"
    return proc.stdout


def init_repo(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    run_git(path, "init", "-q", "-b", "main")
    return path


def commit_all(repo: Path, message: str, date: int) -> str:
    run_git(repo, "add", "-A")
    run_git(repo, "commit", "-q", "-m", message, date=date)
    return run_git(repo, "rev-parse", "HEAD").strip()


def build_planted_repo(root: Path) -> Path:
    """Seven commits covering all four labeling outcomes plus two commits
    the selector must skip (non-fix message; fix message without a C
    change)."""
    repo = init_repo(root / "repo")
    lib = repo / "lib"
    lib.mkdir()
    (repo / "README.md").write_text("sample library\n", encoding="utf-8")
    (lib / "alpha.c").write_text(ALPHA_BUGGY, encoding="utf-8")
    (lib / "beta.c").write_text(BETA, encoding="utf-8")
    (lib / "gamma.c").write_text(GAMMA_BUGGY, encoding="utf-8")
    (lib / "delta.c").write_text(DELTA_BUGGY, encoding="utf-8")
    commit_all(repo, "initial import of the sample library", 1_600_000_000)

    (repo / "README.md").write_text(
        "sample library\ncopyright 2021\n", encoding="utf-8"
    )
    commit_all(repo, "update copyright year", 1_600_000_100)

    (lib / "gamma.c").write_text(GAMMA_FIXED, encoding="utf-8")
    commit_all(repo, "fix buffer overflow in gamma table writer", 1_600_000_200)

    (lib / "alpha.c").write_text(ALPHA_FIXED, encoding="utf-8")
    commit_all(repo, "fix null pointer dereference crash in alpha", 1_600_000_300)

    (lib / "gamma.c").write_text(GAMMA_BUGGY, encoding="utf-8")
    commit_all(repo, "fix gamma index clamping regression", 1_600_000_400)

    (lib / "delta.c").write_text(DELTA_GUARDED, encoding="utf-8")
    commit_all(repo, "fix potential crash in delta reset path", 1_600_000_500)

    (repo / "README.md").write_text(
        "sample library\ncopyright 2021\nusage: see docs\n", encoding="utf-8"
    )
    commit_all(repo, "fix typo in documentation", 1_600_000_600)
    return repo


def write_pipeline_config(
    path: Path,
    repo: Path,
    workdir: Path,
    workers: int = 1,
    seed: int = 0,
    extra: dict = None,
) -> Path:
    doc = {
        "project_name": "sample",
        "repo_url_or_path": str(repo),
        "branch": "main",
        "workdir": str(workdir),
        "analyzer": {
            "command_template": (
                f"{sys.executable} -m issuediff.fixture_analyzer {{tree}} {{out}}"
            ),
            "version": "fixture-1",
        },
        "cma": {"threshold": 1.0},
        "workers": workers,
        "seed": seed,
    }
    doc.update(extra or {})
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path


@pytest.fixture()
def planted_repo(tmp_path):
    return build_planted_repo(tmp_path)


@pytest.fixture()
def planted_config(tmp_path, planted_repo):
    return write_pipeline_config(
        tmp_path / "issuediff.yaml", planted_repo, tmp_path / "work"
    )
