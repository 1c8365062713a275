"""
Tests for configuration precedence: formlab.toml, then environment, then defaults.
"""

import pytest

from src.config import DEFAULT_TOLERANCE, RunConfig, get_formlab_config, resolve_seed


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in ("FORMLAB_THREADS", "FORMLAB_TOL", "FORMLAB_LOG_LEVEL", "FORMLAB_LOG_FILE", "FORMLAB_CONFIG"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_defaults(clean_env):
    config = get_formlab_config()
    assert config == {"threads": 1, "tolerance": DEFAULT_TOLERANCE, "log_level": "WARNING", "log_file": None}


def test_environment(clean_env, monkeypatch):
    monkeypatch.setenv("FORMLAB_THREADS", "4")
    monkeypatch.setenv("FORMLAB_TOL", "1e-6")
    monkeypatch.setenv("FORMLAB_LOG_LEVEL", "DEBUG")
    config = get_formlab_config()
    assert config["threads"] == 4
    assert config["tolerance"] == 1e-6
    assert config["log_level"] == "DEBUG"


def test_config_file_wins(clean_env, monkeypatch):
    (clean_env / "formlab.toml").write_text('[formlab]\nthreads = 2\ntolerance = 1e-7\n', encoding="utf-8")
    monkeypatch.setenv("FORMLAB_THREADS", "8")
    config = get_formlab_config()
    assert config["threads"] == 2
    assert config["tolerance"] == 1e-7


def test_config_file_zero_values_are_kept(clean_env, monkeypatch):
    (clean_env / "formlab.toml").write_text('[formlab]\nthreads = 0\ntolerance = 0.0\n', encoding="utf-8")
    monkeypatch.setenv("FORMLAB_THREADS", "8")
    monkeypatch.setenv("FORMLAB_TOL", "1e-6")
    config = get_formlab_config()
    assert config["tolerance"] == 0.0
    assert config["threads"] == 1


def test_config_path_from_environment(clean_env, monkeypatch):
    path = clean_env / "other.toml"
    path.write_text('[formlab]\nlog_level = "ERROR"\n', encoding="utf-8")
    monkeypatch.setenv("FORMLAB_CONFIG", str(path))
    assert get_formlab_config()["log_level"] == "ERROR"


def test_broken_values_fall_back(clean_env, monkeypatch):
    (clean_env / "formlab.toml").write_text("[formlab\nthreads = ", encoding="utf-8")
    monkeypatch.setenv("FORMLAB_THREADS", "many")
    monkeypatch.setenv("FORMLAB_TOL", "tiny")
    config = get_formlab_config()
    assert config["threads"] == 1
    assert config["tolerance"] == DEFAULT_TOLERANCE


def test_resolve_seed():
    assert resolve_seed(5) == 5
    drawn = resolve_seed(None)
    assert 0 <= drawn < 2**32


def test_run_config_flags_override(clean_env, monkeypatch):
    monkeypatch.setenv("FORMLAB_THREADS", "3")
    run = RunConfig.from_args("validate", seed=1, tolerance=0.0, inputs=["op.json"])
    assert run.threads == 3
    assert run.tolerance == 0.0
    assert run.inputs == ["op.json"]
    assert RunConfig.from_args("validate", seed=1, threads=2).threads == 2


def test_run_config_records_sampler_and_tolerances(clean_env):
    run = RunConfig.from_args("check-z2", seed=1, tolerance=1e-7, sampler="grid:radial=5")
    assert run.sampler == "grid:radial=5"
    assert run.tolerances == {"verdict": 1e-7}
    assert RunConfig.from_args("validate", seed=1).tolerances == {"verdict": DEFAULT_TOLERANCE}
