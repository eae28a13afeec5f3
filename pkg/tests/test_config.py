import json

import pytest

from cswco.config import ConfigError, RunConfig, load_settings

ENV_KEYS = (
    "CSWCO_N",
    "CSWCO_M",
    "CSWCO_TOL",
    "CSWCO_REL_TOL",
    "CSWCO_EIGEN_K",
    "CSWCO_M_MAX",
    "CSWCO_SEED",
    "CSWCO_WORKERS",
)


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    empty = tmp_path / "empty.env"
    empty.write_text("", encoding="utf-8")
    return empty


def test_defaults(clean_env):
    cfg = load_settings(env_file=clean_env)
    assert cfg == RunConfig()
    assert (cfg.N, cfg.M) == (96, 32)
    assert cfg.wide_N == 256


def test_environment_overrides(clean_env, monkeypatch):
    monkeypatch.setenv("CSWCO_N", "64")
    monkeypatch.setenv("CSWCO_TOL", "1e-8")
    cfg = load_settings(env_file=clean_env)
    assert cfg.N == 64
    assert cfg.M == 21
    assert cfg.tol == 1e-8


def test_dotenv_file_is_read(clean_env, tmp_path):
    env_file = tmp_path / "run.env"
    env_file.write_text("CSWCO_N=48\nCSWCO_M=12\nCSWCO_WORKERS=2\n", encoding="utf-8")
    cfg = load_settings(env_file=env_file)
    assert (cfg.N, cfg.M, cfg.workers) == (48, 12, 2)


def test_config_file_overlays_environment(clean_env, monkeypatch, tmp_path):
    monkeypatch.setenv("CSWCO_N", "64")
    config_file = tmp_path / "run.json"
    config_file.write_text(json.dumps({"N": 128, "M": 40, "eigen_k": 3}), encoding="utf-8")
    cfg = load_settings(env_file=clean_env, config_file=config_file)
    assert (cfg.N, cfg.M, cfg.eigen_k) == (128, 40, 3)


@pytest.mark.parametrize(
    "payload",
    ["[1, 2]", "{not json", json.dumps({"N": 64, "colour": "red"})],
)
def test_bad_config_files(clean_env, tmp_path, payload):
    config_file = tmp_path / "run.json"
    config_file.write_text(payload, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(env_file=clean_env, config_file=config_file)


def test_missing_config_file(clean_env, tmp_path):
    with pytest.raises(ConfigError):
        load_settings(env_file=clean_env, config_file=tmp_path / "absent.json")


def test_bad_environment_value(clean_env, monkeypatch):
    monkeypatch.setenv("CSWCO_N", "many")
    with pytest.raises(ConfigError):
        load_settings(env_file=clean_env)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"N": 1024, "M": 32},
        {"N": 64, "M": 40},
        {"M": 0},
        {"tol": 0.0},
        {"eigen_k": 0},
        {"workers": 0},
        {"m_max": -1},
    ],
)
def test_validation(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_overrides_skip_none_and_rescale_block():
    cfg = RunConfig().with_overrides(N=48, tol=None)
    assert (cfg.N, cfg.M, cfg.tol) == (48, 16, 1e-6)
    assert RunConfig().with_overrides(N=200, M=20).M == 20
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(colour="red")


def test_wide_truncation_is_capped():
    assert RunConfig(N=512, M=100).wide_N == 512
    assert RunConfig(N=300, M=20).wide_N == 300


def test_to_json_uses_camel_case():
    payload = RunConfig().to_json()
    assert payload["relTol"] == 1e-4
    assert payload["eigenK"] == 5
