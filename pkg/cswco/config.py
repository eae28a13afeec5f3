from __future__ import annotations

from dataclasses import dataclass, fields, replace
import json
import os
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

MAX_TRUNCATION = 512


class ConfigError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    N: int = 96
    M: int = 32
    tol: float = 1e-6
    rel_tol: float = 1e-4
    eigen_k: int = 5
    m_max: int = 8
    seed: int = 20240611
    workers: int = 4
    output: Optional[Path] = None
    timestamp: bool = True

    def __post_init__(self) -> None:
        if self.N > MAX_TRUNCATION:
            raise ConfigError(f"N must not exceed {MAX_TRUNCATION}, got {self.N}")
        if not 1 <= self.M <= self.N // 2:
            raise ConfigError(f"M must satisfy 1 <= M <= N/2, got M={self.M} with N={self.N}")
        if self.tol <= 0 or self.rel_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.eigen_k < 1 or self.m_max < 0 or self.workers < 1:
            raise ConfigError("eigen_k and workers must be positive and m_max non-negative")

    @property
    def wide_N(self) -> int:
        """Truncation for block identities involving disk automorphisms."""
        return min(MAX_TRUNCATION, max(self.N, 8 * self.M))

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        present = {key: value for key, value in overrides.items() if value is not None}
        if "N" in present and "M" not in present:
            present["M"] = max(1, present["N"] // 3)
        try:
            return replace(self, **present)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "tol": self.tol,
            "relTol": self.rel_tol,
            "eigenK": self.eigen_k,
            "mMax": self.m_max,
            "seed": self.seed,
            "workers": self.workers,
        }


_ENV_KEYS = {
    "N": ("CSWCO_N", int),
    "M": ("CSWCO_M", int),
    "tol": ("CSWCO_TOL", float),
    "rel_tol": ("CSWCO_REL_TOL", float),
    "eigen_k": ("CSWCO_EIGEN_K", int),
    "m_max": ("CSWCO_M_MAX", int),
    "seed": ("CSWCO_SEED", int),
    "workers": ("CSWCO_WORKERS", int),
}


def _read_config_file(path: Path) -> dict[str, Any]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {item.name for item in fields(RunConfig)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return payload


def load_settings(env_file: Optional[Path] = None, config_file: Optional[Path] = None) -> RunConfig:
    """Load the run configuration from environment variables and an optional JSON file."""
    load_dotenv(dotenv_path=env_file)

    values: dict[str, Any] = {}
    for name, (variable, cast) in _ENV_KEYS.items():
        raw = os.getenv(variable)
        if raw is None or not raw.strip():
            continue
        try:
            values[name] = cast(raw)
        except ValueError as exc:
            raise ConfigError(f"{variable}={raw!r} is not a valid {cast.__name__}") from exc

    if config_file is not None:
        values.update(_read_config_file(Path(config_file)))

    if "N" in values and "M" not in values:
        values["M"] = max(1, int(values["N"]) // 3)
    if "output" in values and values["output"] is not None:
        values["output"] = Path(values["output"])
    return RunConfig(**values)
