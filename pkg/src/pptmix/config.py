"""Tolerances, limits and solver choices, loadable from a JSON file."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .conic import SolverSettings, available_backends
from .errors import InvalidArgumentError

WORKERS_ENV = "PPTMIX_WORKERS"


def _env_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise InvalidArgumentError(f"{WORKERS_ENV} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    solver_tol: float = 1e-9
    max_iter: int = 500
    eps_verdict: float = 1e-7
    bisection_tol: float = 1e-4
    certificate_residual: float = 1e-6
    certificate_eig_tol: float = 1e-9
    max_qubits: int = 10
    dense_max_qubits: int = 5
    solver: str = "clarabel"
    dense_solver: str = "auto"
    field: str = "auto"
    workers: int = 1

    def __post_init__(self):
        for name in ("solver_tol", "eps_verdict", "bisection_tol",
                     "certificate_residual", "certificate_eig_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        for name in ("max_iter", "max_qubits", "dense_max_qubits", "workers"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        for name in ("solver", "dense_solver"):
            if getattr(self, name) not in available_backends():
                raise InvalidArgumentError(
                    f"{name}={getattr(self, name)!r} is not one of {available_backends()}"
                )
        if self.field not in ("auto", "real", "complex"):
            raise InvalidArgumentError(f"field must be auto|real|complex, got {self.field!r}")

    @property
    def solver_settings(self) -> SolverSettings:
        return SolverSettings(tol=self.solver_tol, max_iter=self.max_iter)

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "Settings":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def default_settings() -> Settings:
    return Settings(workers=_env_workers())


def load_settings(path: str | os.PathLike | None = None) -> Settings:
    """Defaults, overridden by the keys of a JSON object at ``path``."""
    base = default_settings()
    if path is None:
        return base
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(Settings)}
    unknown = set(data) - set(known)
    if unknown:
        raise InvalidArgumentError(f"unknown config keys in {path}: {sorted(unknown)}")
    coerced = {}
    for key, value in data.items():
        kind = type(getattr(base, key))
        try:
            coerced[key] = kind(value)
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"config key {key!r} expects {kind.__name__}") from None
    return replace(base, **coerced)
