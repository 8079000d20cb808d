"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored; unknown or repeated keys are
errors.  ``to_text`` writes every key in declaration order, so
``Config.from_text(c.to_text()).to_text() == c.to_text()``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from .continuation import eps_schedule
from .core import DomainSpec, Params
from .errors import ConfigError, NormsolError
from .minimizer import MinimizeOptions

__all__ = ["Config", "load_config", "default_config_text"]


@dataclass(frozen=True)
class Config:
    dim: int = 3
    r: float = 0.5
    p: float = 4.0
    rho: float = 0.01
    domain: str = "radial_ball"
    length_or_radius: float = 1.0
    ball_dimension: int = 3
    strict_paper_regime: bool = True
    n: int = 512
    eps0: float = 1.0
    eps_factor: float = 0.5
    eps_min: float = 1e-8
    max_iters: int = 50000
    grad_tol: Optional[float] = None
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    step_init: float = 1.0
    seed: int = 0
    trial_count: int = 32
    u_floor: float = 1e-3
    residual_tol: float = 1e-3
    threads: int = 1
    out_dir: str = "results"

    # -- parsing ---------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "Config":
        kinds = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            values[key] = _convert(key, value, kinds[key], lineno)
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    # -- derived objects --------------------------------------------------

    def domain_spec(self) -> DomainSpec:
        if self.domain == "interval":
            return DomainSpec("interval", self.length_or_radius, None)
        return DomainSpec(self.domain, self.length_or_radius, self.ball_dimension)

    def params(self) -> Params:
        return Params(
            dim=self.dim,
            r=self.r,
            p=self.p,
            rho=self.rho,
            eps=self.eps0,
            domain=self.domain_spec(),
            strict_paper_regime=self.strict_paper_regime,
        )

    def schedule(self) -> list[float]:
        return eps_schedule(self.eps0, self.eps_factor, self.eps_min)

    def minimize_options(self) -> MinimizeOptions:
        return MinimizeOptions(
            max_iters=self.max_iters,
            grad_tol=self.grad_tol,
            armijo_c=self.armijo_c,
            armijo_shrink=self.armijo_shrink,
            step_init=self.step_init,
        )

    def validate(self) -> None:
        """Raise ``ConfigError`` for anything the solver would reject."""
        try:
            self.params()
            self.schedule()
            self.minimize_options()
        except (NormsolError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.trial_count < 1:
            raise ConfigError("trial_count must be >= 1")


def _convert(key, value, kind, lineno):
    kind = str(kind)
    try:
        if "bool" in kind:
            low = value.lower()
            if low not in ("true", "false"):
                raise ValueError(f"expected true or false, got {value!r}")
            return low == "true"
        if "Optional[float]" in kind or "float | None" in kind:
            return None if value.lower() in ("auto", "none") else float(value)
        if "int" in kind:
            return int(value)
        if "float" in kind:
            out = float(value)
            if not math.isfinite(out):
                raise ValueError("must be finite")
            return out
        return value
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc


def _format(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def default_config_text() -> str:
    return resources.files("normsol").joinpath("default.cfg").read_text(encoding="utf-8")


def load_config(path: str | Path | None) -> Config:
    """Read a config file; ``None`` selects the bundled default."""
    if path is None:
        return Config.from_text(default_config_text())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return Config.from_text(text)
