"""Flat key=value run configuration.

One setting per line, `#` starts a comment, keys are case sensitive.
Unknown and duplicate keys are rejected outright; a config that parses
is a config whose every line did something.

Ring lengths are given as multiples of pi and accept exact rationals
("d_pi = 16/3"), which is how geometries keep an exact separation ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional

from .errors import ConfigError
from .model import SystemParams


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 1e-4
    L_pi: Fraction = Fraction(40)
    d_pi: Fraction = Fraction(8)
    K: int = 2000
    n_grid: int = 4096
    epsilon: Optional[float] = None
    epsilon_min: float = 1.005
    epsilon_max: float = 1.030
    epsilon_steps: int = 251
    window_margin: float = 0.006
    deflation_rel_tol: float = 1e-14
    quasi_ratio: float = 10.0
    fit_halfwidth: float = 1e-3
    fit_points: int = 21
    crossing_halfwidth: float = 2e-3

    def to_params(self, epsilon: Optional[float] = None) -> SystemParams:
        """Build SystemParams, with an explicit epsilon taking precedence."""
        eps = epsilon if epsilon is not None else self.epsilon
        if eps is None:
            raise ConfigError("no emitter frequency: set epsilon or pass one")
        try:
            return SystemParams.from_pi_multiples(
                gamma=self.gamma,
                epsilon=float(eps),
                length_pi=self.L_pi,
                spacing_pi=self.d_pi,
                cutoff=self.K,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def epsilon_grid(self):
        import numpy as np

        return np.linspace(self.epsilon_min, self.epsilon_max, self.epsilon_steps)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"not an integer: {text!r}") from exc


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


_PARSERS = {
    "gamma": _parse_float,
    "L_pi": _parse_fraction,
    "d_pi": _parse_fraction,
    "K": _parse_int,
    "n_grid": _parse_int,
    "epsilon": _parse_float,
    "epsilon_min": _parse_float,
    "epsilon_max": _parse_float,
    "epsilon_steps": _parse_int,
    "window_margin": _parse_float,
    "deflation_rel_tol": _parse_float,
    "quasi_ratio": _parse_float,
    "fit_halfwidth": _parse_float,
    "fit_points": _parse_int,
    "crossing_halfwidth": _parse_float,
}

assert set(_PARSERS) == {f.name for f in fields(RunConfig)}


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        seen[key] = _PARSERS[key](value)
    cfg = RunConfig(**seen)
    _validate(cfg)
    return cfg


def parse_config(path) -> RunConfig:
    """Read and validate a config file.  Missing files raise the usual OSError."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


def _validate(cfg: RunConfig):
    if cfg.gamma <= 0:
        raise ConfigError("gamma must be positive")
    if cfg.L_pi <= 0 or cfg.d_pi <= 0:
        raise ConfigError("L_pi and d_pi must be positive")
    if cfg.d_pi >= cfg.L_pi:
        raise ConfigError("d_pi must be smaller than L_pi")
    if 2 * cfg.d_pi == cfg.L_pi:
        raise ConfigError("spacing equal to half the ring is excluded")
    if cfg.K < 1:
        raise ConfigError("K must be at least 1")
    if cfg.n_grid < 2:
        raise ConfigError("n_grid must be at least 2")
    if not cfg.epsilon_max > cfg.epsilon_min:
        raise ConfigError("epsilon_max must exceed epsilon_min")
    if cfg.epsilon_steps < 2:
        raise ConfigError("epsilon_steps must be at least 2")
    if cfg.fit_points < 3:
        raise ConfigError("fit_points must be at least 3")
    if cfg.fit_halfwidth <= 0:
        raise ConfigError("fit_halfwidth must be positive")
    if cfg.crossing_halfwidth <= 0:
        raise ConfigError("crossing_halfwidth must be positive")
    if cfg.quasi_ratio <= 0:
        raise ConfigError("quasi_ratio must be positive")
    if cfg.window_margin <= 0:
        raise ConfigError("window_margin must be positive")
    if cfg.deflation_rel_tol <= 0:
        raise ConfigError("deflation_rel_tol must be positive")
