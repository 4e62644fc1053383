"""Ring geometry, dispersion, couplings and the resonance ladders.

Two identical emitters sit on a closed ring of circumference L, one at
x = 0 and one at x = d.  The photon modes are plane waves with integer
wavenumber k and a massive dispersion; every frequency here is in units
of the gap (hbar = v = m = 1), so the band starts at 1.

Geometries built from integer or rational multiples of pi carry the
separation ratio d/L as an exact Fraction, which is what makes the
deflation and double-resonance tests exact instead of threshold games.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

RationalLike = Union[int, str, Fraction]


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected int, Fraction or 'a/b' string, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs.  Frozen; derived objects carry `params_key(self)`."""

    gamma: float
    epsilon: float
    length: float
    spacing: float
    cutoff: int
    ratio: Optional[Fraction] = None  # spacing / length, exact when known

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.spacing < self.length:
            raise ValueError(
                f"spacing must lie strictly inside (0, length), "
                f"got spacing={self.spacing} length={self.length}"
            )
        if self.ratio is not None and self.ratio == Fraction(1, 2):
            raise ValueError("spacing equal to half the ring is excluded")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be at least 1, got {self.cutoff}")
        top = mode_frequency(self, self.cutoff)
        if top < 2.0 * self.epsilon:
            raise ValueError(
                f"mode cutoff too low: top frequency {top:.6g} is below "
                f"twice the emitter frequency {self.epsilon:.6g}"
            )

    @classmethod
    def from_pi_multiples(
        cls,
        gamma: float,
        epsilon: float,
        length_pi: RationalLike,
        spacing_pi: RationalLike,
        cutoff: int,
    ) -> "SystemParams":
        """Build with length = length_pi*pi, spacing = spacing_pi*pi.

        The rational inputs fix d/L exactly.
        """
        lp = _as_fraction(length_pi)
        sp = _as_fraction(spacing_pi)
        if lp <= 0 or sp <= 0:
            raise ValueError("length_pi and spacing_pi must be positive")
        return cls(
            gamma=float(gamma),
            epsilon=float(epsilon),
            length=float(lp) * math.pi,
            spacing=float(sp) * math.pi,
            cutoff=int(cutoff),
            ratio=sp / lp,
        )

    @classmethod
    def from_lengths(cls, gamma, epsilon, length, spacing, cutoff) -> "SystemParams":
        """Build from raw float lengths; d/L is then only known as a float."""
        return cls(
            gamma=float(gamma),
            epsilon=float(epsilon),
            length=float(length),
            spacing=float(spacing),
            cutoff=int(cutoff),
            ratio=None,
        )

    @property
    def separation_ratio(self) -> float:
        return float(self.ratio) if self.ratio is not None else self.spacing / self.length

    def with_epsilon(self, epsilon: float) -> "SystemParams":
        return SystemParams(
            gamma=self.gamma,
            epsilon=float(epsilon),
            length=self.length,
            spacing=self.spacing,
            cutoff=self.cutoff,
            ratio=self.ratio,
        )

    def with_cutoff(self, cutoff: int) -> "SystemParams":
        return SystemParams(
            gamma=self.gamma,
            epsilon=self.epsilon,
            length=self.length,
            spacing=self.spacing,
            cutoff=int(cutoff),
            ratio=self.ratio,
        )


def params_key(params: SystemParams) -> str:
    """Short stable digest used to stamp objects derived from one geometry."""
    text = (
        f"{params.gamma!r}|{params.epsilon!r}|{params.length!r}|"
        f"{params.spacing!r}|{params.cutoff}|{params.ratio!r}"
    )
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def mode_frequency(params: SystemParams, k):
    """Frequency of ring mode k (integer, sign irrelevant)."""
    x = (2.0 * math.pi / params.length) * np.asarray(k, dtype=np.float64)
    out = np.hypot(x, 1.0)
    return float(out) if np.isscalar(k) or np.ndim(k) == 0 else out


def form_factor(params: SystemParams, k):
    """Emitter-mode coupling magnitude for mode k."""
    om = mode_frequency(params, k)
    return np.sqrt(params.gamma / (params.length * om))


@dataclass(frozen=True)
class ResonanceLine:
    branch: str  # "short" or "long"
    index: int  # number of half waves fitting on the arc
    energy: float
    double: bool = False


@dataclass(frozen=True)
class DoublePoint:
    short_index: int
    long_index: int
    energy: float


@dataclass(frozen=True)
class ResonanceLadder:
    entries: tuple
    double_points: tuple

    def energies(self) -> np.ndarray:
        return np.array([line.energy for line in self.entries], dtype=np.float64)


def _arc_resonance(arc_length: float, half_waves: int) -> float:
    if half_waves < 1:
        raise ValueError(f"half_waves must be a positive integer, got {half_waves}")
    return float(np.hypot(half_waves * math.pi / arc_length, 1.0))


def short_resonance(params: SystemParams, half_waves: int) -> float:
    """Standing-wave energy of the arc between the emitters."""
    return _arc_resonance(params.spacing, half_waves)


def long_resonance(params: SystemParams, half_waves: int) -> float:
    """Standing-wave energy of the complementary arc."""
    return _arc_resonance(params.length - params.spacing, half_waves)


def fundamental_pair(params: SystemParams) -> tuple:
    """Smallest (short, long) index pair sharing one resonance energy.

    Exists only when d/L is known exactly; with d/L = p/q in lowest terms
    the pair is (p, q - p).
    """
    if params.ratio is None:
        raise ValueError("fundamental pair needs an exact separation ratio")
    p = params.ratio.numerator
    q = params.ratio.denominator
    return (p, q - p)


def resonances_in_window(params: SystemParams, e_min: float, e_max: float) -> ResonanceLadder:
    """All arc resonances with e_min <= E <= e_max, sorted by energy.

    Double points (a short and a long index landing on the same energy)
    are detected by integer arithmetic when d/L is exact, so no float
    coincidence threshold is involved.  Entries at a double point appear
    once per branch and are flagged.
    """
    if not e_max > e_min:
        raise ValueError("empty energy window")
    p = q = None
    if params.ratio is not None:
        p = params.ratio.numerator
        q = params.ratio.denominator

    def indices_in_window(arc: float):
        # E >= e_min  <=>  n >= (arc/pi) sqrt(e_min^2 - 1)
        if e_min > 1.0:
            n0 = max(1, math.ceil((arc / math.pi) * math.sqrt(e_min * e_min - 1.0) - 1e-12))
        else:
            n0 = 1
        found = []
        n = n0
        while True:
            e = _arc_resonance(arc, n)
            if e > e_max:
                break
            if e >= e_min:
                found.append((n, e))
            n += 1
        return found

    short_arc = params.spacing
    long_arc = params.length - params.spacing
    doubles = {}
    if p is not None:
        for n, e in indices_in_window(short_arc):
            # n half waves on the short arc match m on the long arc when
            # n (q - p) == m p
            if (n * (q - p)) % p == 0:
                doubles[("short", n)] = DoublePoint(n, n * (q - p) // p, e)

    entries = []
    for n, e in indices_in_window(short_arc):
        entries.append(ResonanceLine("short", n, e, double=("short", n) in doubles))
    long_doubles = {dp.long_index for dp in doubles.values()}
    for n, e in indices_in_window(long_arc):
        entries.append(ResonanceLine("long", n, e, double=n in long_doubles))
    entries.sort(key=lambda line: (line.energy, line.branch, line.index))
    dps = tuple(sorted(doubles.values(), key=lambda dp: dp.energy))
    return ResonanceLadder(entries=tuple(entries), double_points=dps)
