"""Arrowhead eigensolver.

The characteristic function of an arrowhead with positive couplings,

    f(E) = apex - E + sum_k g_k^2 / (E - pole_k),

is strictly decreasing on every interval between consecutive poles and
on the two outer intervals, so each of the n+1 eigenvalues sits alone
in a known bracket and strictly interlaces the poles.  Roots are found
per bracket (bisection, then Newton with the bracket as a safety net)
and eigenvectors are assembled in closed form from the resolvent.

`dense_oracle` solves the same matrix by cyclic Jacobi rotations and
shares no code with the secular path; it exists to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NumericalError, PoleHitError
from .sectors import ArrowheadSector, arrowhead_matrix

_DENSE_DIM_CAP = 5000


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its sector-basis eigenvector (unit norm)."""

    energy: float
    apex_amplitude: float
    mode_amplitudes: np.ndarray

    @property
    def emitter_weight(self) -> float:
        """Total excited-emitter probability carried by this state."""
        return self.apex_amplitude * self.apex_amplitude


def secular_value(sector: ArrowheadSector, energy: float) -> float:
    """Evaluate the characteristic function at one energy."""
    d = energy - sector.poles
    if (d == 0.0).any():
        k = int(sector.wavenumbers[np.argmin(np.abs(d))])
        raise PoleHitError(f"energy {energy!r} sits exactly on the pole of mode {k}")
    return float(sector.apex - energy + ((sector.couplings**2) / d).sum())


def _outer_pad(sector: ArrowheadSector) -> float:
    top = sector.poles[-1] if sector.poles.size else sector.apex
    return sector.coupling_norm() + 1e-6 * max(1.0, abs(sector.apex), abs(top))


def _brackets(sector: ArrowheadSector) -> tuple:
    # returns (lo, hi, lo_idx, hi_idx); the idx arrays name the pole at
    # each bracket edge, -1 for the outer pads
    pad = _outer_pad(sector)
    n = sector.poles.size
    if n == 0:
        lo = np.array([sector.apex - pad])
        hi = np.array([sector.apex + pad])
        none = np.array([-1], dtype=np.int64)
        return lo, hi, none, none.copy()
    bounds = np.empty(n + 2, dtype=np.float64)
    bounds[0] = min(sector.apex, sector.poles[0]) - pad
    bounds[1:-1] = sector.poles
    bounds[-1] = max(sector.apex, sector.poles[-1]) + pad
    lo_idx = np.arange(n + 1, dtype=np.int64) - 1
    hi_idx = np.arange(n + 1, dtype=np.int64)
    hi_idx[-1] = -1
    return bounds[:-1], bounds[1:], lo_idx, hi_idx


def _solve_brackets(sector, lo, hi, lo_idx, hi_idx, max_iter):
    g2 = sector.couplings * sector.couplings
    roots, anchors, offsets, status = _kernels.secular_roots(
        sector.apex, sector.poles, g2, lo, hi, lo_idx, hi_idx, max_iter
    )
    if (status != 0).any():
        i = int(np.argmax(status != 0))
        raise ConvergenceError(
            f"no convergence within {max_iter} iterations in the bracket "
            f"({lo[i]!r}, {hi[i]!r})"
        )
    # a root closer to its pole than half an ulp of the energy would
    # round onto it; report the neighboring float instead so eigenvalues
    # never coincide with a pole and stay strictly interlaced
    a = anchors >= 0
    if a.any():
        pole_vals = sector.poles[anchors[a]]
        ra = roots[a]
        hit = (ra == pole_vals) & (offsets[a] != 0.0)
        if hit.any():
            away = np.where(offsets[a] > 0.0, np.inf, -np.inf)
            roots = roots.copy()
            roots[a] = np.where(hit, np.nextafter(pole_vals, away), ra)
    return roots, anchors, offsets


def _assemble(sector: ArrowheadSector, energy: float, anchor: int = -1, offset: float = 0.0) -> EigenPair:
    if anchor >= 0:
        # pole distances formed against the anchor keep full precision
        # even when the root hugs it far below one ulp of the energy
        d = offset - (sector.poles - sector.poles[anchor])
    else:
        d = energy - sector.poles
    if (d == 0.0).any():
        raise NumericalError(f"eigenvector undefined: energy {energy!r} coincides with a pole")
    u = sector.couplings / d
    norm = np.sqrt(1.0 + float(u @ u))
    apex_amp = 1.0 / norm
    u /= norm
    if apex_amp < 0.0 or (apex_amp == 0.0 and u.size and u[np.argmax(u != 0.0)] < 0.0):
        apex_amp = -apex_amp
        u = -u
    u.setflags(write=False)
    return EigenPair(energy=float(energy), apex_amplitude=float(apex_amp), mode_amplitudes=u)


def solve_all(sector: ArrowheadSector, max_iter: int = 200) -> list:
    """All sector eigenpairs, ascending in energy.

    Deflated modes are not part of the arrowhead and are not included;
    they live on `sector.deflated_poles`.
    """
    lo, hi, lo_idx, hi_idx = _brackets(sector)
    roots, anchors, offsets = _solve_brackets(sector, lo, hi, lo_idx, hi_idx, max_iter)
    return [
        _assemble(sector, e, int(a), t)
        for e, a, t in zip(roots, anchors, offsets)
    ]


def solve_window(sector: ArrowheadSector, e_min: float, e_max: float, max_iter: int = 200) -> list:
    """Eigenpairs with e_min <= E <= e_max.

    Each bracket is solved independently and identically to solve_all,
    so the windowed result is bit-identical to filtering the full one.
    """
    if not e_max > e_min:
        raise ValueError("empty energy window")
    lo, hi, lo_idx, hi_idx = _brackets(sector)
    touch = (hi > e_min) & (lo < e_max)
    roots, anchors, offsets = _solve_brackets(
        sector, lo[touch], hi[touch], lo_idx[touch], hi_idx[touch], max_iter
    )
    inside = (roots >= e_min) & (roots <= e_max)
    return [
        _assemble(sector, e, int(a), t)
        for e, a, t in zip(roots[inside], anchors[inside], offsets[inside])
    ]


def dense_oracle(sector: ArrowheadSector) -> list:
    """Independent dense solve of the materialized arrowhead.

    Cyclic Jacobi; refuses dimensions above 5000 rather than silently
    grinding.  Output matches solve_all ordering and sign conventions.
    """
    if sector.dimension > _DENSE_DIM_CAP:
        raise ValueError(
            f"dense solve capped at dimension {_DENSE_DIM_CAP}, "
            f"sector has {sector.dimension}"
        )
    w, v, status = _kernels.jacobi_eigh(arrowhead_matrix(sector))
    if status != 0:
        raise ConvergenceError("Jacobi sweep cap reached before convergence")
    pairs = []
    for i in range(w.size):
        vec = v[:, i].copy()
        apex = vec[0]
        rest = vec[1:]
        flip = apex < 0.0
        if apex == 0.0:
            nz = np.flatnonzero(rest)
            flip = nz.size > 0 and rest[nz[0]] < 0.0
        if flip:
            apex = -apex
            rest = -rest
        rest.setflags(write=False)
        pairs.append(
            EigenPair(energy=float(w[i]), apex_amplitude=float(apex), mode_amplitudes=rest)
        )
    return pairs
