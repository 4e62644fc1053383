"""Reflection-adapted sector reduction.

Swapping the two emitters and sending every running wave k to -k (with
the phase convention anchored midway between the emitters) commutes
with the Hamiltonian, so the single-excitation space splits into a
symmetric and an antisymmetric sector.  Each sector is a real
arrowhead: one apex row (the emitter combination at energy epsilon)
coupled to one pole per surviving standing-wave mode.

Modes whose standing-wave weight at the emitters vanishes decouple
("deflated"); they stay exact eigenstates at their bare frequency and
are carried separately, keeping the arrowheads strictly positive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams, form_factor, mode_frequency, params_key


class SectorLabel(enum.Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"

    @property
    def short_name(self) -> str:
        return "sym" if self is SectorLabel.SYMMETRIC else "anti"


def resonance_sector(half_waves: int) -> SectorLabel:
    """Sector hosting an arc resonance with the given half-wave count.

    Holds for both arcs: an odd count puts the standing wave's antinodes
    symmetrically about the arc midpoint.
    """
    if half_waves < 1:
        raise ValueError("half-wave count must be at least 1")
    return SectorLabel.SYMMETRIC if half_waves % 2 == 1 else SectorLabel.ANTISYMMETRIC


@dataclass(frozen=True)
class ArrowheadSector:
    """One sector reduced to its real arrowhead form.

    `couplings` are nonnegative; the regauge signs that made them so are
    kept in `signs` and reapplied when a sector vector is embedded back
    into the full basis.
    """

    label: SectorLabel
    apex: float
    wavenumbers: np.ndarray  # kept k >= 0, ascending
    poles: np.ndarray
    couplings: np.ndarray
    signs: np.ndarray
    deflated_wavenumbers: np.ndarray
    deflated_poles: np.ndarray
    key: str

    @property
    def dimension(self) -> int:
        return int(self.poles.size) + 1

    def coupling_norm(self) -> float:
        return float(np.sqrt((self.couplings * self.couplings).sum()))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def build_sector(
    params: SystemParams,
    label: SectorLabel,
    deflation_rel_tol: float = 1e-14,
) -> ArrowheadSector:
    """Reduce one reflection sector of the given geometry.

    With an exact separation ratio d/L = p/q the decoupled modes are
    found by integer arithmetic; otherwise couplings below
    deflation_rel_tol relative to the largest one are dropped.
    """
    k = np.arange(0, params.cutoff + 1, dtype=np.int64)
    om = mode_frequency(params, k)
    ff = form_factor(params, k)
    half_phase = math.pi * params.separation_ratio * k

    if label is SectorLabel.SYMMETRIC:
        raw = 2.0 * ff * np.cos(half_phase)
        raw[0] = math.sqrt(2.0) * ff[0]  # k = 0 mode pairs with itself
    else:
        raw = 2.0 * ff * np.sin(half_phase)

    if params.ratio is not None:
        p = params.ratio.numerator
        q = params.ratio.denominator
        if label is SectorLabel.SYMMETRIC:
            # cos(pi k p / q) == 0  exactly
            dead = (2 * k * p - q) % (2 * q) == 0
        else:
            # sin(pi k p / q) == 0  exactly
            dead = (k * p) % q == 0
    else:
        dead = np.abs(raw) < deflation_rel_tol * np.abs(raw).max()

    if label is SectorLabel.ANTISYMMETRIC:
        dead = dead.copy()
        dead[0] = True  # k = 0 has no antisymmetric partner

    keep = ~dead
    if label is SectorLabel.ANTISYMMETRIC:
        dead = dead.copy()
        dead[0] = False  # absent, not a photon eigenstate of this sector

    signs = np.where(raw[keep] >= 0.0, 1, -1).astype(np.int8)
    return ArrowheadSector(
        label=label,
        apex=params.epsilon,
        wavenumbers=_freeze(k[keep].copy()),
        poles=_freeze(om[keep].copy()),
        couplings=_freeze(np.abs(raw[keep])),
        signs=_freeze(signs),
        deflated_wavenumbers=_freeze(k[dead].copy()),
        deflated_poles=_freeze(om[dead].copy()),
        key=params_key(params),
    )


def synthetic_sector(
    apex: float,
    poles,
    couplings,
    label: SectorLabel = SectorLabel.SYMMETRIC,
) -> ArrowheadSector:
    """Arrowhead with hand-picked entries, for tests and benchmarks."""
    poles = np.asarray(poles, dtype=np.float64)
    couplings = np.asarray(couplings, dtype=np.float64)
    if poles.ndim != 1 or poles.shape != couplings.shape:
        raise ValueError("poles and couplings must be matching 1-d arrays")
    if poles.size > 1 and not (np.diff(poles) > 0).all():
        raise ValueError("poles must be strictly increasing")
    if (couplings < 0).any():
        raise ValueError("couplings must be nonnegative")
    n = poles.size
    return ArrowheadSector(
        label=label,
        apex=float(apex),
        wavenumbers=_freeze(np.arange(1, n + 1, dtype=np.int64)),
        poles=_freeze(poles.copy()),
        couplings=_freeze(couplings.copy()),
        signs=_freeze(np.ones(n, dtype=np.int8)),
        deflated_wavenumbers=_freeze(np.zeros(0, dtype=np.int64)),
        deflated_poles=_freeze(np.zeros(0, dtype=np.float64)),
        key="synthetic",
    )


def arrowhead_matrix(sector: ArrowheadSector) -> np.ndarray:
    """Materialize the sector as a dense symmetric matrix."""
    n = sector.dimension
    mat = np.zeros((n, n), dtype=np.float64)
    mat[0, 0] = sector.apex
    mat[0, 1:] = sector.couplings
    mat[1:, 0] = sector.couplings
    mat[np.arange(1, n), np.arange(1, n)] = sector.poles
    return mat


def _check_key(sector: ArrowheadSector, params: SystemParams):
    if sector.key != params_key(params):
        raise ValueError("sector was built from different parameters")


def _mode_slots(params: SystemParams, k: np.ndarray) -> tuple:
    # full basis order: emitter 1, emitter 2, modes -K..K
    return 2 + params.cutoff + k, 2 + params.cutoff - k


def embed_full(
    sector: ArrowheadSector,
    apex_amplitude: float,
    mode_amplitudes: np.ndarray,
    params: SystemParams,
) -> np.ndarray:
    """Lift a sector vector to the full basis [e1, e2, modes -K..K].

    Inverts the regauge signs and the half-phase rotation that made the
    arrowhead real, so the output solves the full problem whenever the
    input solves the sector one.
    """
    _check_key(sector, params)
    mode_amplitudes = np.asarray(mode_amplitudes, dtype=np.float64)
    if mode_amplitudes.shape != sector.poles.shape:
        raise ValueError("mode amplitude count does not match the sector")
    dim = 2 * params.cutoff + 3
    out = np.zeros(dim, dtype=np.complex128)
    k = sector.wavenumbers
    half_phase = math.pi * params.separation_ratio * k
    rot = np.exp(-1j * half_phase)
    up, dn = _mode_slots(params, k)
    if sector.label is SectorLabel.SYMMETRIC:
        out[0] = apex_amplitude / math.sqrt(2.0)
        out[1] = apex_amplitude / math.sqrt(2.0)
        w = sector.signs * mode_amplitudes / math.sqrt(2.0)
        has_zero = k.size > 0 and k[0] == 0
        out[up] += w * rot
        out[dn] += w * np.conj(rot)
        if has_zero:
            out[2 + params.cutoff] = sector.signs[0] * mode_amplitudes[0]
    else:
        out[0] = apex_amplitude / math.sqrt(2.0)
        out[1] = -apex_amplitude / math.sqrt(2.0)
        w = 1j * sector.signs * mode_amplitudes / math.sqrt(2.0)
        out[up] += w * rot
        out[dn] -= w * np.conj(rot)
    return out


def embed_deflated(sector: ArrowheadSector, wavenumber: int, params: SystemParams) -> np.ndarray:
    """Full-basis eigenvector of a decoupled mode pair of this sector."""
    _check_key(sector, params)
    if wavenumber not in sector.deflated_wavenumbers:
        raise ValueError(f"mode {wavenumber} is not deflated in this sector")
    dim = 2 * params.cutoff + 3
    out = np.zeros(dim, dtype=np.complex128)
    phase = np.exp(-1j * math.pi * params.separation_ratio * wavenumber)
    up = 2 + params.cutoff + wavenumber
    dn = 2 + params.cutoff - wavenumber
    if sector.label is SectorLabel.SYMMETRIC:
        out[up] += phase / math.sqrt(2.0)
        out[dn] += np.conj(phase) / math.sqrt(2.0)
    else:
        out[up] += 1j * phase / math.sqrt(2.0)
        out[dn] -= 1j * np.conj(phase) / math.sqrt(2.0)
    return out


def full_residual(params: SystemParams, vector: np.ndarray, energy: float) -> float:
    """2-norm of (H - E by) applied to a full-basis vector, in O(K) work.

    Uses the untransformed Hamiltonian, so it is an independent check on
    everything the sector reduction did.
    """
    vector = np.asarray(vector, dtype=np.complex128)
    dim = 2 * params.cutoff + 3
    if vector.shape != (dim,):
        raise ValueError(f"expected a vector of length {dim}")
    k_full = np.arange(-params.cutoff, params.cutoff + 1, dtype=np.int64)
    om = mode_frequency(params, k_full)
    ff = form_factor(params, k_full)
    phase = np.exp(1j * 2.0 * math.pi * params.separation_ratio * k_full)
    a1, a2 = vector[0], vector[1]
    modes = vector[2:]
    r = np.empty(dim, dtype=np.complex128)
    r[0] = (params.epsilon - energy) * a1 + (ff * modes).sum()
    r[1] = (params.epsilon - energy) * a2 + (ff * phase * modes).sum()
    r[2:] = (om - energy) * modes + ff * (a1 + a2 * np.conj(phase))
    return float(np.linalg.norm(r))
