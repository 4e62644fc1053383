"""Full-basis states and the observables reported on them.

A sector eigenpair is lifted back to the full single-excitation basis
[emitter 1, emitter 2, modes -K..K]; from there everything observable
is a plain functional of the vector.  The photon amplitude on the ring
is built twice on purpose: once by summing the state's own mode
coefficients and once from the emitter amplitudes through the resolvent,
which knows nothing about the sector machinery.  Agreement between the
two is the cheapest end-to-end check the package has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import NumericalError, UndefinedConfinementError
from .eigensolver import EigenPair
from .model import SystemParams, mode_frequency, params_key
from .sectors import ArrowheadSector, SectorLabel, embed_deflated, embed_full


@dataclass(frozen=True)
class SingleExcitationState:
    energy: float
    vector: np.ndarray  # complex amplitudes [e1, e2, modes -K..K]
    label: Optional[SectorLabel]
    key: str

    @property
    def emitter_amplitudes(self) -> tuple:
        return complex(self.vector[0]), complex(self.vector[1])

    def mode_coefficients(self) -> np.ndarray:
        return self.vector[2:]


@dataclass(frozen=True)
class AmplitudeProfile:
    """Photon amplitude sampled on a uniform ring grid (endpoint excluded)."""

    positions: np.ndarray
    values: np.ndarray
    energy: float
    key: str

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def sector_state(
    sector: ArrowheadSector, pair: EigenPair, params: SystemParams
) -> SingleExcitationState:
    """Embed a solved sector eigenpair into the full basis."""
    vec = embed_full(sector, pair.apex_amplitude, pair.mode_amplitudes, params)
    vec.setflags(write=False)
    return SingleExcitationState(
        energy=pair.energy, vector=vec, label=sector.label, key=sector.key
    )


def deflated_state(
    sector: ArrowheadSector, wavenumber: int, params: SystemParams
) -> SingleExcitationState:
    """Exact eigenstate of a decoupled standing-wave mode."""
    vec = embed_deflated(sector, wavenumber, params)
    vec.setflags(write=False)
    idx = int(np.flatnonzero(sector.deflated_wavenumbers == wavenumber)[0])
    return SingleExcitationState(
        energy=float(sector.deflated_poles[idx]),
        vector=vec,
        label=sector.label,
        key=sector.key,
    )


def emitter_probability(state: SingleExcitationState) -> float:
    """Probability of finding the excitation on either emitter."""
    a1, a2 = state.emitter_amplitudes
    return abs(a1) ** 2 + abs(a2) ** 2


def _ring_grid(params: SystemParams, n_grid: int) -> np.ndarray:
    return np.arange(n_grid, dtype=np.float64) * (params.length / n_grid)


def photon_amplitude(
    state: SingleExcitationState, params: SystemParams, n_grid: int = 4096
) -> AmplitudeProfile:
    """Real-space photon amplitude from the state's mode coefficients.

    Needs n_grid >= 2*cutoff so the grid resolves every mode present.
    """
    if state.key != params_key(params):
        raise ValueError("state was built from different parameters")
    if n_grid < 2 * params.cutoff:
        raise ValueError(
            f"n_grid={n_grid} cannot resolve modes up to k={params.cutoff}"
        )
    x = _ring_grid(params, n_grid)
    k_full = np.arange(-params.cutoff, params.cutoff + 1, dtype=np.int64)
    vals = _kernels.phase_profile(
        k_full, state.mode_coefficients(), 2.0 * math.pi / params.length, x
    )
    vals = vals / math.sqrt(params.length)
    vals.setflags(write=False)
    x.setflags(write=False)
    return AmplitudeProfile(positions=x, values=vals, energy=state.energy, key=state.key)


def resolvent_profile(
    state: SingleExcitationState, params: SystemParams, n_grid: int = 4096
) -> AmplitudeProfile:
    """Photon amplitude rebuilt from the emitter amplitudes alone.

    Treats the emitters as point sources at the state's energy and sums
    the driven response of every mode.  Up to one overall constant this
    must reproduce photon_amplitude for any true eigenstate; it uses
    none of the sector bookkeeping, so disagreement flags a bug there.
    """
    if state.key != params_key(params):
        raise ValueError("state was built from different parameters")
    a1, a2 = state.emitter_amplitudes
    k_full = np.arange(-params.cutoff, params.cutoff + 1, dtype=np.int64)
    om = mode_frequency(params, k_full)
    theta = 2.0 * math.pi * params.separation_ratio * k_full
    denom = state.energy - om
    if np.abs(denom).min() < 1e-12 * np.abs(om).max():
        raise NumericalError("resolvent profile undefined on top of a bare mode")
    pref = math.sqrt(2.0 * math.pi * params.gamma) / params.length
    weights = pref * (a1 + a2 * np.exp(-1j * theta)) / (np.sqrt(om) * denom)
    x = _ring_grid(params, n_grid)
    vals = _kernels.phase_profile(k_full, weights, 2.0 * math.pi / params.length, x)
    vals.setflags(write=False)
    x.setflags(write=False)
    return AmplitudeProfile(positions=x, values=vals, energy=state.energy, key=state.key)


def profile_mismatch(reference: AmplitudeProfile, other: AmplitudeProfile) -> float:
    """Largest pointwise gap after the best global complex rescale.

    Returns max|ref - s*other| / max|ref| with s chosen by least squares,
    so profiles equal up to normalization and global phase score ~0.
    """
    a = reference.values
    b = other.values
    bb = float(np.vdot(b, b).real)
    if bb == 0.0:
        raise ValueError("cannot rescale an identically zero profile")
    peak = float(np.abs(a).max())
    if peak == 0.0:
        raise ValueError("reference profile is identically zero")
    s = np.vdot(b, a) / bb
    return float(np.abs(a - s * b).max() / peak)


def _trapezoid(y: np.ndarray, dx: float) -> float:
    return float(0.5 * dx * (y[:-1] + y[1:]).sum())


def confinement_ratio(profile: AmplitudeProfile, params: SystemParams) -> float:
    """Fraction of the photon weight sitting on the arc between emitters.

    Trapezoid quadrature of |amplitude|^2 over [0, spacing] against the
    whole ring, with the cell containing the far emitter split linearly.
    """
    if profile.key != params_key(params):
        raise ValueError("profile was built from different parameters")
    w = np.abs(profile.values) ** 2
    n = w.size
    dx = params.length / n
    w_closed = np.concatenate([w, w[:1]])  # wrap the ring
    total = _trapezoid(w_closed, dx)
    if total <= 0.0:
        raise UndefinedConfinementError("state carries no photon weight")
    d = params.spacing
    j = int(d // dx)
    inner = _trapezoid(w_closed[: j + 1], dx) if j >= 1 else 0.0
    frac = d - j * dx
    if frac > 0.0:
        w_at_d = w_closed[j] + (w_closed[j + 1] - w_closed[j]) * (frac / dx)
        inner += 0.5 * frac * (w_closed[j] + w_at_d)
    return float(inner / total)
