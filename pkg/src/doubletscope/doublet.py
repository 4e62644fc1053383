"""Doublet tracking across an emitter-frequency scan.

At each emitter frequency the state carrying the highest emitter weight
in each sector is taken as that sector's doublet branch; branches are
recomputed from scratch at every frequency, never continued, so a branch
identity switch shows up as a jump instead of being papered over.  The
balanced point is where the two branch energies cross; around it the
branch energies are fitted linearly and the splitting is compared
against the distance to every other eigenvalue.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BranchJumpError, CrossingBracketError, NumericalError
from .eigensolver import EigenPair, solve_window
from .model import (
    ResonanceLadder,
    SystemParams,
    fundamental_pair,
    params_key,
    resonances_in_window,
)
from .observables import confinement_ratio, photon_amplitude, sector_state
from .sectors import ArrowheadSector, SectorLabel, build_sector, resonance_sector

DEFAULT_WINDOW_MARGIN = 0.006
DEFAULT_FIT_HALFWIDTH = 1e-3
DEFAULT_FIT_POINTS = 21
DEFAULT_QUASI_RATIO = 10.0


@dataclass(frozen=True)
class ScanRow:
    epsilon: float
    e_sym: float
    pe_sym: float
    e_anti: float
    pe_anti: float
    e_below: float
    e_above: float
    res_flags: str = ""


@dataclass(frozen=True)
class DoubletCrossing:
    epsilon: float
    pair_sym: EigenPair
    pair_anti: EigenPair

    @property
    def splitting(self) -> float:
        return abs(self.pair_sym.energy - self.pair_anti.energy)

    @property
    def energy(self) -> float:
        return 0.5 * (self.pair_sym.energy + self.pair_anti.energy)


@dataclass(frozen=True)
class DoubletReport:
    epsilon_star: float
    energy_cross: float
    splitting: float
    pe_sym: float
    pe_anti: float
    confinement_sym: float
    confinement_anti: float
    slope_sym: float
    slope_anti: float
    c_mean: float
    c_diff: float
    short_sector: str
    double_point: Optional[tuple]  # (short index, long index) or None
    quasi_lo: float
    quasi_hi: float
    fit_residual_sym: float
    fit_residual_anti: float
    nonlinear_warning: bool


class _SectorCache:
    """Rebuild-free retuning: couplings do not depend on epsilon."""

    def __init__(self, params: SystemParams):
        self.base = params
        self._sectors = {
            label: build_sector(params, label) for label in SectorLabel
        }

    def at(self, epsilon: float) -> tuple:
        p = self.base.with_epsilon(epsilon)
        key = params_key(p)
        out = {}
        for label, sec in self._sectors.items():
            out[label] = dataclasses.replace(sec, apex=float(epsilon), key=key)
        return p, out


def _pick_best(pairs: list) -> tuple:
    """Highest emitter weight; ties resolved toward the lower energy."""
    if not pairs:
        raise NumericalError("no eigenvalues inside the search window")
    weights = np.array([p.emitter_weight for p in pairs])
    top = weights.max()
    tied = np.flatnonzero(weights == top)
    return pairs[int(tied[0])], tied.size > 1


@dataclass(frozen=True)
class _WindowView:
    pairs: dict  # label -> list[EigenPair], ascending energy
    best: dict  # label -> EigenPair
    tie: dict  # label -> bool
    deflated: np.ndarray  # deflated pole energies inside the window

    def other_energies(self) -> np.ndarray:
        """Every windowed eigenvalue except the two branch members."""
        out = []
        for label in SectorLabel:
            chosen = self.best[label]
            out.extend(p.energy for p in self.pairs[label] if p is not chosen)
        return np.sort(np.concatenate([np.array(out, dtype=np.float64), self.deflated]))

    def isolation_gap(self) -> float:
        others = self.other_energies()
        if others.size == 0:
            return math.inf
        gaps = [
            np.abs(others - self.best[label].energy).min() for label in SectorLabel
        ]
        return float(min(gaps))


def _window_view(sectors: dict, epsilon: float, margin: float) -> _WindowView:
    lo, hi = epsilon - margin, epsilon + margin
    pairs = {}
    best = {}
    tie = {}
    deflated = []
    for label, sec in sectors.items():
        pairs[label] = solve_window(sec, lo, hi)
        best[label], tie[label] = _pick_best(pairs[label])
        dp = sec.deflated_poles
        deflated.append(dp[(dp >= lo) & (dp <= hi)])
    return _WindowView(
        pairs=pairs, best=best, tie=tie, deflated=np.concatenate(deflated)
    )


def best_in_window(
    params: SystemParams,
    label: SectorLabel,
    window_margin: float = DEFAULT_WINDOW_MARGIN,
) -> tuple:
    """Doublet branch member of one sector: (eigenpair, tie_flag)."""
    cache = _SectorCache(params)
    _, sectors = cache.at(params.epsilon)
    view = _window_view(sectors, params.epsilon, window_margin)
    return view.best[label], view.tie[label]


def sweep(
    params: SystemParams,
    epsilons,
    window_margin: float = DEFAULT_WINDOW_MARGIN,
) -> list:
    """One ScanRow per emitter frequency, in the given order.

    Rows are independent of each other; res_flags stay empty here and
    are filled by classify_resonances.
    """
    cache = _SectorCache(params)
    rows = []
    for eps in np.asarray(epsilons, dtype=np.float64):
        _, sectors = cache.at(eps)
        view = _window_view(sectors, eps, window_margin)
        bs = view.best[SectorLabel.SYMMETRIC]
        ba = view.best[SectorLabel.ANTISYMMETRIC]
        others = view.other_energies()
        lo_edge = min(bs.energy, ba.energy)
        hi_edge = max(bs.energy, ba.energy)
        below = others[others < lo_edge]
        above = others[others > hi_edge]
        flags = []
        if view.tie[SectorLabel.SYMMETRIC]:
            flags.append("tie~sym")
        if view.tie[SectorLabel.ANTISYMMETRIC]:
            flags.append("tie~anti")
        rows.append(
            ScanRow(
                epsilon=float(eps),
                e_sym=bs.energy,
                pe_sym=bs.emitter_weight,
                e_anti=ba.energy,
                pe_anti=ba.emitter_weight,
                e_below=float(below[-1]) if below.size else math.nan,
                e_above=float(above[0]) if above.size else math.nan,
                res_flags=";".join(flags),
            )
        )
    return rows


def find_crossing(
    params: SystemParams,
    bracket: tuple,
    window_margin: float = DEFAULT_WINDOW_MARGIN,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> DoubletCrossing:
    """Locate the emitter frequency where the two branch energies meet.

    Bisection on the signed branch gap.  The bracket endpoints must
    produce opposite signs; if the bracket collapses while the gap is
    still above tol the tracked branch changed identity discontinuously
    somewhere inside, which is reported rather than returned.
    """
    cache = _SectorCache(params)

    def gap_at(eps: float) -> tuple:
        _, sectors = cache.at(eps)
        view = _window_view(sectors, eps, window_margin)
        bs = view.best[SectorLabel.SYMMETRIC]
        ba = view.best[SectorLabel.ANTISYMMETRIC]
        return bs.energy - ba.energy, bs, ba

    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ValueError("bracket must satisfy lo < hi")
    g_lo, bs, ba = gap_at(lo)
    g_hi, _, _ = gap_at(hi)
    if abs(g_lo) <= tol:
        return DoubletCrossing(epsilon=lo, pair_sym=bs, pair_anti=ba)
    if g_lo * g_hi > 0.0:
        raise CrossingBracketError(
            f"branch gap does not change sign on [{lo}, {hi}]: "
            f"{g_lo:.3e} and {g_hi:.3e}"
        )
    best = (abs(g_lo), lo, bs, ba)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid, bs, ba = gap_at(mid)
        if abs(g_mid) < best[0]:
            best = (abs(g_mid), mid, bs, ba)
        if abs(g_mid) <= tol:
            return DoubletCrossing(epsilon=mid, pair_sym=bs, pair_anti=ba)
        if (g_mid > 0.0) == (g_lo > 0.0):
            lo = mid
        else:
            hi = mid
    raise BranchJumpError(
        f"bracket collapsed at epsilon={best[1]!r} with branch gap "
        f"{best[0]:.3e} still above {tol:.1e}; a branch switched identity"
    )


def isolation_profile(
    params: SystemParams,
    epsilons,
    window_margin: float = DEFAULT_WINDOW_MARGIN,
) -> tuple:
    """(splitting, gap to nearest other eigenvalue) along a frequency grid."""
    cache = _SectorCache(params)
    eps = np.asarray(epsilons, dtype=np.float64)
    split = np.empty(eps.size)
    gap = np.empty(eps.size)
    for i, e in enumerate(eps):
        _, sectors = cache.at(e)
        view = _window_view(sectors, e, window_margin)
        bs = view.best[SectorLabel.SYMMETRIC]
        ba = view.best[SectorLabel.ANTISYMMETRIC]
        split[i] = abs(bs.energy - ba.energy)
        gap[i] = view.isolation_gap()
    return split, gap


def _fixed_intercept_slope(deltas: np.ndarray, energies: np.ndarray, e0: float) -> tuple:
    """Least squares slope of E(delta) through (0, e0); returns (slope, resid)."""
    s = float((deltas * (energies - e0)).sum() / (deltas * deltas).sum())
    resid = float(np.abs(energies - (e0 + s * deltas)).max())
    return s, resid


def fit_doublet(
    params: SystemParams,
    crossing: DoubletCrossing,
    deltas=None,
    window_margin: float = DEFAULT_WINDOW_MARGIN,
    quasi_ratio: float = DEFAULT_QUASI_RATIO,
    n_grid: Optional[int] = None,
) -> DoubletReport:
    """Linear model of the two branches around the balanced point.

    The fit grid must stay inside the quasi-degenerate window for the
    linear model to be honest; the report carries a warning flag when
    the residuals say otherwise.  Slopes are repackaged as mean and
    half-difference, with the half-difference signed so the branch
    confined on the short arc carries +c_diff.
    """
    if deltas is None:
        deltas = np.linspace(-DEFAULT_FIT_HALFWIDTH, DEFAULT_FIT_HALFWIDTH, DEFAULT_FIT_POINTS)
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.size < 3:
        raise ValueError("need at least three fit offsets")
    if not (np.diff(deltas) > 0).all():
        raise ValueError("fit offsets must be strictly increasing")
    if not (deltas[0] <= 0.0 <= deltas[-1]):
        raise ValueError("fit offsets must straddle zero")

    eps_star = crossing.epsilon
    e_cross = crossing.energy
    cache = _SectorCache(params)
    e_s = np.empty(deltas.size)
    e_a = np.empty(deltas.size)
    split = np.empty(deltas.size)
    gap = np.empty(deltas.size)
    for i, dl in enumerate(deltas):
        _, sectors = cache.at(eps_star + dl)
        view = _window_view(sectors, eps_star + dl, window_margin)
        bs = view.best[SectorLabel.SYMMETRIC]
        ba = view.best[SectorLabel.ANTISYMMETRIC]
        e_s[i] = bs.energy
        e_a[i] = ba.energy
        split[i] = abs(bs.energy - ba.energy)
        gap[i] = view.isolation_gap()

    slope_sym, resid_sym = _fixed_intercept_slope(deltas, e_s, e_cross)
    slope_anti, resid_anti = _fixed_intercept_slope(deltas, e_a, e_cross)
    warn = bool(
        resid_sym > 1e-3 * (e_s.max() - e_s.min())
        or resid_anti > 1e-3 * (e_a.max() - e_a.min())
    )

    # quasi-degenerate window: contiguous run around delta = 0 where the
    # splitting stays a factor quasi_ratio under the isolation gap
    ok = split <= gap / quasi_ratio
    i0 = int(np.argmin(np.abs(deltas)))
    lo_i = i0
    while lo_i > 0 and ok[lo_i - 1]:
        lo_i -= 1
    hi_i = i0
    while hi_i < deltas.size - 1 and ok[hi_i + 1]:
        hi_i += 1
    if not ok[i0]:
        lo_i = hi_i = i0

    if params.ratio is not None:
        nu_short, nu_long = fundamental_pair(params)
        ladder = resonances_in_window(params, e_cross - 0.02, e_cross + 0.02)
        if ladder.double_points:
            dps = ladder.double_points
            nearest = min(dps, key=lambda dp: abs(dp.energy - e_cross))
            nu_short, nu_long = nearest.short_index, nearest.long_index
        double_point = (nu_short, nu_long)
        short_sector = resonance_sector(nu_short)
    else:
        double_point = None
        short_sector = SectorLabel.SYMMETRIC  # undefined; report as mean only

    if short_sector is SectorLabel.SYMMETRIC:
        c_diff = 0.5 * (slope_sym - slope_anti)
    else:
        c_diff = 0.5 * (slope_anti - slope_sym)

    p_star, sectors = cache.at(eps_star)
    grid = n_grid if n_grid is not None else max(4096, 2 * params.cutoff)
    conf = {}
    for label, pair in (
        (SectorLabel.SYMMETRIC, crossing.pair_sym),
        (SectorLabel.ANTISYMMETRIC, crossing.pair_anti),
    ):
        state = sector_state(sectors[label], pair, p_star)
        conf[label] = confinement_ratio(photon_amplitude(state, p_star, grid), p_star)

    return DoubletReport(
        epsilon_star=eps_star,
        energy_cross=e_cross,
        splitting=crossing.splitting,
        pe_sym=crossing.pair_sym.emitter_weight,
        pe_anti=crossing.pair_anti.emitter_weight,
        confinement_sym=conf[SectorLabel.SYMMETRIC],
        confinement_anti=conf[SectorLabel.ANTISYMMETRIC],
        slope_sym=slope_sym,
        slope_anti=slope_anti,
        c_mean=0.5 * (slope_sym + slope_anti),
        c_diff=c_diff,
        short_sector=(
            short_sector.short_name if double_point is not None else "undefined"
        ),
        double_point=double_point,
        quasi_lo=eps_star + float(deltas[lo_i]),
        quasi_hi=eps_star + float(deltas[hi_i]),
        fit_residual_sym=resid_sym,
        fit_residual_anti=resid_anti,
        nonlinear_warning=warn,
    )


def _resonance_marks(ladder: ResonanceLadder) -> list:
    """Distinct resonance energies with token text and member parities."""
    doubled_short = {dp.short_index: dp for dp in ladder.double_points}
    doubled_long = {dp.long_index for dp in ladder.double_points}
    marks = []
    for line in ladder.entries:
        if line.branch == "long" and line.index in doubled_long:
            continue  # reported with its short partner
        if line.branch == "short" and line.index in doubled_short:
            dp = doubled_short[line.index]
            token = f"S{dp.short_index}+L{dp.long_index}*"
            sectors = {resonance_sector(dp.short_index), resonance_sector(dp.long_index)}
        else:
            token = f"{'S' if line.branch == 'short' else 'L'}{line.index}"
            sectors = {resonance_sector(line.index)}
        marks.append((line.energy, token, sectors))
    return marks


def classify_resonances(rows: list, ladder: ResonanceLadder) -> list:
    """Annotate scan rows where a branch crosses a resonance energy.

    A crossing between two consecutive rows is flagged on the later row.
    Tokens look like "sym~L5" or "anti~S2+L3*"; a trailing "?" marks a
    crossing whose resonance parity does not match the branch's sector.
    """
    marks = _resonance_marks(ladder)
    out = list(rows)
    for i in range(1, len(out)):
        prev, cur = out[i - 1], out[i]
        flags = [cur.res_flags] if cur.res_flags else []
        for label, e_prev, e_cur in (
            (SectorLabel.SYMMETRIC, prev.e_sym, cur.e_sym),
            (SectorLabel.ANTISYMMETRIC, prev.e_anti, cur.e_anti),
        ):
            for energy, token, sectors in marks:
                lo, hi = sorted((e_prev, e_cur))
                if lo <= energy <= hi:
                    suffix = "" if label in sectors else "?"
                    flags.append(f"{label.short_name}~{token}{suffix}")
        merged = ";".join(flags)
        if merged != cur.res_flags:
            out[i] = dataclasses.replace(cur, res_flags=merged)
    return out
