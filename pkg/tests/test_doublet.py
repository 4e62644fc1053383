import math

import numpy as np
import pytest

from doubletscope import build_sector, solve_all
from doubletscope.doublet import (
    best_in_window,
    classify_resonances,
    find_crossing,
    fit_doublet,
    isolation_profile,
    sweep,
)
from doubletscope.errors import BranchJumpError, CrossingBracketError
from doubletscope.model import resonances_in_window
from doubletscope.sectors import SectorLabel

SQRT65_OVER_8 = 1.0077822185373186


@pytest.fixture(scope="module")
def crossing(mid_params):
    return find_crossing(mid_params, (1.0072, 1.0082))


@pytest.fixture(scope="module")
def narrow_report(mid_params, crossing):
    # fit grid well inside the quasi-degenerate window, where the
    # branches are linear enough for the slopes to mean something
    return fit_doublet(mid_params, crossing, deltas=np.linspace(-1e-4, 1e-4, 21))


@pytest.fixture(scope="module")
def default_report(mid_params, crossing):
    return fit_doublet(mid_params, crossing)


def test_crossing_location(crossing):
    assert 1.0072 <= crossing.epsilon <= 1.0082
    assert crossing.splitting <= 1e-13
    assert abs(crossing.energy - SQRT65_OVER_8) < 1e-6
    assert crossing.splitting == abs(crossing.pair_sym.energy - crossing.pair_anti.energy)
    assert crossing.energy == 0.5 * (crossing.pair_sym.energy + crossing.pair_anti.energy)
    assert 0.0 < crossing.pair_anti.emitter_weight < crossing.pair_sym.emitter_weight < 1.0


def test_no_sign_change_bracket_rejected(mid_params):
    with pytest.raises(CrossingBracketError):
        find_crossing(mid_params, (1.02, 1.03))
    with pytest.raises(ValueError):
        find_crossing(mid_params, (1.008, 1.008))


def test_branch_identity_jump_detected(mid_params):
    # inside this bracket the tracked branch hops to a different state,
    # so the gap changes sign without the branches actually meeting
    with pytest.raises(BranchJumpError):
        find_crossing(mid_params, (1.0100, 1.0115))


def test_fit_slopes_match_emitter_weight(narrow_report):
    rep = narrow_report
    assert abs(rep.slope_sym - rep.pe_sym) <= 1e-3
    assert abs(rep.slope_anti - rep.pe_anti) <= 1e-3
    assert rep.c_mean == 0.5 * (rep.slope_sym + rep.slope_anti)
    assert rep.c_diff == 0.5 * (rep.slope_sym - rep.slope_anti)
    assert rep.c_diff > 0.0


def test_fit_report_fields(crossing, default_report):
    rep = default_report
    assert rep.double_point == (1, 4)
    assert rep.short_sector == "sym"
    assert rep.quasi_lo <= crossing.epsilon <= rep.quasi_hi
    assert rep.confinement_sym > 0.85
    assert rep.confinement_anti < 0.15
    # over the default +-1e-3 grid the curvature is already visible
    assert rep.nonlinear_warning


def test_fit_offsets_validation(mid_params, crossing):
    with pytest.raises(ValueError):
        fit_doublet(mid_params, crossing, deltas=[0.0, 1e-4])
    with pytest.raises(ValueError):
        fit_doublet(mid_params, crossing, deltas=[1e-4, 0.0, -1e-4])
    with pytest.raises(ValueError):
        fit_doublet(mid_params, crossing, deltas=[1e-4, 2e-4, 3e-4])


def test_energy_slope_equals_emitter_weight(mid_params):
    # first-order response of a branch energy to the emitter frequency
    # is exactly the branch's emitter weight
    h = 1e-7
    for label in SectorLabel:
        b0, _ = best_in_window(mid_params, label)
        bp, _ = best_in_window(mid_params.with_epsilon(mid_params.epsilon + h), label)
        bm, _ = best_in_window(mid_params.with_epsilon(mid_params.epsilon - h), label)
        fd = (bp.energy - bm.energy) / (2.0 * h)
        assert abs(fd - b0.emitter_weight) <= 1e-5


def test_best_in_window_matches_global_best(mid_params):
    for label in SectorLabel:
        chosen, tie = best_in_window(mid_params, label)
        pairs = solve_all(build_sector(mid_params, label))
        top = max(pairs, key=lambda q: q.emitter_weight)
        assert chosen.energy == top.energy
        assert chosen.emitter_weight == top.emitter_weight
        assert tie is False


def test_isolation_profile(mid_params, crossing):
    eps = crossing.epsilon + np.linspace(-5e-4, 5e-4, 5)
    split, gap = isolation_profile(mid_params, eps)
    assert split.shape == gap.shape == (5,)
    assert (split >= 0.0).all() and (gap > 0.0).all()
    assert int(np.argmin(split)) == 2
    assert (gap >= 10.0 * split).all()


def test_sweep_rows(mid_params):
    grid = np.linspace(1.0072, 1.0082, 5)
    rows = sweep(mid_params, grid)
    assert [r.epsilon for r in rows] == list(grid)
    for r in rows:
        assert 0.0 < r.pe_anti < 1.0 and 0.0 < r.pe_sym < 1.0
        lo = min(r.e_sym, r.e_anti)
        hi = max(r.e_sym, r.e_anti)
        assert math.isnan(r.e_below) or r.e_below < lo
        assert math.isnan(r.e_above) or r.e_above > hi
        assert r.res_flags == ""
    # rows are pointwise in epsilon: a refined grid reproduces coarse
    # rows bit for bit
    assert sweep(mid_params, [rows[2].epsilon])[0] == rows[2]


def test_resonance_classification(mid_params):
    rows = sweep(mid_params, np.linspace(1.0072, 1.0202, 40))
    ladder = resonances_in_window(mid_params, 1.0, 1.022)
    tagged = classify_resonances(rows, ladder)
    tokens = set()
    for r in tagged:
        if r.res_flags:
            tokens.update(r.res_flags.split(";"))
    # the doubled line is flagged on both branches; single lines carry a
    # "?" when the branch parity cannot actually couple to them
    assert {
        "sym~S1+L4*",
        "anti~S1+L4*",
        "sym~L5",
        "anti~L5?",
        "anti~L6",
        "sym~L6?",
    } <= tokens
