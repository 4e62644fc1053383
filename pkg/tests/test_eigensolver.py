import math

import numpy as np
import pytest

from doubletscope import (
    ConvergenceError,
    PoleHitError,
    SectorLabel,
    arrowhead_matrix,
    build_sector,
    dense_oracle,
    secular_value,
    solve_all,
    solve_window,
    synthetic_sector,
)
from doubletscope._kernels import BACKEND

from conftest import random_arrowhead


def residual(sector, pair):
    a, u, e = pair.apex_amplitude, pair.mode_amplitudes, pair.energy
    r0 = (sector.apex - e) * a + float(sector.couplings @ u)
    rk = sector.couplings * a + (sector.poles - e) * u
    return math.sqrt(r0 * r0 + float(rk @ rk))


def test_two_by_two_analytic():
    sec = synthetic_sector(1.0, [2.0], [0.3])
    pairs = solve_all(sec)
    assert abs(pairs[0].energy - 0.9169048105154699) < 5e-16
    assert abs(pairs[1].energy - 2.08309518948453) < 2e-15
    for p in pairs:
        assert residual(sec, p) < 1e-15


def test_symmetric_avoided_crossing():
    # apex degenerate with the single pole: exact splitting +-g
    sec = synthetic_sector(1.2, [1.2], [0.001])
    pairs = solve_all(sec)
    assert abs(pairs[0].energy - 1.199) < 1e-14
    assert abs(pairs[1].energy - 1.201) < 1e-14
    for p in pairs:
        assert abs(p.apex_amplitude - 1.0 / math.sqrt(2.0)) < 1e-12


def test_no_couplings_at_all():
    sec = synthetic_sector(0.7, np.zeros(0), np.zeros(0))
    pairs = solve_all(sec)
    assert len(pairs) == 1
    assert abs(pairs[0].energy - 0.7) < 1e-15
    assert pairs[0].apex_amplitude == 1.0


def test_secular_value_signs_and_pole_hit():
    sec = synthetic_sector(2.0, [1.0, 2.0, 3.0], [0.1, 0.2, 0.3])
    assert secular_value(sec, 1.0 + 1e-9) > 0.0
    assert secular_value(sec, 2.0 - 1e-9) < 0.0
    assert secular_value(sec, -50.0) > 0.0
    assert secular_value(sec, 50.0) < 0.0
    with pytest.raises(PoleHitError):
        secular_value(sec, 2.0)


def test_random_arrowheads_against_dense_and_lapack():
    rng = np.random.default_rng(20240811)
    for trial in range(40):
        sec = random_arrowhead(rng, tiny_couplings=(trial % 10 == 9))
        pairs = solve_all(sec)
        n = sec.dimension
        assert len(pairs) == n
        e = np.array([p.energy for p in pairs])
        scale = max(1.0, float(np.abs(arrowhead_matrix(sec)).sum(axis=1).max()))

        # strict interlacing with the poles
        assert (np.diff(e) > 0).all()
        assert (e[:-1] < sec.poles).all() and (e[1:] > sec.poles).all()

        # independent rotation-based solve
        d = dense_oracle(sec)
        e_dense = np.array([p.energy for p in d])
        assert np.abs(e - e_dense).max() <= 1e-12 * scale

        # third opinion from the stock dense solver
        e_ref = np.linalg.eigvalsh(arrowhead_matrix(sec))
        assert np.abs(e - e_ref).max() <= 1e-12 * scale

        v = np.empty((n, n))
        for j, p in enumerate(pairs):
            v[0, j] = p.apex_amplitude
            v[1:, j] = p.mode_amplitudes
            assert residual(sec, p) <= 1e-12 * max(1.0, abs(p.energy))
        gram = v.T @ v - np.eye(n)
        assert np.abs(gram).max() <= 1e-10

        # completeness: the apex row of an orthogonal matrix has unit norm
        total = sum(p.emitter_weight for p in pairs)
        assert abs(total - 1.0) <= 1e-12


def test_root_pinned_to_pole_stays_sane():
    # the weakly coupled pole traps a root a sub-ulp distance below it;
    # the reported energy must stay on the correct side of the pole
    sec = synthetic_sector(3.0, [1.0, 2.0], [1e-9, 0.4])
    pairs = solve_all(sec)
    low = pairs[0]
    assert low.energy < 1.0
    assert 1.0 - low.energy <= 3e-16
    norm = low.apex_amplitude**2 + float(low.mode_amplitudes @ low.mode_amplitudes)
    assert abs(norm - 1.0) < 1e-12
    assert residual(sec, low) <= 1e-12
    assert abs(low.mode_amplitudes[0]) > 0.999
    assert 1.0 < pairs[1].energy < 2.0


def test_eigenvalues_monotone_in_apex():
    rng = np.random.default_rng(5)
    sec = random_arrowhead(rng, n=25)
    delta = 0.37
    shifted = synthetic_sector(sec.apex + delta, sec.poles, sec.couplings)
    e0 = np.array([p.energy for p in solve_all(sec)])
    e1 = np.array([p.energy for p in solve_all(shifted)])
    assert (e1 - e0 >= -1e-13).all()
    assert (e1 - e0 <= delta + 1e-13).all()


def test_window_matches_filtered_full_solve(toy_params):
    sec = build_sector(toy_params, SectorLabel.SYMMETRIC)
    full = solve_all(sec)
    e_min, e_max = 1.004, 1.03
    windowed = solve_window(sec, e_min, e_max)
    wanted = [p for p in full if e_min <= p.energy <= e_max]
    assert len(windowed) == len(wanted) > 3
    for a, b in zip(windowed, wanted):
        assert a.energy == b.energy
        assert a.apex_amplitude == b.apex_amplitude
        assert np.array_equal(a.mode_amplitudes, b.mode_amplitudes)
    with pytest.raises(ValueError):
        solve_window(sec, 1.01, 1.01)
    assert solve_window(sec, 100.0, 200.0) == []


def test_iteration_cap_reported(toy_params):
    sec = build_sector(toy_params, SectorLabel.SYMMETRIC)
    with pytest.raises(ConvergenceError):
        solve_all(sec, max_iter=3)


def test_dense_dimension_guard():
    n = 5001
    sec = synthetic_sector(0.5, np.linspace(1.0, 2.0, n), np.full(n, 1e-3))
    with pytest.raises(ValueError):
        dense_oracle(sec)


def test_deflated_modes_not_solved(toy_params):
    anti = build_sector(toy_params, SectorLabel.ANTISYMMETRIC)
    pairs = solve_all(anti)
    assert len(pairs) == anti.dimension
    e = np.array([p.energy for p in pairs])
    # deflated poles host no root of this arrowhead
    for om in anti.deflated_poles[:5]:
        assert np.abs(e - om).min() > 1e-6


@pytest.mark.skipif(BACKEND != "numba", reason="compiled backend not active")
def test_backend_twins_agree(toy_params):
    from doubletscope import _kernels
    from doubletscope.eigensolver import _brackets

    sec = build_sector(toy_params, SectorLabel.SYMMETRIC)
    lo, hi, li, ui = _brackets(sec)
    g2 = sec.couplings * sec.couplings
    r_nb, a_nb, t_nb, s_nb = _kernels._secular_roots_jit(
        sec.apex, sec.poles, g2, lo, hi, li, ui, 200
    )
    r_np, a_np, t_np, s_np = _kernels.secular_roots_numpy(
        sec.apex, sec.poles, g2, lo, hi, li, ui, 200
    )
    assert not s_nb.any() and not s_np.any()
    assert np.array_equal(a_nb, a_np)
    assert np.abs(r_nb - r_np).max() <= 1e-13 * max(1.0, np.abs(r_np).max())
    rel_t = np.abs(t_nb - t_np) / np.maximum(np.abs(t_np), 1e-300)
    assert rel_t.max() <= 1e-10

    rng = np.random.default_rng(11)
    m = rng.normal(size=(40, 40))
    m = 0.5 * (m + m.T)
    w_nb, v_nb, st_nb = _kernels._jacobi_jit(m.copy(), 100)
    w_np, v_np, st_np = _kernels.jacobi_numpy(m.copy(), 100)
    assert st_nb == 0 and st_np == 0
    assert np.abs(np.sort(w_nb) - np.sort(w_np)).max() < 1e-12

    wav = np.arange(-30, 31, dtype=np.int64)
    weights = (rng.normal(size=61) + 1j * rng.normal(size=61)).astype(np.complex128)
    x = np.linspace(0.0, 5.0, 101)
    out_re = np.empty(x.size)
    out_im = np.empty(x.size)
    _kernels._phase_jit(wav, weights.real.copy(), weights.imag.copy(), 0.3, x, out_re, out_im)
    ref = _kernels.phase_profile_numpy(wav, weights, 0.3, x)
    assert np.abs((out_re + 1j * out_im) - ref).max() < 1e-12
