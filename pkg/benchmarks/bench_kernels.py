"""Benchmark the compiled kernels against their pure numpy twins.

Runs the three hot paths (secular root finding, Jacobi diagonalization,
phase synthesis) on representative sizes with both implementations and
reports wall times plus the worst disagreement.  The compiled path is
exercised only when numba is importable.

    python benchmarks/bench_kernels.py [--cutoff 2000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from doubletscope import SectorLabel, SystemParams, build_sector
from doubletscope import _kernels


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_secular(params, repeat):
    sec = build_sector(params, SectorLabel.SYMMETRIC)
    g2 = sec.couplings * sec.couplings
    pad = sec.coupling_norm() + 1e-6 * max(1.0, sec.apex, sec.poles[-1])
    bounds = np.concatenate(
        [[min(sec.apex, sec.poles[0]) - pad], sec.poles, [max(sec.apex, sec.poles[-1]) + pad]]
    )
    lo, hi = bounds[:-1], bounds[1:]
    n = sec.poles.size
    lo_idx = np.arange(n + 1, dtype=np.int64) - 1
    hi_idx = np.arange(n + 1, dtype=np.int64)
    hi_idx[-1] = -1
    print(f"secular roots: {lo.size} brackets, {n} poles")
    t_np, (r_np, _, _, _) = _time(
        lambda: _kernels.secular_roots_numpy(
            sec.apex, sec.poles, g2, lo, hi, lo_idx, hi_idx
        ),
        repeat,
    )
    print(f"  numpy  {t_np * 1e3:9.1f} ms")
    if _kernels.BACKEND == "numba":
        fn = lambda: _kernels._secular_roots_jit(
            sec.apex, sec.poles, g2, lo, hi, lo_idx, hi_idx, 200
        )
        fn()  # compile outside the timer
        t_nb, (r_nb, _, _, _) = _time(fn, repeat)
        print(f"  numba  {t_nb * 1e3:9.1f} ms   speedup x{t_np / t_nb:.1f}")
        print(f"  max |diff| {np.abs(r_np - r_nb).max():.2e}")


def bench_jacobi(repeat, n=140):
    rng = np.random.default_rng(7)
    m = rng.normal(size=(n, n))
    m = 0.5 * (m + m.T)
    print(f"jacobi eigh: {n}x{n}")
    t_np, (w_np, _, _) = _time(lambda: _kernels.jacobi_numpy(m.copy()), repeat)
    print(f"  numpy  {t_np * 1e3:9.1f} ms")
    if _kernels.BACKEND == "numba":
        fn = lambda: _kernels._jacobi_jit(m.copy(), 100)
        fn()
        t_nb, (w_nb, _, _) = _time(fn, repeat)
        print(f"  numba  {t_nb * 1e3:9.1f} ms   speedup x{t_np / t_nb:.1f}")
        print(f"  max |diff| {np.abs(np.sort(w_np) - np.sort(w_nb)).max():.2e}")


def bench_phase(params, repeat, n_grid=4096):
    rng = np.random.default_rng(11)
    k = np.arange(-params.cutoff, params.cutoff + 1, dtype=np.int64)
    w = rng.normal(size=k.size) + 1j * rng.normal(size=k.size)
    x = np.arange(n_grid) * (params.length / n_grid)
    scale = 2.0 * np.pi / params.length
    print(f"phase synthesis: {k.size} modes x {n_grid} points")
    t_np, out_np = _time(lambda: _kernels.phase_profile_numpy(k, w, scale, x), repeat)
    print(f"  numpy  {t_np * 1e3:9.1f} ms")
    if _kernels.BACKEND == "numba":
        def fn():
            out_re = np.empty(x.size)
            out_im = np.empty(x.size)
            _kernels._phase_jit(k, w.real.copy(), w.imag.copy(), scale, x, out_re, out_im)
            return out_re + 1j * out_im

        fn()
        t_nb, out_nb = _time(fn, repeat)
        print(f"  numba  {t_nb * 1e3:9.1f} ms   speedup x{t_np / t_nb:.1f}")
        print(f"  max |diff| {np.abs(out_np - out_nb).max():.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--cutoff", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"backend selected by env: {_kernels.BACKEND}")
    params = SystemParams.from_pi_multiples(1e-4, 1.008, 40, 8, args.cutoff)
    bench_secular(params, args.repeat)
    bench_jacobi(args.repeat)
    bench_phase(params, args.repeat)


if __name__ == "__main__":
    main()
