"""Numeric kernels with two interchangeable backends.

The compiled path uses numba when it is importable; a pure numpy path
covers every kernel with identical tolerances.  Selection happens once
at import time from the DOUBLETSCOPE_BACKEND environment variable:

    auto   (default) compiled path if numba imports, numpy otherwise
    numba  require the compiled path, raise if numba is missing
    numpy  force the fallback path

DOUBLETSCOPE_THREADS, when set to a positive integer, caps the thread
count used by the parallel kernels.  Both backends are deterministic:
reruns on the same inputs produce bit-identical output regardless of
thread count.
"""

from __future__ import annotations

import os

import numpy as np

_MAX_SWEEPS = 100  # Jacobi hard cap; typical matrices converge in < 15


def _resolve_backend() -> tuple[str, object]:
    want = os.environ.get("DOUBLETSCOPE_BACKEND", "auto").strip().lower()
    if want not in ("auto", "", "numba", "numpy"):
        raise RuntimeError(
            f"DOUBLETSCOPE_BACKEND={want!r} not understood "
            "(expected auto, numba or numpy)"
        )
    if want == "numpy":
        return "numpy", None
    try:
        import numba
    except ImportError:
        if want == "numba":
            raise RuntimeError(
                "DOUBLETSCOPE_BACKEND=numba but numba is not installed"
            ) from None
        return "numpy", None
    threads = os.environ.get("DOUBLETSCOPE_THREADS", "")
    if threads.strip():
        n = int(threads)
        if n > 0:
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return "numba", numba


BACKEND, _numba = _resolve_backend()


# ---------------------------------------------------------------------------
# secular root finder
#
# One root per bracket (lo_i, hi_i); the characteristic function
#     f(E) = apex - E + sum_k g_k^2 / (E - pole_k)
# is strictly decreasing between poles, so f(lo+) > 0 > f(hi-) on every
# bracket and bisection cannot lose the root.
#
# Roots are refined in the offset coordinate t = E - pole[anchor], where
# the anchor is the bracket-edge pole on the root's side.  Interior roots
# squeezed within far less than one ulp(E) of a pole then keep full
# relative precision in their pole distance, which the eigenvector
# assembly needs: feeding it fl(E) - pole instead would lose the distance
# entirely and the residual bound with it.  The accumulation walks the
# pole list from both ends inward, largest |E - pole| first, with Kahan
# compensation, so the two backends agree to the last few ulps.


def secular_roots_numpy(apex, poles, g2, lo, hi, lo_idx, hi_idx, max_iter=200):
    """Anchored bisection, batched over brackets, run to the ulp floor.

    Returns (roots, anchors, offsets, status); see `secular_roots`.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    lo_idx = np.asarray(lo_idx, dtype=np.int64)
    hi_idx = np.asarray(hi_idx, dtype=np.int64)
    m = lo.size
    if m == 0:
        z = np.zeros(0, dtype=np.float64)
        zi = np.zeros(0, dtype=np.int64)
        return z, zi, z.copy(), zi.copy()

    def f_shifted(t, a_val):
        out = (apex - a_val) - t
        for start in range(0, poles.size, 1024):
            sl = slice(start, min(start + 1024, poles.size))
            d = t[:, None] - (poles[None, sl] - a_val[:, None])
            out = out + (g2[None, sl] / d).sum(axis=1)
        return out

    with np.errstate(divide="ignore", invalid="ignore"):
        mid = 0.5 * (lo + hi)
        ok = (mid > lo) & (mid < hi)
        f_mid = f_shifted(mid, np.zeros(m))
        up = f_mid > 0.0  # root in the upper half: anchor at the hi pole
        prefer = np.where(up, hi_idx, lo_idx)
        fallback = np.where(up, lo_idx, hi_idx)
        anchors = np.where(prefer >= 0, prefer, fallback)
        a_val = np.where(anchors >= 0, poles[np.maximum(anchors, 0)], 0.0)
        t_lo = np.where(up & ok, mid - a_val, lo - a_val)
        t_hi = np.where(~up & ok, mid - a_val, hi - a_val)
        for _ in range(max_iter):
            t_mid = 0.5 * (t_lo + t_hi)
            live = (t_mid > t_lo) & (t_mid < t_hi)
            if not live.any():
                break
            tm = t_mid[live]
            f = f_shifted(tm, a_val[live])
            pos = f > 0.0
            t_lo[live] = np.where(pos, tm, t_lo[live])
            t_hi[live] = np.where(pos, t_hi[live], tm)
    t = 0.5 * (t_lo + t_hi)
    status = ((t > t_lo) & (t < t_hi)).astype(np.int64)  # still live = cap hit
    return a_val + t, anchors, t, status


def _make_secular_numba(numba):
    njit = numba.njit

    @njit(cache=True)
    def eval_fdf(apex_s, poles, g2, a_val, t):
        # f, f', and the term magnitude scale (the evaluation noise floor),
        # at E = a_val + t; two-pointer Kahan sum, far poles first
        s = 0.0
        cs = 0.0
        ds = 0.0
        cd = 0.0
        sabs = 0.0
        i = 0
        j = poles.size - 1
        while i <= j:
            di = t - (poles[i] - a_val)
            dj = t - (poles[j] - a_val)
            if abs(di) >= abs(dj):
                d = di
                w = g2[i]
                i += 1
            else:
                d = dj
                w = g2[j]
                j -= 1
            term = w / d
            y = term - cs
            u = s + y
            cs = (u - s) - y
            s = u
            t2 = term / d
            y = t2 - cd
            u = ds + y
            cd = (u - ds) - y
            ds = u
            sabs += abs(term)
        return (apex_s - t) + s, -1.0 - ds, sabs

    @njit(cache=True)
    def roots(apex, poles, g2, lo_in, hi_in, lo_idx, hi_idx, max_iter):
        n = lo_in.size
        out = np.empty(n, dtype=np.float64)
        anchors = np.empty(n, dtype=np.int64)
        offsets = np.empty(n, dtype=np.float64)
        status = np.zeros(n, dtype=np.int64)
        for r in range(n):
            lo = lo_in[r]
            hi = hi_in[r]
            li = lo_idx[r]
            ui = hi_idx[r]
            width0 = hi - lo
            it = 0
            done = False
            # anchor at the bracket-edge pole on the root's side
            if li < 0 and ui < 0:
                anc = np.int64(-1)
                a_val = 0.0
            elif li < 0:
                anc = ui
                a_val = poles[anc]
            elif ui < 0:
                anc = li
                a_val = poles[anc]
            else:
                e_mid = 0.5 * (lo + hi)
                if e_mid <= lo or e_mid >= hi:
                    anc = li
                    a_val = poles[anc]
                else:
                    it += 1
                    fm, _, _ = eval_fdf(apex, poles, g2, 0.0, e_mid)
                    anc = ui if fm > 0.0 else li
                    a_val = poles[anc]
            apex_s = apex - a_val
            tlo = lo - a_val
            thi = hi - a_val
            t = 0.5 * (tlo + thi)
            if t <= tlo or t >= thi:
                done = True  # bracket already at the ulp floor
            # bisect down to a thousandth of the bracket
            while not done and it < max_iter:
                it += 1
                f, _, _ = eval_fdf(apex_s, poles, g2, a_val, t)
                if f > 0.0:
                    tlo = t
                elif f < 0.0:
                    thi = t
                else:
                    done = True
                    break
                if thi - tlo <= 1e-3 * width0:
                    break
                t = 0.5 * (tlo + thi)
                if t <= tlo or t >= thi:
                    done = True
                    break
            if not done:
                t = 0.5 * (tlo + thi)
                if t <= tlo or t >= thi:
                    done = True
            # Newton with the bracket as a safety net, down to the noise floor
            while not done and it < max_iter:
                it += 1
                f, fp, sabs = eval_fdf(apex_s, poles, g2, a_val, t)
                if f > 0.0:
                    tlo = t
                elif f < 0.0:
                    thi = t
                else:
                    done = True
                    break
                if abs(f) <= 4e-16 * (abs(apex_s) + abs(t) + sabs):
                    done = True  # |f| is below its own rounding noise
                    break
                t_new = t - f / fp
                if not (tlo < t_new < thi):
                    t_new = 0.5 * (tlo + thi)
                if abs(t_new - t) <= 4e-16 * abs(t_new):
                    t = t_new
                    done = True
                    break
                if t_new == t or t_new <= tlo or t_new >= thi:
                    done = True
                    break
                t = t_new
            out[r] = a_val + t
            anchors[r] = anc
            offsets[r] = t
            if not done:
                status[r] = 1
        return out, anchors, offsets, status

    return roots


# ---------------------------------------------------------------------------
# cyclic Jacobi eigensolver (the dense cross-check; shares nothing with the
# secular path above)


def jacobi_numpy(matrix, max_sweeps=_MAX_SWEEPS):
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.sqrt((a * a).sum())
    status = 1
    for _ in range(max_sweeps):
        # summed off the strict triangle: a full-minus-diagonal shortcut
        # cancels catastrophically and never reaches the threshold
        off2 = 2.0 * (np.triu(a, 1) ** 2).sum()
        if np.sqrt(off2) <= 1e-14 * fro:
            status = 0
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                diff = aqq - app
                if abs(diff) > 1e150 * (2.0 * abs(apq)):
                    t = apq / diff  # tiny angle; forming tau would overflow
                else:
                    tau = diff / (2.0 * apq)
                    t = np.sign(tau) if tau != 0 else 1.0
                    t /= abs(tau) + np.sqrt(1.0 + tau * tau)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, status


def _make_jacobi_numba(numba):
    njit = numba.njit

    @njit(cache=True)
    def jacobi(a, max_sweeps):
        n = a.shape[0]
        v = np.eye(n)
        fro = 0.0
        for i in range(n):
            for j in range(n):
                fro += a[i, j] * a[i, j]
        fro = np.sqrt(fro)
        status = 1
        for _ in range(max_sweeps):
            off2 = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    off2 += a[i, j] * a[i, j]
            if np.sqrt(2.0 * off2) <= 1e-14 * fro:
                status = 0
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    diff = aqq - app
                    if abs(diff) > 1e150 * (2.0 * abs(apq)):
                        t = apq / diff  # tiny angle; forming tau would overflow
                    else:
                        tau = diff / (2.0 * apq)
                        sgn = 1.0 if tau >= 0.0 else -1.0
                        t = sgn / (abs(tau) + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for i in range(n):
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[i, q] = s * aip + c * aiq
                    for i in range(n):
                        api = a[p, i]
                        aqi = a[q, i]
                        a[p, i] = c * api - s * aqi
                        a[q, i] = s * api + c * aqi
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        vip = v[i, p]
                        viq = v[i, q]
                        v[i, p] = c * vip - s * viq
                        v[i, q] = s * vip + c * viq
        w = np.empty(n, dtype=np.float64)
        for i in range(n):
            w[i] = a[i, i]
        return w, v, status

    return jacobi


# ---------------------------------------------------------------------------
# phase-weighted synthesis: out(x) = sum_m w_m * exp(i * scale * wav_m * x)


def phase_profile_numpy(wavenumbers, weights, scale, positions):
    out = np.zeros(positions.size, dtype=np.complex128)
    for start in range(0, wavenumbers.size, 512):
        sl = slice(start, min(start + 512, wavenumbers.size))
        ph = np.exp(
            1j * scale * positions[:, None] * wavenumbers[None, sl].astype(np.float64)
        )
        out += ph @ weights[sl]
    return out


def _make_phase_numba(numba):
    njit = numba.njit
    prange = numba.prange

    @njit(cache=True, parallel=True)
    def profile(wav, wre, wim, scale, x, out_re, out_im):
        for jx in prange(x.size):
            sr = 0.0
            cr = 0.0
            si = 0.0
            ci = 0.0
            base = scale * x[jx]
            for m in range(wav.size):
                th = base * wav[m]
                cth = np.cos(th)
                sth = np.sin(th)
                tr = wre[m] * cth - wim[m] * sth
                ti = wre[m] * sth + wim[m] * cth
                y = tr - cr
                u = sr + y
                cr = (u - sr) - y
                sr = u
                y = ti - ci
                u = si + y
                ci = (u - si) - y
                si = u
            out_re[jx] = sr
            out_im[jx] = si

    return profile


if BACKEND == "numba":
    _secular_roots_jit = _make_secular_numba(_numba)
    _jacobi_jit = _make_jacobi_numba(_numba)
    _phase_jit = _make_phase_numba(_numba)


def secular_roots(apex, poles, g2, lo, hi, lo_idx, hi_idx, max_iter=200):
    """Find the root in each bracket (lo[i], hi[i]).

    lo_idx/hi_idx give the pole index of each bracket edge, -1 when the
    edge is an outer pad rather than a pole.  Returns (roots, anchors,
    offsets, status): roots[i] == poles[anchors[i]] + offsets[i] for
    anchors[i] >= 0, with the offset carrying the root's distance to its
    anchor pole at full relative precision.  status[i] is 0 on
    convergence, nonzero when the iteration cap was reached first.
    """
    poles = np.ascontiguousarray(poles, dtype=np.float64)
    g2 = np.ascontiguousarray(g2, dtype=np.float64)
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    lo_idx = np.ascontiguousarray(lo_idx, dtype=np.int64)
    hi_idx = np.ascontiguousarray(hi_idx, dtype=np.int64)
    if BACKEND == "numba":
        return _secular_roots_jit(
            float(apex), poles, g2, lo, hi, lo_idx, hi_idx, int(max_iter)
        )
    return secular_roots_numpy(
        float(apex), poles, g2, lo, hi, lo_idx, hi_idx, int(max_iter)
    )


def jacobi_eigh(matrix):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Returns (eigenvalues, eigenvectors, status) with eigenvalues sorted
    ascending and eigenvectors in matching columns.
    """
    m = np.array(matrix, dtype=np.float64)
    m = 0.5 * (m + m.T)
    if BACKEND == "numba":
        w, v, status = _jacobi_jit(m, _MAX_SWEEPS)
    else:
        w, v, status = jacobi_numpy(m, _MAX_SWEEPS)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], int(status)


def phase_profile(wavenumbers, weights, scale, positions):
    """sum_m weights[m] . exp(i scale wavenumbers[m] x) on a position grid."""
    wav = np.ascontiguousarray(wavenumbers, dtype=np.int64)
    w = np.ascontiguousarray(weights, dtype=np.complex128)
    x = np.ascontiguousarray(positions, dtype=np.float64)
    if BACKEND == "numba":
        out_re = np.empty(x.size, dtype=np.float64)
        out_im = np.empty(x.size, dtype=np.float64)
        _phase_jit(wav, w.real.copy(), w.imag.copy(), float(scale), x, out_re, out_im)
        return out_re + 1j * out_im
    return phase_profile_numpy(wav, w, float(scale), x)
