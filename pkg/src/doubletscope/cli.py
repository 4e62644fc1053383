"""Command line front end.

Subcommands:

    spectrum   eigenvalue and coupling tables at one emitter frequency
    scan       doublet branches across a frequency grid (CSV + SVG)
    doublet    locate the balanced point and fit the linear doublet model
    amplitude  real-space photon profile of one selected state
    validate   run the built-in cross-checks and report PASS/FAIL

Exit codes: 0 success, 64 usage, 65 bad configuration or data,
70 numerical failure.  Output files are deterministic; on failure any
partially written files are removed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import _kernels, __version__
from .config import RunConfig, parse_config
from .doublet import (
    DoubletReport,
    classify_resonances,
    find_crossing,
    fit_doublet,
    sweep,
)
from .eigensolver import dense_oracle, solve_all, solve_window
from .errors import ConfigError, NumericalError
from .model import (
    fundamental_pair,
    resonances_in_window,
    short_resonance,
)
from .observables import (
    confinement_ratio,
    emitter_probability,
    photon_amplitude,
    profile_mismatch,
    resolvent_profile,
    sector_state,
)
from .sectors import SectorLabel, build_sector, full_residual, synthetic_sector
from . import svg

EX_OK = 0
EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


class _Outputs:
    """Tracks written files so failures do not leave partial results."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.written.append(p)
        return p

    def discard(self):
        for p in self.written:
            try:
                os.remove(p)
            except OSError:
                pass

    def report(self):
        for p in self.written:
            print(f"wrote {p}")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(c) for c in row) + "\n")


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _load(args) -> RunConfig:
    return parse_config(args.config)


def _resolved_params(cfg: RunConfig, args):
    eps = getattr(args, "epsilon", None)
    return cfg.to_params(eps)


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    params = _resolved_params(cfg, args)
    out = _Outputs(args.out)
    try:
        rows = []
        coupling_rows = {}
        for label in SectorLabel:
            sec = build_sector(params, label, cfg.deflation_rel_tol)
            for pair in solve_all(sec):
                rows.append(
                    (pair.energy, label.short_name, "solved", "", pair.emitter_weight)
                )
            for k, pole in zip(sec.deflated_wavenumbers, sec.deflated_poles):
                rows.append((float(pole), label.short_name, "deflated", int(k), 0.0))
            for k, pole, g in zip(sec.wavenumbers, sec.poles, sec.couplings):
                coupling_rows.setdefault(int(k), [float(pole), 0.0, 0.0, ""])[
                    1 if label is SectorLabel.SYMMETRIC else 2
                ] = float(g)
            for k, pole in zip(sec.deflated_wavenumbers, sec.deflated_poles):
                entry = coupling_rows.setdefault(int(k), [float(pole), 0.0, 0.0, ""])
                entry[3] = label.short_name if not entry[3] else entry[3] + "+" + label.short_name
        rows.sort(key=lambda r: (r[0], r[1]))
        _write_csv(
            out.path("spectrum.csv"),
            ("energy", "sector", "kind", "k", "Pe"),
            rows,
        )
        _write_csv(
            out.path("couplings.csv"),
            ("k", "omega", "g_sym", "g_anti", "deflated"),
            [
                (k, v[0], v[1], v[2], v[3])
                for k, v in sorted(coupling_rows.items())
            ],
        )
    except BaseException:
        out.discard()
        raise
    out.report()
    return EX_OK


def cmd_scan(args) -> int:
    cfg = _load(args)
    params = cfg.to_params(cfg.epsilon_min)
    out = _Outputs(args.out)
    try:
        grid = cfg.epsilon_grid()
        rows = sweep(params, grid, cfg.window_margin)
        ladder = resonances_in_window(
            params, cfg.epsilon_min - 0.005, cfg.epsilon_max + 0.005
        )
        rows = classify_resonances(rows, ladder)
        _write_csv(
            out.path("scan.csv"),
            ("epsilon", "E_sym", "Pe_sym", "E_anti", "Pe_anti", "E_below", "E_above", "res_flags"),
            [
                (r.epsilon, r.e_sym, r.pe_sym, r.e_anti, r.pe_anti, r.e_below, r.e_above, r.res_flags)
                for r in rows
            ],
        )
        eps = np.array([r.epsilon for r in rows])
        fig = svg.Figure(
            title="doublet branches",
            xlabel="emitter frequency",
            ylabel="energy",
            series=[
                svg.Series(eps, np.array([r.e_sym for r in rows]), "symmetric", "#1f6feb"),
                svg.Series(eps, np.array([r.e_anti for r in rows]), "antisymmetric", "#d93f0b"),
                svg.Series(
                    eps, np.array([r.e_below for r in rows]), "nearest below", "#3b3b3b", width=0.9
                ),
                svg.Series(
                    eps, np.array([r.e_above for r in rows]), "nearest above", "#8b8b8b", width=0.9
                ),
            ],
            hlines=[
                svg.HLine(
                    line.energy,
                    f"{'S' if line.branch == 'short' else 'L'}{line.index}",
                    color="#a06000" if line.double else "#888888",
                    dash="2,3,8,3" if line.double else "6,3",
                )
                for line in ladder.entries
            ],
        )
        svg.write(fig, out.path("scan_energies.svg"))
        fig2 = svg.Figure(
            title="emitter weight of the doublet branches",
            xlabel="emitter frequency",
            ylabel="Pe",
            series=[
                svg.Series(eps, np.array([r.pe_sym for r in rows]), "symmetric", "#1f6feb"),
                svg.Series(eps, np.array([r.pe_anti for r in rows]), "antisymmetric", "#d93f0b"),
            ],
        )
        svg.write(fig2, out.path("scan_weights.svg"))
    except BaseException:
        out.discard()
        raise
    out.report()
    return EX_OK


def _report_lines(report: DoubletReport) -> list:
    items = [
        ("epsilon_star", report.epsilon_star),
        ("energy_cross", report.energy_cross),
        ("splitting", report.splitting),
        ("Pe_sym", report.pe_sym),
        ("Pe_anti", report.pe_anti),
        ("confinement_sym", report.confinement_sym),
        ("confinement_anti", report.confinement_anti),
        ("slope_sym", report.slope_sym),
        ("slope_anti", report.slope_anti),
        ("c_mean", report.c_mean),
        ("c_diff", report.c_diff),
        ("short_sector", report.short_sector),
        (
            "double_point",
            "none"
            if report.double_point is None
            else f"{report.double_point[0]}/{report.double_point[1]}",
        ),
        ("quasi_lo", report.quasi_lo),
        ("quasi_hi", report.quasi_hi),
        ("fit_residual_sym", report.fit_residual_sym),
        ("fit_residual_anti", report.fit_residual_anti),
        ("nonlinear_warning", "yes" if report.nonlinear_warning else "no"),
    ]
    return [f"{k} = {_cell(v)}" for k, v in items]


def cmd_doublet(args) -> int:
    cfg = _load(args)
    probe_eps = 0.5 * (cfg.epsilon_min + cfg.epsilon_max)
    params = cfg.to_params(cfg.epsilon if cfg.epsilon is not None else probe_eps)
    if params.ratio is None:
        raise ConfigError("doublet bracketing needs an exact separation ratio")
    out = _Outputs(args.out)
    try:
        nu_short, _ = fundamental_pair(params)
        center = short_resonance(params, nu_short)
        crossing = find_crossing(
            params,
            (center - cfg.crossing_halfwidth, center + cfg.crossing_halfwidth),
            cfg.window_margin,
        )
        deltas = np.linspace(-cfg.fit_halfwidth, cfg.fit_halfwidth, cfg.fit_points)
        report = fit_doublet(
            params,
            crossing,
            deltas=deltas,
            window_margin=cfg.window_margin,
            quasi_ratio=cfg.quasi_ratio,
            n_grid=max(cfg.n_grid, 2 * params.cutoff),
        )
        with open(out.path("doublet_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(_report_lines(report)) + "\n")
        rows = sweep(params, report.epsilon_star + deltas, cfg.window_margin)
        eps = np.array([r.epsilon for r in rows])
        ladder = resonances_in_window(
            params, float(eps[0]) - 0.002, float(eps[-1]) + 0.002
        )
        fig = svg.Figure(
            title="doublet branches near the balanced point",
            xlabel="emitter frequency",
            ylabel="energy",
            series=[
                svg.Series(eps, np.array([r.e_sym for r in rows]), "symmetric", "#1f6feb"),
                svg.Series(eps, np.array([r.e_anti for r in rows]), "antisymmetric", "#d93f0b"),
                svg.Series(
                    eps, np.array([r.e_below for r in rows]), "nearest below", "#3b3b3b", width=0.9
                ),
                svg.Series(
                    eps, np.array([r.e_above for r in rows]), "nearest above", "#8b8b8b", width=0.9
                ),
            ],
            hlines=[
                svg.HLine(
                    line.energy,
                    f"{'S' if line.branch == 'short' else 'L'}{line.index}",
                    color="#a06000" if line.double else "#888888",
                    dash="2,3,8,3" if line.double else "6,3",
                )
                for line in ladder.entries
            ],
            markers=[svg.Marker(report.epsilon_star, report.energy_cross, "#1a7f37", 3.0)],
        )
        svg.write(fig, out.path("doublet_zoom.svg"))
    except BaseException:
        out.discard()
        raise
    out.report()
    return EX_OK


def cmd_amplitude(args) -> int:
    cfg = _load(args)
    params = _resolved_params(cfg, args)
    out = _Outputs(args.out)
    try:
        n_grid = max(cfg.n_grid, 2 * params.cutoff)
        for label in SectorLabel:
            sec = build_sector(params, label, cfg.deflation_rel_tol)
            pairs = solve_window(
                sec, params.epsilon - cfg.window_margin, params.epsilon + cfg.window_margin
            )
            pairs.sort(key=lambda q: (-q.emitter_weight, q.energy))
            if args.rank < 1 or args.rank > len(pairs):
                raise ConfigError(
                    f"rank {args.rank} out of range: {len(pairs)} "
                    f"{label.short_name} states in window"
                )
            pair = pairs[args.rank - 1]
            state = sector_state(sec, pair, params)
            profile = photon_amplitude(state, params, n_grid)
            conf = confinement_ratio(profile, params)
            _write_csv(
                out.path(f"amplitude_{label.short_name}.csv"),
                ("x", "re", "im", "abs2"),
                [
                    (float(x), float(v.real), float(v.imag), float(abs(v) ** 2))
                    for x, v in zip(profile.positions, profile.values)
                ],
            )
            w = np.abs(profile.values) ** 2
            dx = params.length / n_grid
            j_d = min(int(round(params.spacing / dx)), n_grid - 1)
            fig = svg.Figure(
                title=(
                    f"{label.short_name} state, E = {pair.energy:.6f}, "
                    f"Pe = {pair.emitter_weight:.4f}, confinement = {conf:.4f}"
                ),
                xlabel="position on the ring",
                ylabel="|amplitude|^2",
                series=[svg.Series(profile.positions, w, "", "#1f6feb")],
                markers=[
                    svg.Marker(0.0, float(w[0])),
                    svg.Marker(float(profile.positions[j_d]), float(w[j_d])),
                ],
            )
            svg.write(fig, out.path(f"amplitude_{label.short_name}.svg"))
            print(
                f"state: sector={label.short_name} energy={pair.energy!r} "
                f"Pe={pair.emitter_weight!r} confinement={conf!r}"
            )
    except BaseException:
        out.discard()
        raise
    out.report()
    return EX_OK


def _validate_checks(cfg: RunConfig):
    params = cfg.to_params(
        cfg.epsilon if cfg.epsilon is not None else 0.5 * (cfg.epsilon_min + cfg.epsilon_max)
    )
    checks = []

    sec = {label: build_sector(params, label, cfg.deflation_rel_tol) for label in SectorLabel}
    total = sum((s.couplings**2).sum() for s in sec.values())
    k_full = np.arange(-params.cutoff, params.cutoff + 1)
    from .model import form_factor

    # one factor of the form-factor weight per emitter
    ff2 = 2.0 * (form_factor(params, k_full) ** 2).sum()
    err = abs(total - ff2) / ff2
    checks.append(("coupling sum rule", err < 1e-12, f"rel err {err:.2e}"))

    dims = sum(s.dimension for s in sec.values()) + sum(
        s.deflated_poles.size for s in sec.values()
    )
    checks.append(
        ("state count", dims == 2 * params.cutoff + 3, f"{dims} vs {2 * params.cutoff + 3}")
    )

    win = (params.epsilon - cfg.window_margin, params.epsilon + cfg.window_margin)
    worst_res = 0.0
    worst_mis = 0.0
    for label in SectorLabel:
        for pair in solve_window(sec[label], *win):
            state = sector_state(sec[label], pair, params)
            worst_res = max(worst_res, full_residual(params, state.vector, pair.energy))
            if pair.emitter_weight > 0.05:
                prof = photon_amplitude(state, params, max(cfg.n_grid, 2 * params.cutoff))
                ref = resolvent_profile(state, params, max(cfg.n_grid, 2 * params.cutoff))
                worst_mis = max(worst_mis, profile_mismatch(prof, ref))
    checks.append(("full-basis residual", worst_res < 1e-10, f"max {worst_res:.2e}"))
    checks.append(("amplitude route agreement", worst_mis < 1e-8, f"max {worst_mis:.2e}"))

    n_small = min(48, sec[SectorLabel.SYMMETRIC].poles.size)
    small = synthetic_sector(
        params.epsilon,
        sec[SectorLabel.SYMMETRIC].poles[:n_small],
        sec[SectorLabel.SYMMETRIC].couplings[:n_small],
    )
    es = np.array([p.energy for p in solve_all(small)])
    eo = np.array([p.energy for p in dense_oracle(small)])
    scale = max(1.0, np.abs(eo).max())
    derr = np.abs(es - eo).max() / scale
    checks.append(("secular vs dense eigenvalues", derr < 1e-12, f"rel err {derr:.2e}"))

    step = 1e-7
    pairs0 = solve_window(sec[SectorLabel.SYMMETRIC], *win)
    if pairs0:
        mid = max(pairs0, key=lambda p: p.emitter_weight)
        import dataclasses as _dc

        from .model import params_key as _pk

        p_up = params.with_epsilon(params.epsilon + step)
        sec_up = _dc.replace(sec[SectorLabel.SYMMETRIC], apex=p_up.epsilon, key=_pk(p_up))
        up = solve_window(sec_up, *win)
        match = min(up, key=lambda p: abs(p.energy - mid.energy))
        hf = abs((match.energy - mid.energy) / step - mid.emitter_weight)
        checks.append(
            ("weight equals frequency sensitivity", hf < 1e-5, f"gap {hf:.2e}")
        )
    return checks


def cmd_validate(args) -> int:
    cfg = _load(args)
    checks = _validate_checks(cfg)
    failed = False
    print(f"backend: {_kernels.BACKEND}")
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed = failed or not ok
    if failed:
        raise NumericalError("validation checks failed")
    return EX_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="doubletscope", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"doubletscope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, epsilon=False, rank=False):
        p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        if epsilon:
            p.add_argument("--epsilon", type=float, default=None, help="emitter frequency")
        if rank:
            p.add_argument(
                "--rank",
                type=int,
                default=1,
                help="state rank by emitter weight within the window (1 = highest)",
            )

    p = sub.add_parser("spectrum", help="eigenvalue and coupling tables at one frequency")
    common(p, epsilon=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan", help="sweep the doublet across a frequency grid")
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("doublet", help="balanced point and linear doublet model")
    common(p)
    p.set_defaults(func=cmd_doublet)

    p = sub.add_parser("amplitude", help="photon profile of one selected state")
    common(p, epsilon=True, rank=True)
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("validate", help="run built-in cross-checks")
    common(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"doubletscope: {exc}", file=sys.stderr)
        return EX_USAGE
    except (ConfigError, ValueError) as exc:
        print(f"doubletscope: {exc}", file=sys.stderr)
        return EX_DATAERR
    except NumericalError as exc:
        print(f"doubletscope: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
