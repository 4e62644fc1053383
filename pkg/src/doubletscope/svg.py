"""Tiny deterministic SVG line plots.

Hand-emitted markup, fixed decimal formatting, no timestamps and no
randomness: the same data always serializes to the same bytes, which
makes plot files diffable and safe to regression-test by hash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PALETTE = ("#1f6feb", "#d93f0b", "#3b3b3b", "#8250df", "#1a7f37", "#bf3989")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    color: str = ""
    dash: str = ""  # e.g. "6,3"; empty for solid
    width: float = 1.5


@dataclass
class HLine:
    y: float
    label: str = ""
    color: str = "#888888"
    dash: str = "6,3"


@dataclass
class Marker:
    x: float
    y: float
    color: str = "#ff8c00"
    radius: float = 4.0


@dataclass
class Figure:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    series: list = field(default_factory=list)
    hlines: list = field(default_factory=list)
    markers: list = field(default_factory=list)
    width: int = 720
    height: int = 460


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick_values(lo: float, hi: float, target: int = 5) -> list:
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render(fig: Figure) -> str:
    """Serialize a figure to SVG text."""
    ml, mr, mt, mb = 64, 16, 28 if fig.title else 12, 44
    pw = fig.width - ml - mr
    ph = fig.height - mt - mb

    xs = [np.asarray(s.x, dtype=float) for s in fig.series]
    ys = [np.asarray(s.y, dtype=float) for s in fig.series]
    finite_x = np.concatenate([x[np.isfinite(x)] for x in xs]) if xs else np.array([0.0, 1.0])
    all_y = [y[np.isfinite(y)] for y in ys]
    all_y.append(np.array([h.y for h in fig.hlines], dtype=float))
    finite_y = np.concatenate(all_y) if all_y else np.array([0.0, 1.0])
    if finite_x.size == 0:
        finite_x = np.array([0.0, 1.0])
    if finite_y.size == 0:
        finite_y = np.array([0.0, 1.0])
    x0, x1 = float(finite_x.min()), float(finite_x.max())
    y0, y1 = float(finite_y.min()), float(finite_y.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ypad = 0.05 * (y1 - y0)
    y0, y1 = y0 - ypad, y1 + ypad

    def px(v):
        return ml + pw * (v - x0) / (x1 - x0)

    def py(v):
        return mt + ph * (1.0 - (v - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fig.width}" '
        f'height="{fig.height}" viewBox="0 0 {fig.width} {fig.height}">',
        f'<rect width="{fig.width}" height="{fig.height}" fill="#ffffff"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444444" stroke-width="1"/>',
    ]
    if fig.title:
        parts.append(
            f'<text x="{fig.width // 2}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{_esc(fig.title)}</text>'
        )
    for tv in _tick_values(x0, x1):
        tx = px(tv)
        parts.append(
            f'<line x1="{_fmt(tx)}" y1="{mt + ph}" x2="{_fmt(tx)}" '
            f'y2="{mt + ph + 4}" stroke="#444444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(tx)}" y="{mt + ph + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{tv:g}</text>'
        )
    for tv in _tick_values(y0, y1):
        ty = py(tv)
        parts.append(
            f'<line x1="{ml - 4}" y1="{_fmt(ty)}" x2="{ml}" y2="{_fmt(ty)}" '
            f'stroke="#444444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{ml - 7}" y="{_fmt(ty + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{tv:g}</text>'
        )
    if fig.xlabel:
        parts.append(
            f'<text x="{ml + pw // 2}" y="{fig.height - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_esc(fig.xlabel)}</text>'
        )
    if fig.ylabel:
        yc = mt + ph // 2
        parts.append(
            f'<text x="14" y="{yc}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11" transform="rotate(-90 14 {yc})">{_esc(fig.ylabel)}</text>'
        )

    for hl in fig.hlines:
        if not (y0 <= hl.y <= y1):
            continue
        ty = py(hl.y)
        dash = f' stroke-dasharray="{hl.dash}"' if hl.dash else ""
        parts.append(
            f'<line x1="{ml}" y1="{_fmt(ty)}" x2="{ml + pw}" y2="{_fmt(ty)}" '
            f'stroke="{hl.color}" stroke-width="1"{dash}/>'
        )
        if hl.label:
            parts.append(
                f'<text x="{ml + pw - 4}" y="{_fmt(ty - 3)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="9" fill="{hl.color}">'
                f"{_esc(hl.label)}</text>"
            )

    legend_items = []
    for i, s in enumerate(fig.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        good = np.isfinite(x) & np.isfinite(y)
        # split runs at gaps so NaNs break the line instead of bridging it
        runs = np.split(np.arange(x.size), np.flatnonzero(~good))
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        for run in runs:
            run = run[good[run]]
            if run.size < 2:
                continue
            pts = " ".join(f"{_fmt(px(x[j]))},{_fmt(py(y[j]))}" for j in run)
            parts.append(
                f'<polyline fill="none" stroke="{color}" '
                f'stroke-width="{s.width:g}"{dash} points="{pts}"/>'
            )
        if s.label:
            legend_items.append((s.label, color))

    for mk in fig.markers:
        parts.append(
            f'<circle cx="{_fmt(px(mk.x))}" cy="{_fmt(py(mk.y))}" '
            f'r="{mk.radius:g}" fill="{mk.color}" stroke="#663300" stroke-width="0.8"/>'
        )

    for i, (label, color) in enumerate(legend_items):
        ly = mt + 14 + 14 * i
        parts.append(
            f'<line x1="{ml + 8}" y1="{ly - 3}" x2="{ml + 28}" y2="{ly - 3}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{ml + 33}" y="{ly}" font-family="sans-serif" '
            f'font-size="10">{_esc(label)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write(fig: Figure, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(fig))
