"""Minimal SVG line charts written as polylines (no plotting dependency)."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 64, 170, 36, 52


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    return np.linspace(lo, hi, n + 1)


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def line_chart(series: dict, title: str = "", xlabel: str = "", ylabel: str = "", ylim=None) -> str:
    """Render ``{name: (xs, ys)}`` as an SVG document string.

    Non-finite points are skipped; an empty series still yields a valid frame.
    """
    pts = {k: (np.asarray(x, float), np.asarray(y, float)) for k, (x, y) in series.items()}
    xs = np.concatenate([x for x, _ in pts.values()] or [np.zeros(0)])
    ys = np.concatenate([y for _, y in pts.values()] or [np.zeros(0)])
    fin = np.isfinite(xs) & np.isfinite(ys)
    if fin.any():
        x0, x1 = float(xs[fin].min()), float(xs[fin].max())
        y0, y1 = float(ys[fin].min()), float(ys[fin].max())
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if ylim is not None:
        y0, y1 = ylim
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2 - RIGHT / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{TOP + ph}" x2="{sx(t):.2f}" y2="{TOP + ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{LEFT - 5}" y1="{sy(t):.2f}" x2="{LEFT + pw}" y2="{sy(t):.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for i, (name, (x, y)) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(x) & np.isfinite(y)
        coords = " ".join(f"{sx(a):.2f},{sy(min(max(b, y0), y1)):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        ly = TOP + 14 + 18 * i
        out.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - RIGHT + 38}" y="{ly + 4}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series: dict, **kw) -> Path:
    path = Path(path)
    path.write_text(line_chart(series, **kw), encoding="utf-8")
    return path
