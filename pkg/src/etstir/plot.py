"""Static SVG line charts of mean coverage against time.

The SVG is assembled by hand so that output bytes depend only on the input
data (no timestamps, ids or backend-specific float formatting).
"""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .driver import CaseResult, SweepTable

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 90, 170, 30, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _curves(data) -> list:
    """Normalise the accepted inputs to ``[(label, t, coverage), ...]``."""
    if isinstance(data, SweepTable):
        rows = sorted((r for r in data.rows if r.result is not None), key=lambda r: r.value)
        return [(f"{data.axis} = {r.value:g}", r.result.series[:, 0], r.result.series[:, 1])
                for r in rows]
    if isinstance(data, CaseResult):
        return [(data.metadata.get("config", {}).get("run", {}).get("label") or "case",
                 data.series[:, 0], data.series[:, 1])]
    if isinstance(data, np.ndarray):
        s = np.asarray(data, dtype=float).reshape(len(data), -1)
        return [("case", s[:, 0], s[:, 1])]
    out = []
    for label, series in data:
        s = np.asarray(series, dtype=float)
        s = s.reshape(len(s), -1)
        out.append((str(label), s[:, 0], s[:, 1]))
    return out


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def render_svg(data, title: str = "Mean surface coverage") -> str:
    curves = [c for c in _curves(data) if len(c[1])]
    if not curves:
        raise ValueError("nothing to plot")
    t_all = np.concatenate([c[1] for c in curves])
    y_all = np.concatenate([c[2] for c in curves])
    t0, t1 = float(t_all.min()), float(t_all.max())
    y0, y1 = min(0.0, float(y_all.min())), float(y_all.max())
    if t1 <= t0:
        t1 = t0 + 1.0
    if y1 <= y0:
        y1 = y0 + (abs(y0) if y0 else 1.0)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(t):
        return LEFT + (t - t0) / (t1 - t0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">'
        f'{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(t0, t1):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:.4g}</text>')
    for y in _ticks(y0, y1):
        yy = sy(y)
        out.append(f'<line x1="{LEFT - 5}" y1="{yy:.2f}" x2="{LEFT}" y2="{yy:.2f}" '
                   'stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{yy + 4:.2f}" text-anchor="end">{y:.3e}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">'
               'time (s)</text>')
    out.append(f'<text x="20" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {TOP + ph / 2:.1f})">'
               'mean coverage (mol/m^2)</text>')
    for k, (label, t, y) in enumerate(curves):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        ly = TOP + 10 + 18 * k
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(data, path, title: str = "Mean surface coverage") -> Path:
    """Write a coverage-vs-time chart, one polyline per case.

    ``data`` may be a :class:`CaseResult`, a :class:`SweepTable` (legend
    ordered by swept value), a series array or ``[(label, series), ...]``.
    """
    path = Path(path)
    path.write_text(render_svg(data, title))
    return path
