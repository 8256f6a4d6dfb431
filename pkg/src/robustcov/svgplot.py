"""Minimal dependency-free SVG line plots (log-log) for scaling curves."""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Sequence, Tuple

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]

Series = Tuple[str, Sequence[float], Sequence[float]]


def _decades(lo: float, hi: float) -> List[float]:
    if lo <= 0.0:
        lo = 1e-12
    start = math.floor(math.log10(lo))
    stop = math.ceil(math.log10(hi))
    return [10.0**e for e in range(start, stop + 1)]


def line_plot_svg(
    series: Sequence[Series],
    xlabel: str,
    ylabel: str,
    title: str = "",
) -> str:
    """Render log-log polylines; returns the SVG document as a string."""
    pts = [
        (x, y)
        for _, xs, ys in series
        for x, y in zip(xs, ys)
        if x > 0.0 and y > 0.0 and math.isfinite(x) and math.isfinite(y)
    ]
    if not pts:
        pts = [(1.0, 1.0)]
    xlo, xhi = min(p[0] for p in pts), max(p[0] for p in pts)
    ylo, yhi = min(p[1] for p in pts), max(p[1] for p in pts)
    if xlo == xhi:
        xlo, xhi = xlo / 2.0, xhi * 2.0
    if ylo == yhi:
        ylo, yhi = ylo / 2.0, yhi * 2.0

    def sx(x: float) -> float:
        f = (math.log10(x) - math.log10(xlo)) / (math.log10(xhi) - math.log10(xlo))
        return MARGIN_L + f * (WIDTH - MARGIN_L - MARGIN_R)

    def sy(y: float) -> float:
        f = (math.log10(y) - math.log10(ylo)) / (math.log10(yhi) - math.log10(ylo))
        return HEIGHT - MARGIN_B - f * (HEIGHT - MARGIN_T - MARGIN_B)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for t in _decades(xlo, xhi):
        if xlo <= t <= xhi:
            out.append(
                f'<line x1="{sx(t):.1f}" y1="{y0}" x2="{sx(t):.1f}" y2="{y0 + 5}" stroke="black"/>'
                f'<text x="{sx(t):.1f}" y="{y0 + 18}" text-anchor="middle" font-size="11">{t:g}</text>'
            )
    for t in _decades(ylo, yhi):
        if ylo <= t <= yhi:
            out.append(
                f'<line x1="{x0 - 5}" y1="{sy(t):.1f}" x2="{x0}" y2="{sy(t):.1f}" stroke="black"/>'
                f'<text x="{x0 - 8}" y="{sy(t) + 4:.1f}" text-anchor="end" font-size="11">{t:g}</text>'
            )
    out.append(
        f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2})">{ylabel}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        path = " ".join(
            f"{sx(x):.1f},{sy(y):.1f}"
            for x, y in zip(xs, ys)
            if x > 0.0 and y > 0.0 and math.isfinite(y)
        )
        if path:
            out.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        ly = MARGIN_T + 14 + 16 * i
        out.append(
            f'<line x1="{x1 - 120}" y1="{ly - 4}" x2="{x1 - 100}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
            f'<text x="{x1 - 95}" y="{ly}" font-size="11">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(path, series: Sequence[Series], xlabel: str, ylabel: str, title: str = "") -> None:
    Path(path).write_text(line_plot_svg(series, xlabel, ylabel, title))
