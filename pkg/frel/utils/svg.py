"""Static SVG line plot of a family sweep: s solid, c dashed, beta + 1 on a log axis."""

from __future__ import annotations

import math
from collections.abc import Sequence
from xml.sax.saxutils import escape

from frel.models.reports import SweepRow

WIDTH = 640
HEIGHT = 400
MARGIN_LEFT = 64
MARGIN_RIGHT = 24
MARGIN_TOP = 36
MARGIN_BOTTOM = 52
Y_TICKS = 5


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _x_ticks(lo: float, hi: float) -> list[float]:
    """Betas whose beta + 1 is a power of ten inside [lo, hi] (in log10 units)."""
    first = math.ceil(lo)
    last = math.floor(hi)
    return [10.0**k - 1.0 for k in range(first, last + 1)]


def _polyline(points: list[tuple[float, float]], stroke: str, dashed: bool) -> str:
    if not points:
        return ""
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{dash} points="{coords}"/>'


def sweep_svg(
    rows: Sequence[SweepRow],
    title: str = "",
    s_label: str = "s",
    c_label: str = "c",
) -> str:
    """Deterministic SVG document for the successful rows of a sweep."""
    good = [row for row in rows if row.ok and row.s is not None and row.c is not None]
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    if good:
        xs = [math.log10(row.beta + 1.0) for row in good]
        x_lo, x_hi = min(xs), max(xs)
        y_hi = max(max(row.s for row in good), max(row.c for row in good))
    else:
        xs, x_lo, x_hi, y_hi = [], -1.0, 1.0, 1.0
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_hi = max(y_hi, 1e-12) * 1.05

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + plot_h - y / y_hi * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')

    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for beta in _x_ticks(x_lo, x_hi):
        x = px(math.log10(beta + 1.0))
        parts.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{y0 + 18}" text-anchor="middle">{beta:g}</text>')
    for i in range(Y_TICKS + 1):
        value = y_hi * i / Y_TICKS
        y = py(value)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{_fmt(y + 4)}" text-anchor="end">{value:.2f}</text>')
    parts.append(f'<text x="{x0 + plot_w // 2}" y="{HEIGHT - 12}" text-anchor="middle">beta (log scale in beta + 1)</text>')

    s_points = [(px(x), py(row.s)) for x, row in zip(xs, good, strict=True)]
    c_points = [(px(x), py(row.c)) for x, row in zip(xs, good, strict=True)]
    parts.append(_polyline(s_points, "#1f4e9c", dashed=False))
    parts.append(_polyline(c_points, "#b03a2e", dashed=True))

    legend_x = x0 + plot_w - 120
    legend_y = MARGIN_TOP + 12
    for offset, (label, stroke, dashed) in enumerate(((s_label, "#1f4e9c", False), (c_label, "#b03a2e", True))):
        y = legend_y + 18 * offset
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        parts.append(
            f'<line x1="{legend_x}" y1="{y}" x2="{legend_x + 28}" y2="{y}" stroke="{stroke}" stroke-width="1.5"{dash}/>'
        )
        parts.append(f'<text x="{legend_x + 36}" y="{y + 4}">{escape(label)}</text>')
    parts.append("</svg>")
    return "\n".join(part for part in parts if part) + "\n"
