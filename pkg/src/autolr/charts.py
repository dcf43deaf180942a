"""Minimal self-contained SVG line charts.

Just enough plotting to eyeball a comparison: one chart, several polyline
series, a legend, min/mid/max axis labels.  Output is plain text SVG built
from the data alone, so identical inputs produce identical files.
"""

from __future__ import annotations

from pathlib import Path

WIDTH = 720
HEIGHT = 440
MARGIN_LEFT = 80
MARGIN_RIGHT = 24
MARGIN_TOP = 44
MARGIN_BOTTOM = 52

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _span(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = abs(lo) if lo else 1.0
        return lo - pad, hi + pad
    return lo, hi


def line_chart(series: dict[str, list[tuple[float, float]]], title: str, path: str | Path) -> Path:
    """Render named (x, y) series to an SVG file and return its path."""
    path = Path(path)
    all_points = [pt for points in series.values() for pt in points]
    if not all_points:
        raise ValueError("line_chart needs at least one point")
    x_lo, x_hi = _span([x for x, _ in all_points])
    y_lo, y_hi = _span([y for _, y in all_points])

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444"/>',
    ]

    for frac in (0.0, 0.5, 1.0):
        y_val = y_lo + frac * (y_hi - y_lo)
        y_px = sy(y_val)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y_px:.2f}" x2="{MARGIN_LEFT + plot_w}" '
            f'y2="{y_px:.2f}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y_px + 4:.2f}" text-anchor="end">{y_val:.5g}</text>'
        )
        x_val = x_lo + frac * (x_hi - x_lo)
        x_px = sx(x_val)
        parts.append(
            f'<text x="{x_px:.2f}" y="{MARGIN_TOP + plot_h + 18}" '
            f'text-anchor="middle">{x_val:.5g}</text>'
        )

    for i, (name, points) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        legend_y = MARGIN_TOP + 14 + 16 * i
        parts.append(
            f'<line x1="{MARGIN_LEFT + plot_w - 150}" y1="{legend_y - 4}" '
            f'x2="{MARGIN_LEFT + plot_w - 130}" y2="{legend_y - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT + plot_w - 124}" y="{legend_y}">{name}</text>'
        )

    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
