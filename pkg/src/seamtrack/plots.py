"""Minimal deterministic SVG line plots.

Hand-rolled rather than a plotting library so regenerated files are
byte-identical for a given input (no timestamps, ids, or version strings).
"""

from __future__ import annotations

from typing import List, Optional, Sequence

WIDTH, HEIGHT = 640, 420
MARGIN = 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_plot_svg(series: Sequence[tuple], title: str, xlabel: str, ylabel: str,
                  ylim: Optional[tuple] = None) -> str:
    """``series`` is a list of (label, xs, ys) triples."""
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = (min(ys_all), max(ys_all)) if ylim is None else ylim
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
           f'font-family="sans-serif" font-size="15">{title}</text>']
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" '
               'fill="none" stroke="#333"/>')
    for tx in _ticks(x0, x1):
        out.append(f'<line x1="{_fmt(px(tx))}" y1="{HEIGHT - MARGIN}" '
                   f'x2="{_fmt(px(tx))}" y2="{HEIGHT - MARGIN + 5}" stroke="#333"/>')
        out.append(f'<text x="{_fmt(px(tx))}" y="{HEIGHT - MARGIN + 20}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                   f'{_fmt(tx)}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<line x1="{MARGIN - 5}" y1="{_fmt(py(ty))}" '
                   f'x2="{MARGIN}" y2="{_fmt(py(ty))}" stroke="#333"/>')
        out.append(f'<text x="{MARGIN - 9}" y="{_fmt(py(ty) + 4)}" '
                   f'text-anchor="end" font-family="sans-serif" font-size="11">'
                   f'{_fmt(ty)}</text>')
    out.append(f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">{xlabel}</text>')
    out.append(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 16 {HEIGHT // 2})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.6"/>')
        ly = MARGIN + 16 + 16 * i
        out.append(f'<line x1="{WIDTH - MARGIN - 110}" y1="{ly - 4}" '
                   f'x2="{WIDTH - MARGIN - 86}" y2="{ly - 4}" stroke="{color}" '
                   'stroke-width="1.6"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 80}" y="{ly}" '
                   f'font-family="sans-serif" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
