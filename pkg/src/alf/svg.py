"""Minimal static SVG line plots (no plotting dependency).

Output is plot data for offline viewing; formatting is fixed-precision so
identical inputs produce identical bytes.
"""

from __future__ import annotations

import math

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
)

_WIDTH, _HEIGHT = 840, 520
_MARGIN = 56


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def timeseries_svg(times, series, labels, log_time: bool = False, title: str = "") -> str:
    """Polyline plot of several series against time.

    With `log_time` the horizontal axis is log10(t); non-positive times are
    dropped from the plot in that mode.
    """
    ts = [float(t) for t in times]
    cols = [[float(v) for v in col] for col in series]
    if log_time:
        keep = [i for i, t in enumerate(ts) if t > 0.0]
        ts = [math.log10(ts[i]) for i in keep]
        cols = [[col[i] for i in keep] for col in cols]
    if not ts:
        ts = [0.0, 1.0]
        cols = [[0.0, 0.0] for _ in cols]

    x_lo, x_hi = min(ts), max(ts)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    flat = [v for col in cols for v in col] or [0.0]
    y_lo, y_hi = min(flat), max(flat)
    if y_hi == y_lo:
        y_hi, y_lo = y_lo + 0.5, y_lo - 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(t: float) -> float:
        return _MARGIN + (t - x_lo) / (x_hi - x_lo) * (_WIDTH - 2 * _MARGIN)

    def py(v: float) -> float:
        return _HEIGHT - _MARGIN - (v - y_lo) / (y_hi - y_lo) * (_HEIGHT - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="{_MARGIN - 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    axis_label = "log10(t)" if log_time else "t"
    parts.append(
        f'<text x="{_WIDTH / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{axis_label}</text>'
    )
    for tv in _ticks(x_lo, x_hi):
        x = px(tv)
        parts.append(f'<line x1="{x:.2f}" y1="{_HEIGHT - _MARGIN}" x2="{x:.2f}" '
                     f'y2="{_HEIGHT - _MARGIN + 5}" stroke="#333"/>')
        parts.append(f'<text x="{x:.2f}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{_fmt(tv)}</text>')
    for vv in _ticks(y_lo, y_hi):
        y = py(vv)
        parts.append(f'<line x1="{_MARGIN - 5}" y1="{y:.2f}" x2="{_MARGIN}" y2="{y:.2f}" stroke="#333"/>')
        parts.append(f'<text x="{_MARGIN - 8}" y="{y + 3:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{_fmt(vv)}</text>')

    for idx, (col, label) in enumerate(zip(cols, labels)):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in zip(ts, col))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.3"/>')
        ly = _MARGIN + 14 + 13 * idx
        parts.append(f'<line x1="{_WIDTH - _MARGIN - 70}" y1="{ly - 4}" '
                     f'x2="{_WIDTH - _MARGIN - 50}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_WIDTH - _MARGIN - 45}" y="{ly}" font-family="sans-serif" '
                     f'font-size="10">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
