"""Self-contained SVG line charts; output is a pure function of the data."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = (60, 20, 30, 50)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], *,
               title: str = "", xlabel: str = "", ylabel: str = "", step: bool = False,
               log_y: bool = False, vlines: Sequence[float] = ()) -> str:
    """SVG document plotting ``(label, xs, ys)`` series on shared axes.

    Non-finite points are skipped. ``step`` draws a zero-order hold,
    ``log_y`` plots ``log10 |y|``.
    """
    def ty(y):
        if log_y:
            return math.log10(abs(y)) if y != 0 else -math.inf
        return y

    pts = [[(float(x), ty(float(y))) for x, y in zip(xs, ys)] for _, xs, ys in series]
    finite = [(x, y) for s in pts for x, y in s if math.isfinite(x) and math.isfinite(y)]
    if not finite:
        raise ValueError("nothing finite to plot")
    x0, x1 = min(p[0] for p in finite), max(p[0] for p in finite)
    y0, y1 = min(p[1] for p in finite), max(p[1] for p in finite)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(sx(t))}" y="{top + ph + 15}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        label = _fmt(10**t) if log_y else _fmt(t)
        out.append(f'<text x="{left - 5}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{label}</text>')
    for v in vlines:
        if x0 <= v <= x1:
            out.append(f'<line x1="{_fmt(sx(v))}" y1="{top}" x2="{_fmt(sx(v))}" y2="{top + ph}" '
                       'stroke="gray" stroke-dasharray="4 3"/>')
    for i, ((label, _, _), s) in enumerate(zip(series, pts)):
        color = PALETTE[i % len(PALETTE)]
        coords = []
        prev = None
        for x, y in s:
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if step and prev is not None:
                coords.append(f"{_fmt(sx(x))},{_fmt(sy(prev))}")
            coords.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
            prev = y
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{" ".join(coords)}"/>')
        out.append(f'<text x="{left + 10}" y="{top + 15 + 14 * i}" fill="{color}">{escape(label)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(text: str, path) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def sweep_chart(result, a: float | None = None) -> str:
    marks = [math.log2(a)] if a else []
    return line_chart([("success fraction", result.capacities, result.fractions)],
                      title="Stabilization vs capacity", xlabel="capacity (bits/step)",
                      ylabel="fraction with |X[end]| within threshold", vlines=marks)


def trajectory_chart(traces: Sequence, labels: Sequence[str] | None = None) -> str:
    labels = labels or [f"run {i}" for i in range(len(traces))]
    return line_chart([(lab, t.m, t.x) for lab, t in zip(labels, traces)], log_y=True,
                      title="State magnitude", xlabel="step m", ylabel="|X[m]|")
