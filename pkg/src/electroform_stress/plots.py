"""Deterministic SVG scatter plots with an optional fitted line.

Data coordinates map to pixels by a fixed affine transform:

    px = MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * PLOT_WIDTH
    py = MARGIN_TOP  + (y_hi - y) / (y_hi - y_lo) * PLOT_HEIGHT

``[x_lo, x_hi]`` is the data range of the points padded by ``PAD`` of its
span on each side. A zero span is widened to ±10 % of the value, or ±1 at
zero. The y range also includes the fitted line at both x ends. Pixel
values are written with two decimals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import DomainError

WIDTH = 640
HEIGHT = 480
MARGIN_LEFT = 90
MARGIN_RIGHT = 30
MARGIN_TOP = 40
MARGIN_BOTTOM = 60
PLOT_WIDTH = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_HEIGHT = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
PAD = 0.05
N_TICKS = 5


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi == lo:
        half = abs(lo) * 0.1 or 1.0
        return lo - half, hi + half
    pad = (hi - lo) * PAD
    return lo - pad, hi + pad


@dataclass(frozen=True)
class PlotFrame:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    @classmethod
    def for_data(cls, xs: Sequence[float], ys: Sequence[float], line=None) -> "PlotFrame":
        x_lo, x_hi = _padded(min(xs), max(xs))
        y_values = list(ys)
        if line is not None:
            slope, intercept = line
            y_values += [slope * min(xs) + intercept, slope * max(xs) + intercept]
        y_lo, y_hi = _padded(min(y_values), max(y_values))
        return cls(x_lo, x_hi, y_lo, y_hi)

    def to_pixel(self, x: float, y: float) -> tuple[float, float]:
        px = MARGIN_LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * PLOT_WIDTH
        py = MARGIN_TOP + (self.y_hi - y) / (self.y_hi - self.y_lo) * PLOT_HEIGHT
        return px, py


def _num(v: float) -> str:
    text = f"{v:.2f}"
    return "0.00" if text == "-0.00" else text


def _tick_label(v: float) -> str:
    text = f"{v:.3g}"
    return "0" if float(text) == 0 else text


def emit_svg_scatter(
    points: Sequence[tuple[float, float]],
    line: tuple[float, float] | None = None,
    x_label: str = "x",
    y_label: str = "y",
    title: str = "",
) -> bytes:
    """Render points and an optional ``(slope, intercept)`` line as SVG 1.1.

    The line spans the x range of the points.
    """
    points = [(float(x), float(y)) for x, y in points]
    if not points:
        raise DomainError("a scatter plot needs at least one point")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    frame = PlotFrame.for_data(xs, ys, line)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect class="frame" x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_WIDTH}" '
        f'height="{PLOT_HEIGHT}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    bottom = MARGIN_TOP + PLOT_HEIGHT
    for i in range(N_TICKS):
        frac = i / (N_TICKS - 1)
        xv = frame.x_lo + frac * (frame.x_hi - frame.x_lo)
        yv = frame.y_lo + frac * (frame.y_hi - frame.y_lo)
        px, _ = frame.to_pixel(xv, frame.y_lo)
        _, py = frame.to_pixel(frame.x_lo, yv)
        out.append(f'<line class="tick" x1="{_num(px)}" y1="{bottom}" x2="{_num(px)}" y2="{bottom + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_num(px)}" y="{bottom + 20}" font-size="11" text-anchor="middle">{_tick_label(xv)}</text>'
        )
        out.append(f'<line class="tick" x1="{MARGIN_LEFT - 5}" y1="{_num(py)}" x2="{MARGIN_LEFT}" y2="{_num(py)}" stroke="black"/>')
        out.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{_num(py + 4)}" font-size="11" text-anchor="end">{_tick_label(yv)}</text>'
        )
    out.append(
        f'<text x="{_num(MARGIN_LEFT + PLOT_WIDTH / 2)}" y="{HEIGHT - 15}" font-size="13" '
        f'text-anchor="middle">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="18" y="{_num(MARGIN_TOP + PLOT_HEIGHT / 2)}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {_num(MARGIN_TOP + PLOT_HEIGHT / 2)})">{escape(y_label)}</text>'
    )
    if title:
        out.append(
            f'<text x="{_num(WIDTH / 2)}" y="24" font-size="14" text-anchor="middle">{escape(title)}</text>'
        )
    if line is not None:
        slope, intercept = line
        x0, x1 = min(xs), max(xs)
        p0 = frame.to_pixel(x0, slope * x0 + intercept)
        p1 = frame.to_pixel(x1, slope * x1 + intercept)
        out.append(
            f'<line class="fit" x1="{_num(p0[0])}" y1="{_num(p0[1])}" x2="{_num(p1[0])}" '
            f'y2="{_num(p1[1])}" stroke="#c0392b" stroke-width="1.5"/>'
        )
    for x, y in points:
        px, py = frame.to_pixel(x, y)
        out.append(f'<circle class="point" cx="{_num(px)}" cy="{_num(py)}" r="3.5" fill="#1f4e79"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
