"""Bare-bones SVG line charts: one panel per curve, data points as dots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PANEL_W = 420
PANEL_H = 260
MARGIN = 36


@dataclass
class Panel:
    title: str
    x: np.ndarray
    y: np.ndarray
    px: np.ndarray
    py: np.ndarray


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render(panels: Sequence[Panel], ylim: tuple[float, float] | None = None) -> str:
    """Stack panels vertically; values outside ``ylim`` are clipped."""
    if ylim is None:
        ys = np.concatenate([p.py for p in panels] + [p.y for p in panels])
        lo, hi = float(ys.min()), float(ys.max())
        pad = 0.1 * (hi - lo) or 1.0
        ylim = (lo - pad, hi + pad)
    y0, y1 = ylim
    width = PANEL_W + 2 * MARGIN
    height = len(panels) * (PANEL_H + 2 * MARGIN)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for k, p in enumerate(panels):
        top = k * (PANEL_H + 2 * MARGIN) + MARGIN
        x0, x1 = float(min(p.x.min(), p.px.min())), float(max(p.x.max(), p.px.max()))
        span = (x1 - x0) or 1.0

        def sx(v):
            return MARGIN + (v - x0) / span * PANEL_W

        def sy(v):
            return top + (y1 - np.clip(v, y0, y1)) / (y1 - y0) * PANEL_H

        out.append(f'<g id="panel-{k}">')
        out.append(
            f'<rect x="{MARGIN}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" '
            'fill="none" stroke="#888"/>'
        )
        out.append(f'<text x="{MARGIN}" y="{top - 8}" font-size="13" font-family="sans-serif">'
                   f'{escape(p.title)}</text>')
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(p.x, p.y))
        out.append(f'<polyline fill="none" stroke="#1f4e99" stroke-width="1.2" points="{pts}"/>')
        for a, b in zip(p.px, p.py):
            out.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="2.5" fill="#c0392b"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
