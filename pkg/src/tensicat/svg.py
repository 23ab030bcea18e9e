"""Hand-rolled SVG scatter and heatmap writers; no plotting dependency."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["scatter_svg", "heatmap_svg"]

_HEAT = ["#2c2c54", "#30589c", "#2f9c8c", "#7cc35a", "#e3d041", "#f2913d", "#e84a3f"]


def _map(v, lo, hi, size, flip=False):
    s = (v - lo) / (hi - lo) if hi > lo else 0.5
    return (1 - s) * size if flip else s * size


def scatter_svg(path: str | Path, points: Sequence[tuple[float, float, str]],
                rect: tuple[float, float, float, float], size: int = 640) -> Path:
    """Scatter plot of (x, y, style) points; style 'solid' or 'hollow'."""
    x0, x1, y0, y1 = rect
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for x, y, style in points:
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            continue
        cx = _map(x, x0, x1, size)
        cy = _map(y, y0, y1, size, flip=True)
        if style == "solid":
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2.2" fill="#c0392b"/>')
        else:
            parts.append(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2.2" fill="none" '
                f'stroke="#7f8c8d" stroke-width="0.8"/>'
            )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts))
    return path


def heatmap_svg(path: str | Path, xs: np.ndarray, ys: np.ndarray,
                counts: np.ndarray, size: int = 640) -> Path:
    """Integer field as colored cells; -1 (holes) rendered gray."""
    res_y, res_x = counts.shape
    cw, ch = size / res_x, size / res_y
    vmax = max(1, int(counts.max()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
    ]
    for i in range(res_y):
        for j in range(res_x):
            c = int(counts[i, j])
            color = "#bbbbbb" if c < 0 else _HEAT[min(c, len(_HEAT) - 1)]
            x = j * cw
            y = (res_y - 1 - i) * ch
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                f'height="{ch + 0.5:.2f}" fill="{color}"/>'
            )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts))
    return path
