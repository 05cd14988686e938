"""Raster (PGM) and vector (SVG) pictures of color fields and networks."""
from __future__ import annotations

import numpy as np

from .fields import VectorField2

_GRAYS = (40, 130, 220)
_STROKES = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def color_raster(u: VectorField2, minima) -> np.ndarray:
    """Nearest-minimum color index per node, rows ordered top to bottom for display."""
    minima = np.asarray(minima, dtype=float)
    d = np.stack([np.hypot(u.values[..., 0] - c[0], u.values[..., 1] - c[1]) for c in minima], axis=-1)
    idx = np.argmin(d, axis=-1)  # (nx, ny)
    return idx.T[::-1]


def to_pgm(u: VectorField2, minima) -> bytes:
    """Binary PGM (P5) with one gray level per color."""
    img = np.asarray(_GRAYS, dtype=np.uint8)[color_raster(u, minima)]
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def _fmt(x: float) -> str:
    return f"{x:.5f}".rstrip("0").rstrip(".")


def to_svg(polylines_sets, bounds, size: int = 480, field: tuple[VectorField2, np.ndarray] | None = None,
           boundary_radius: float | None = None, caption: str | None = None) -> str:
    """SVG with optional color-field cells, an optional circular boundary and layers of polylines.

    ``polylines_sets`` is a list of polyline lists; each layer gets its own stroke.
    ``bounds`` is (xmin, xmax, ymin, ymax).
    """
    x0, x1, y0, y1 = bounds
    s = size / max(x1 - x0, y1 - y0)

    def X(x):
        return (x - x0) * s

    def Y(y):
        return (y1 - y) * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           '<rect width="100%" height="100%" fill="white"/>']
    if field is not None:
        u, minima = field
        idx = color_raster(u, minima)[::-1].T  # back to (nx, ny)
        g = u.grid
        fills = ("#c6dbef", "#fcbba1", "#c7e9c0")
        w = _fmt(g.h * s)
        for i in range(g.nx):
            for j in range(g.ny):
                cx, cy = g.xs[i] - g.h / 2, g.ys[j] + g.h / 2
                out.append(f'<rect x="{_fmt(X(cx))}" y="{_fmt(Y(cy))}" width="{w}" height="{w}" '
                           f'fill="{fills[idx[i, j]]}"/>')
    if boundary_radius is not None:
        out.append(f'<circle cx="{_fmt(X(0))}" cy="{_fmt(Y(0))}" r="{_fmt(boundary_radius * s)}" '
                   'fill="none" stroke="black" stroke-width="1"/>')
    for layer, polys in enumerate(polylines_sets):
        color = _STROKES[layer % len(_STROKES)]
        for p in polys:
            p = np.asarray(p)
            pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in p)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    if caption:
        text = caption.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f'<text x="8" y="20" font-family="monospace" font-size="13">{text}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
