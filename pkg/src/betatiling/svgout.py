"""Minimal deterministic SVG output for tile clouds and translate scenes.

No timestamps or generator metadata: identical inputs give identical bytes.
Colors are assigned by hashing the owner's exact coordinates.
"""

from __future__ import annotations

import hashlib

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
    "#8c6d31", "#843c39", "#7b4173", "#3182bd",
]


def color_for(key):
    h = hashlib.sha256(str(key).encode()).digest()
    return _PALETTE[h[0] % len(_PALETTE)]


def _fmt(x):
    return f"{x:.4f}"


def render_point_layers(layers, out_path, size=760, margin=20, radius=None):
    """Write one SVG with a <g> layer per (name, key, points) triple.

    ``points`` are 1- or 2-dimensional; 1-d layers are drawn on stacked
    horizontal lines so interval tiles remain visible.
    """
    pts = []
    dim = None
    for _, _, p in layers:
        if len(p):
            dim = p.shape[1]
            pts.extend(p.tolist())
    if not pts:
        raise ValueError("nothing to draw")
    if dim == 1:
        xs = [p[0] for p in pts]
        lo, hi = min(xs), max(xs)
        span = (hi - lo) or 1.0
        scale = (size - 2 * margin) / span
        rows = len(layers)
        r = radius or max(1.0, scale * 0.002)
        body = []
        for row, (name, key, p) in enumerate(layers):
            y = margin + (row + 0.5) * (size - 2 * margin) / max(1, rows)
            col = color_for(key)
            circles = "".join(
                f'<circle cx="{_fmt(margin + (v[0] - lo) * scale)}" cy="{_fmt(y)}" r="{_fmt(r)}"/>'
                for v in p.tolist())
            body.append(f'<g id="{name}" fill="{col}">{circles}</g>')
        height = size
    else:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
        span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
        scale = (size - 2 * margin) / span
        r = radius or max(0.6, scale * 0.0015)
        body = []
        for name, key, p in layers:
            col = color_for(key)
            circles = "".join(
                f'<circle cx="{_fmt(margin + (v[0] - lo_x) * scale)}" '
                f'cy="{_fmt(margin + (hi_y - v[1]) * scale)}" r="{_fmt(r)}"/>'
                for v in p.tolist())
            body.append(f'<g id="{name}" fill="{col}" fill-opacity="0.55">{circles}</g>')
        height = int(2 * margin + (hi_y - lo_y) * scale) + 1
    doc = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{size}" height="{height}">' + "".join(body) + "</svg>")
    with open(out_path, "w") as fh:
        fh.write(doc)
    return out_path
