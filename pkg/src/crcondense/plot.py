"""Standalone SVG scatter plots of datasets and their CRCs."""
from __future__ import annotations

import numpy as np

from .data import CondensedModel, Dataset

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
POINT_R = 2.0
CENTER_R = 6.0
WIDTH = HEIGHT = 600
PAD = 40


def _f(v: float) -> str:
    return f"{v:.3f}"


def _bounds(points: np.ndarray):
    if points.size == 0:
        return np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return lo - 0.05 * span, hi + 0.05 * span


def render_svg(ds: Dataset, model: CondensedModel | None = None) -> str:
    """Instances as small dots colored by label; CRCs as large outlined dots.

    Only the first two feature columns are drawn.
    """
    if ds.dim < 2:
        X = np.column_stack([ds.instances[:, 0], np.zeros(ds.n)])
        C = None if model is None else np.column_stack([model.centers[:, 0], np.zeros(model.m)])
    else:
        X = ds.instances[:, :2]
        C = None if model is None else model.centers[:, :2]
    allpts = X if C is None else np.vstack([X, C])
    lo, hi = _bounds(allpts)
    inner = WIDTH - 2 * PAD

    def sx(v):
        return PAD + (v - lo[0]) / (hi[0] - lo[0]) * inner

    def sy(v):
        return HEIGHT - PAD - (v - lo[1]) / (hi[1] - lo[1]) * inner

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{PAD}" y="{PAD}" width="{inner}" height="{inner}" fill="none" stroke="black"/>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 16}" font-size="11">{_f(lo[0])}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 16}" font-size="11" text-anchor="end">{_f(hi[0])}</text>',
        f'<text x="{PAD - 4}" y="{HEIGHT - PAD}" font-size="11" text-anchor="end">{_f(lo[1])}</text>',
        f'<text x="{PAD - 4}" y="{PAD + 10}" font-size="11" text-anchor="end">{_f(hi[1])}</text>',
        '<g class="instances" fill-opacity="0.6">',
    ]
    for (x, y), lab in zip(X, ds.labels):
        color = PALETTE[int(lab) % len(PALETTE)]
        out.append(f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="{POINT_R}" fill="{color}"/>')
    out.append("</g>")
    if model is not None:
        out.append('<g class="centers" stroke="black" stroke-width="1.5">')
        for (x, y), lab in zip(C, model.center_labels):
            color = PALETTE[int(lab) % len(PALETTE)]
            out.append(f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="{CENTER_R}" fill="{color}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
