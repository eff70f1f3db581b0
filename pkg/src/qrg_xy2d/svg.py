"""Minimal deterministic SVG line plots of CSV series."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")
_W, _H, _PAD = 640, 420, 60


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render(series, xlabel: str, ylabel: str, title: str = "") -> str:
    """Render ``[(label, xs, ys), ...]`` as one SVG document string."""
    finite = [(lab, np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series]
    xs = np.concatenate([x[np.isfinite(y)] for _, x, y in finite])
    ys = np.concatenate([y[np.isfinite(y)] for _, _, y in finite])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x):
        return _PAD + (x - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def py(y):
        return _H - _PAD - (y - y0) / (y1 - y0) * (_H - 2 * _PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle" font-size="14">{escape(xlabel)}</text>',
        f'<text x="15" y="{_H / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {_H / 2})">{escape(ylabel)}</text>',
        f'<text x="{_PAD}" y="{_PAD + _H - 2 * _PAD + 18}" font-size="11">{x0:.4g}</text>',
        f'<text x="{_W - _PAD}" y="{_PAD + _H - 2 * _PAD + 18}" text-anchor="end" font-size="11">{x1:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" text-anchor="end" font-size="11">{y0:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 10}" text-anchor="end" font-size="11">{y1:.4g}</text>',
    ]
    if title:
        out.append(f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="15">{escape(title)}</text>')
    for k, (label, x, y) in enumerate(finite):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = _PAD + 16 + 16 * k
        out.append(f'<text x="{_W - _PAD - 6}" y="{ly}" text-anchor="end" font-size="12" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
