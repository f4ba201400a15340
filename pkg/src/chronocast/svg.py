"""Tiny dependency-free SVG line and histogram writer for inspection plots."""

from __future__ import annotations

from html import escape

import numpy as np

WIDTH, HEIGHT = 800, 360
MARGIN = 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(values, dtype=float) - lo) / span * (out_hi - out_lo)


def _frame(title, xlabel, ylabel, body, ylo, yhi):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - 10}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="30" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2:.0f}" font-size="12" transform="rotate(-90 14 {HEIGHT / 2:.0f})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
        f'<text x="{MARGIN - 4}" y="34" text-anchor="end" font-size="10">{yhi:.4g}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end" font-size="10">{ylo:.4g}</text>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_plot(series, title="", xlabel="", ylabel=""):
    """``series`` is a list of (label, y) pairs sharing the x axis 0..n-1."""
    ys = [np.asarray(y, dtype=float) for _, y in series]
    ylo = min(float(y.min()) for y in ys)
    yhi = max(float(y.max()) for y in ys)
    n = max(len(y) for y in ys)
    body = []
    for k, ((label, _), y) in enumerate(zip(series, ys)):
        px = _scale(np.arange(len(y)), 0, max(n - 1, 1), MARGIN, WIDTH - 10)
        py = _scale(y, ylo, yhi, HEIGHT - MARGIN, 30)
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px, py))
        color = COLORS[k % len(COLORS)]
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        body.append(f'<text x="{WIDTH - 150}" y="{40 + 14 * k}" font-size="11" fill="{color}">{escape(label)}</text>')
    return _frame(title, xlabel, ylabel, body, ylo, yhi)


def histogram(edges, counts, title="", xlabel="", ylabel="count", overlay=None):
    """Bar histogram; ``overlay`` is an optional (x, density) curve rescaled to counts."""
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    yhi = float(counts.max()) if counts.size and counts.max() > 0 else 1.0
    xlo, xhi = float(edges[0]), float(edges[-1])
    body = []
    for left, right, c in zip(edges[:-1], edges[1:], counts):
        x0 = _scale(left, xlo, xhi, MARGIN, WIDTH - 10)
        x1 = _scale(right, xlo, xhi, MARGIN, WIDTH - 10)
        y0 = _scale(c, 0, yhi, HEIGHT - MARGIN, 30)
        body.append(f'<rect x="{x0:.1f}" y="{y0:.1f}" width="{max(x1 - x0 - 1, 0.5):.1f}" '
                    f'height="{HEIGHT - MARGIN - y0:.1f}" fill="{COLORS[0]}"/>')
    if overlay is not None:
        xs, dens = (np.asarray(a, dtype=float) for a in overlay)
        # density -> expected count per bin
        width = (xhi - xlo) / max(len(counts), 1)
        scaled = dens * counts.sum() * width
        keep = (xs >= xlo) & (xs <= xhi)
        px = _scale(xs[keep], xlo, xhi, MARGIN, WIDTH - 10)
        py = _scale(np.minimum(scaled[keep], yhi), 0, yhi, HEIGHT - MARGIN, 30)
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(px, py))
        body.append(f'<polyline fill="none" stroke="{COLORS[1]}" stroke-width="2" points="{pts}"/>')
    body.append(f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 14}" font-size="10">{xlo:.4g}</text>')
    body.append(f'<text x="{WIDTH - 10}" y="{HEIGHT - MARGIN + 14}" text-anchor="end" font-size="10">{xhi:.4g}</text>')
    return _frame(title, xlabel, ylabel, body, 0.0, yhi)
