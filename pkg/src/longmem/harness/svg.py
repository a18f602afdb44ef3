"""Minimal deterministic SVG line charts."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=20, top=36, bottom=52)
COLORS = ("#1f4e79", "#b03a2e", "#b03a2e", "#555555")


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + step * 1e-9, step)]


def line_chart(x, series, title="", xlabel="", ylabel="", hline=None):
    """``series`` is a list of (label, y, dashed) tuples sharing ``x``."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(s[1], dtype=float) for s in series]
    allv = np.concatenate(ys + ([np.array([hline])] if hline is not None else []))
    ylo, yhi = float(np.nanmin(allv)), float(np.nanmax(allv))
    if yhi == ylo:
        ylo, yhi = ylo - 1, yhi + 1
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = float(x.min()), float(x.max())
    if xhi == xlo:
        xhi = xlo + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return MARGIN["top"] + (yhi - v) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>']
    x0, y0 = MARGIN["left"], MARGIN["top"] + ph
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN["top"]}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for t in _ticks(xlo, xhi):
        out.append(f'<line x1="{px(t):.2f}" y1="{y0}" x2="{px(t):.2f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{y0 + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        out.append(f'<line x1="{x0 - 5}" y1="{py(t):.2f}" x2="{x0}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{x0 + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    if hline is not None:
        out.append(f'<line x1="{x0}" y1="{py(hline):.2f}" x2="{x0 + pw}" y2="{py(hline):.2f}" '
                   f'stroke="#999999" stroke-dasharray="2,3"/>')
    for i, ((label, _, dashed), y) in enumerate(zip(series, ys)):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                   f'points="{pts}"><title>{escape(label)}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
