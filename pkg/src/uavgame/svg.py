"""Minimal standalone SVG line plots (no external references)."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
DASHES = ("", "6,3", "2,2", "8,2,2,2")


def _num(x):
    return f"{x:.2f}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _range(values):
    vals = [v for v in values if v == v]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
        return lo - pad, hi + pad
    return lo, hi


def line_plot(series, title="", xlabel="", ylabel="", width=640, height=400) -> str:
    """``series``: iterable of ``(label, xs, ys)``; NaNs break a line."""
    series = list(series)
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = _range([x for _, xs, _ in series for x in xs])
    y0, y1 = _range([y for _, _, ys in series for y in ys])

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{_num(sx(t))}" y1="{top + ph}" x2="{_num(sx(t))}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_num(sx(t))}" y="{top + ph + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 4}" y1="{_num(sy(t))}" x2="{left}" y2="{_num(sy(t))}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{_num(sy(t) + 4)}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(series):
        colour = PALETTE[k % len(PALETTE)]
        dash = DASHES[(k // len(PALETTE)) % len(DASHES)] or DASHES[k % 2]
        segments, cur = [], []
        for x, y in zip(xs, ys):
            if y != y:
                if cur:
                    segments.append(cur)
                cur = []
                continue
            cur.append(f"{_num(sx(x))},{_num(sy(y))}")
        if cur:
            segments.append(cur)
        for seg in segments:
            style = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline points="{" ".join(seg)}" fill="none" stroke="{colour}" stroke-width="1.5"{style}/>')
        ly = top + 14 + 16 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" stroke="{colour}" '
                   f'stroke-width="1.5"{f" stroke-dasharray={chr(34)}{dash}{chr(34)}" if dash else ""}/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
