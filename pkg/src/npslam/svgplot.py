"""Minimal deterministic SVG line plots.

Hand-rolled on purpose: output bytes depend only on the data passed in, so
identical runs produce identical files.
"""

from __future__ import annotations

from pathlib import Path

WIDTH, HEIGHT = 640, 480
ML, MR, MT, MB = 70, 20, 40, 55
PALETTE = ("#1b6ca8", "#d1495b", "#3a7d44", "#8d5a97", "#c77d1e", "#3b3b3b")


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def line_plot(path, series, title: str, xlabel: str, ylabel: str) -> None:
    """Write a line plot. series: iterable of (label, xs, ys)."""
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def sx(x):
        return ML + (x - x_lo) / (x_hi - x_lo) * (WIDTH - ML - MR)

    def sy(y):
        return HEIGHT - MB - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MT - MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]
    for xt in _ticks(x_lo, x_hi):
        px = sx(xt)
        out.append(f'<line x1="{px:.2f}" y1="{HEIGHT - MB}" x2="{px:.2f}" '
                   f'y2="{HEIGHT - MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{HEIGHT - MB + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_fmt_tick(xt)}</text>')
    for yt in _ticks(y_lo, y_hi):
        py = sy(yt)
        out.append(f'<line x1="{ML - 5}" y1="{py:.2f}" x2="{ML}" y2="{py:.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{py + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_fmt_tick(yt)}</text>')
    out.append(f'<rect x="{ML}" y="{MT}" width="{WIDTH - ML - MR}" '
               f'height="{HEIGHT - MT - MB}" fill="none" stroke="black"/>')
    out.append(f'<text x="{(ML + WIDTH - MR) / 2:.2f}" y="{HEIGHT - 12}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="13">{xlabel}</text>')
    out.append(f'<text x="16" y="{(MT + HEIGHT - MB) / 2:.2f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 16 {(MT + HEIGHT - MB) / 2:.2f})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        if xs:
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"/>')
        ly = MT + 16 + 16 * i
        out.append(f'<line x1="{WIDTH - MR - 130}" y1="{ly - 4}" '
                   f'x2="{WIDTH - MR - 105}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - MR - 100}" y="{ly}" font-family="sans-serif" '
                   f'font-size="12">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
