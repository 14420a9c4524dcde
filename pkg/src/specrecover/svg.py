"""Minimal SVG chart writer (grouped bars and polylines)."""

from __future__ import annotations

from html import escape

PALETTE = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb", "#000000"]

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 60, 140, 40, 50


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for i in range(6):
        v = i / 5
        y = TOP + ph * (1 - v)
        out.append(f'<line x1="{LEFT - 4}" y1="{y:.1f}" x2="{LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.1f}</text>')
    return out


def _legend(labels: list[str]) -> list[str]:
    out = []
    x = WIDTH - RIGHT + 16
    for i, label in enumerate(labels):
        y = TOP + 10 + 18 * i
        out.append(f'<rect x="{x}" y="{y - 9}" width="12" height="12" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{x + 18}" y="{y + 1}">{escape(label)}</text>')
    return out


def grouped_bars(categories: list, series: dict[str, list[float]], title: str, xlabel: str,
                 ylabel: str = "probability") -> str:
    """Bars grouped by category, one colour per series; values in [0, 1]."""
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM
    out = _frame(title, xlabel, ylabel)
    n_cat = max(len(categories), 1)
    n_ser = max(len(series), 1)
    slot = pw / n_cat
    bar = slot * 0.8 / n_ser
    for ci, cat in enumerate(categories):
        x0 = LEFT + ci * slot + slot * 0.1
        for si, values in enumerate(series.values()):
            v = min(max(float(values[ci]), 0.0), 1.0)
            h = ph * v
            out.append(f'<rect x="{x0 + si * bar:.2f}" y="{TOP + ph - h:.2f}" width="{bar:.2f}" '
                       f'height="{h:.2f}" fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{LEFT + (ci + 0.5) * slot:.1f}" y="{TOP + ph + 16}" '
                   f'text-anchor="middle">{escape(str(cat))}</text>')
    out += _legend(list(series))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def lines(xs: list[float], series: dict[str, list[float]], title: str, xlabel: str,
          ylabel: str = "probability") -> str:
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM
    out = _frame(title, xlabel, ylabel)
    if xs:
        lo, hi = min(xs), max(xs)
        span = (hi - lo) or 1.0

        def px(x):
            return LEFT + pw * (x - lo) / span

        for x in xs:
            out.append(f'<text x="{px(x):.1f}" y="{TOP + ph + 16}" text-anchor="middle">{x:g}</text>')
        for si, values in enumerate(series.values()):
            color = PALETTE[si % len(PALETTE)]
            pts = " ".join(f"{px(x):.2f},{TOP + ph * (1 - min(max(v, 0.0), 1.0)):.2f}" for x, v in zip(xs, values))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
    out += _legend(list(series))
    out.append("</svg>")
    return "\n".join(out) + "\n"
