"""Standalone SVG line plots with percentile bands.

Panels are laid out one row per metric and one column per ensemble, so two
ensembles with both metrics give the familiar 2x2 grid::

    (a) model 1 entropy   (b) model 2 entropy
    (c) model 1 classes   (d) model 2 classes
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PANEL_W, PANEL_H = 360, 240
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 44

METRIC_LABELS = {
    "mean_cond_entropy": "mean conditional entropy (bits)",
    "class_count": "inflection classes",
}
SHUFFLED = {
    "mean_cond_entropy": "shuffled_mean_cond_entropy",
    "class_count": "shuffled_class_count",
}
LIVE_COLOR = "#1f5fa8"
SHUFFLED_COLOR = "#c2501b"


def _n(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def _tick_label(v: float) -> str:
    if abs(v) >= 1e4:
        return f"{v:.3g}"
    return f"{v:g}"


class _Panel:
    def __init__(self, x0: float, y0: float, xs, ymin: float, ymax: float):
        self.x0, self.y0 = x0, y0
        self.w = PANEL_W - MARGIN_L - MARGIN_R
        self.h = PANEL_H - MARGIN_T - MARGIN_B
        self.xmin, self.xmax = float(min(xs)), float(max(xs))
        if self.xmax == self.xmin:
            self.xmax = self.xmin + 1.0
        if ymax <= ymin:
            ymax = ymin + 1.0
        self.ymin, self.ymax = ymin, ymax

    def px(self, x) -> float:
        return self.x0 + MARGIN_L + (x - self.xmin) / (self.xmax - self.xmin) * self.w

    def py(self, y) -> float:
        return self.y0 + MARGIN_T + self.h - (y - self.ymin) / (self.ymax - self.ymin) * self.h

    def points(self, xs, ys) -> str:
        return " ".join(f"{_n(self.px(x))},{_n(self.py(y))}" for x, y in zip(xs, ys))


def _axes(p: _Panel, title: str, ylabel: str) -> list[str]:
    out = []
    left, bottom = p.x0 + MARGIN_L, p.y0 + MARGIN_T + p.h
    out.append(f'<rect x="{_n(left)}" y="{_n(p.y0 + MARGIN_T)}" width="{_n(p.w)}" '
               f'height="{_n(p.h)}" fill="none" stroke="#444" stroke-width="1"/>')
    for t in _ticks(p.xmin, p.xmax):
        x = p.px(t)
        out.append(f'<line x1="{_n(x)}" y1="{_n(bottom)}" x2="{_n(x)}" y2="{_n(bottom + 4)}" '
                   f'stroke="#444"/>')
        out.append(f'<text x="{_n(x)}" y="{_n(bottom + 16)}" font-size="10" '
                   f'text-anchor="middle">{_tick_label(t)}</text>')
    for t in _ticks(p.ymin, p.ymax):
        y = p.py(t)
        out.append(f'<line x1="{_n(left - 4)}" y1="{_n(y)}" x2="{_n(left)}" y2="{_n(y)}" '
                   f'stroke="#444"/>')
        out.append(f'<text x="{_n(left - 6)}" y="{_n(y + 3)}" font-size="10" '
                   f'text-anchor="end">{_tick_label(t)}</text>')
    out.append(f'<text x="{_n(left + p.w / 2)}" y="{_n(bottom + 34)}" font-size="11" '
               f'text-anchor="middle">cycles</text>')
    cx, cy = p.x0 + 14, p.y0 + MARGIN_T + p.h / 2
    out.append(f'<text x="{_n(cx)}" y="{_n(cy)}" font-size="11" text-anchor="middle" '
               f'transform="rotate(-90 {_n(cx)} {_n(cy)})">{escape(ylabel)}</text>')
    out.append(f'<text x="{_n(left)}" y="{_n(p.y0 + MARGIN_T - 8)}" font-size="12">'
               f'{escape(title)}</text>')
    return out


def _series(p: _Panel, xs, s, color: str, dashed: bool, name: str) -> list[str]:
    band = p.points(list(xs) + list(xs)[::-1], list(s.p95) + list(s.p05)[::-1])
    dash = ' stroke-dasharray="5,3"' if dashed else ""
    return [
        f'<polygon class="band {name}" points="{band}" fill="{color}" fill-opacity="0.2" '
        f'stroke="none"/>',
        f'<polyline class="mean {name}" points="{p.points(xs, s.mean)}" fill="none" '
        f'stroke="{color}" stroke-width="1.5"{dash}/>',
    ]


def render_plot(summaries, path, metrics=("mean_cond_entropy", "class_count"),
                labels=None, shuffled: bool = True) -> Path:
    """Write an SVG grid of panels (rows: metrics, columns: summaries).

    Each panel shows the mean line and the p05-p95 band of the live series
    and, with ``shuffled``, the shuffled-baseline series dashed.
    """
    summaries = list(summaries)
    if not summaries:
        raise ValueError("at least one summary is required")
    labels = labels or [getattr(s, "label", "") or f"model {i + 1}"
                        for i, s in enumerate(summaries)]
    rows, cols = len(metrics), len(summaries)
    body = []
    letter = iter("abcdefghijklmnopqrstuvwxyz")
    panel_letters = {}
    # letters run along each row, as in a figure caption
    for r in range(rows):
        for c in range(cols):
            panel_letters[r, c] = next(letter, "")
    for c, summary in enumerate(summaries):
        xs = summary.checkpoints
        for r, metric in enumerate(metrics):
            series = [(summary.metrics[metric], LIVE_COLOR, False, "live")]
            if shuffled and metric in SHUFFLED:
                series.append((summary.metrics[SHUFFLED[metric]], SHUFFLED_COLOR, True,
                               "shuffled"))
            ymax = max(float(np.max(s.p95)) for s, *_ in series)
            ymin = min(0.0, min(float(np.min(s.p05)) for s, *_ in series))
            p = _Panel(c * PANEL_W, r * PANEL_H, xs, ymin, ymax * 1.05 if ymax > 0 else ymax)
            body.append(f'<g class="panel" id="panel-{panel_letters[r, c]}">')
            body += _axes(p, f"({panel_letters[r, c]}) {labels[c]}",
                          METRIC_LABELS.get(metric, metric))
            for s, color, dashed, name in series:
                body += _series(p, xs, s, color, dashed, name)
            body.append("</g>")
    width, height = cols * PANEL_W, rows * PANEL_H
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
           f'<rect width="{width}" height="{height}" fill="white"/>\n'
           + "\n".join(body) + "\n</svg>\n")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8")
    return path
