"""Hand-written SVG figures rendered from a fit report.

All coordinates are written with fixed decimals so output bytes depend only
on the report contents.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PLOT_KINDS = ("scatter_loess", "prob_vector", "blocks", "maxima_hist")

WIDTH, HEIGHT = 800, 480
MARGIN = dict(left=60, right=20, top=40, bottom=50)


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_max(v: float) -> float:
    """Smallest 1/2/5 x 10^k at or above ``v``."""
    if v <= 0:
        return 1.0
    exp = 10 ** math.floor(math.log10(v))
    for step in (1, 2, 5, 10):
        if step * exp >= v:
            return step * exp
    return 10 * exp


def _ticks(top: float, n: int = 5) -> list[float]:
    return [top * i / n for i in range(n + 1)]


class Svg:
    def __init__(self, width: int = WIDTH, height: int = HEIGHT):
        self.width, self.height = width, height
        self.parts: list[str] = []

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                          f'stroke="{stroke}" stroke-width="{_f(width)}"{extra}/>')

    def polyline(self, points, stroke="#000", width=1.0, dash=None):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_f(width)}"{extra}/>')

    def circle(self, x, y, r=3.0, fill="none", stroke="#000"):
        self.parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{fill}" stroke="{stroke}"/>')

    def rect(self, x, y, w, h, fill="#999", stroke="none"):
        self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
                          f'fill="{fill}" stroke="{stroke}"/>')

    def text(self, x, y, s, size=12, anchor="start", cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}"'
                          f'{c}>{escape(str(s))}</text>')

    def render(self) -> str:
        head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" '
                f'font-family="sans-serif">\n'
                f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#fff"/>\n')
        return head + "\n".join(self.parts) + "\n</svg>\n"


class Panel:
    """Linear data-to-pixel mapping for one plotting area."""

    def __init__(self, svg: Svg, box, xlim, ylim):
        self.svg = svg
        self.x0, self.y0, self.x1, self.y1 = box
        self.xlim, self.ylim = xlim, ylim

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def py(self, y):
        lo, hi = self.ylim
        return self.y1 - (y - lo) / (hi - lo) * (self.y1 - self.y0)

    def axes(self, xticks, yticks, xlabel="", ylabel="", yfmt="{:g}"):
        s = self.svg
        s.line(self.x0, self.y1, self.x1, self.y1)
        s.line(self.x0, self.y0, self.x0, self.y1)
        for t in xticks:
            s.line(self.px(t), self.y1, self.px(t), self.y1 + 4)
            s.text(self.px(t), self.y1 + 16, f"{t:g}", size=10, anchor="middle")
        for t in yticks:
            s.line(self.x0 - 4, self.py(t), self.x0, self.py(t))
            s.text(self.x0 - 6, self.py(t) + 3, yfmt.format(t), size=10, anchor="end")
        if xlabel:
            s.text((self.x0 + self.x1) / 2, self.y1 + 32, xlabel, size=11, anchor="middle")
        if ylabel:
            s.text(self.x0, self.y0 - 8, ylabel, size=11, anchor="start")


def _main_panel(svg: Svg, xlim, ylim) -> Panel:
    box = (MARGIN["left"], MARGIN["top"], svg.width - MARGIN["right"], svg.height - MARGIN["bottom"])
    return Panel(svg, box, xlim, ylim)


MINUTE_TICKS = (0, 15, 30, 45, 60, 75, 90)


def plot_scatter_loess(report: dict) -> str:
    data = report["dataset"]
    counts = data["counts"]
    fitted = report["smooth"]["fitted"]
    svg = Svg()
    top = nice_max(max(max(counts), max(fitted)) * 1.1)
    p = _main_panel(svg, (0, 91), (0, top))
    svg.text(svg.width / 2, 22, "Goals per minute with loess smoother", size=14, anchor="middle")
    p.axes(MINUTE_TICKS, _ticks(top), xlabel="minute", ylabel="goals")
    for m, c in enumerate(counts, start=1):
        svg.circle(p.px(m), p.py(c), r=3)
        svg.text(p.px(m) + 3, p.py(c) - 4, str(m), size=7, cls="minute")
    svg.polyline([(p.px(m), p.py(v)) for m, v in enumerate(fitted, start=1)], stroke="#000", width=3)
    for (lo, hi), mean in (((1, 45), data["mean_first"]), ((46, 90), data["mean_second"])):
        svg.line(p.px(lo), p.py(mean), p.px(hi), p.py(mean), stroke="#555", width=1.5, dash="6,4")
        svg.text(p.px(lo) + 4, p.py(mean) + 14, f"{mean:.2f}", size=11, cls="mean")
    return svg.render()


def plot_prob_vector(report: dict) -> str:
    probs = report["model"]["prob_vector"]
    svg = Svg()
    top = nice_max(max(probs) * 1.15)
    p = _main_panel(svg, (0, 91), (0, top))
    svg.text(svg.width / 2, 22, "Goal probability per minute under the model", size=14, anchor="middle")
    p.axes(MINUTE_TICKS, _ticks(top), xlabel="minute", ylabel="probability", yfmt="{:.4f}")
    for lo, hi in ((1, 45), (46, 90)):
        svg.polyline([(p.px(m), p.py(probs[m - 1])) for m in range(lo, hi + 1)], stroke="#1f4e9c", width=2)
    for m, v in enumerate(probs, start=1):
        svg.circle(p.px(m), p.py(v), r=1.8, fill="#1f4e9c", stroke="none")
    return svg.render()


def plot_blocks(report: dict) -> str:
    counts = report["dataset"]["counts"]
    reshapes = sorted((b for b in report["blocks"] if b["half"] == "full"), key=lambda b: b["block_size"])
    panel_h = 150
    svg = Svg(WIDTH, 40 + panel_h * len(reshapes) + 30)
    svg.text(svg.width / 2, 22, "Per-minute goals reshaped into blocks", size=14, anchor="middle")
    top = nice_max(max(counts) * 1.1)
    for k, b in enumerate(reshapes):
        y0 = 40 + k * panel_h
        p = Panel(svg, (MARGIN["left"], y0 + 10, svg.width - MARGIN["right"], y0 + panel_h - 30), (0, 91), (0, top))
        p.axes(MINUTE_TICKS, _ticks(top, 2), xlabel="minute" if k == len(reshapes) - 1 else "")
        svg.text(p.x1, y0 + 20, f"blocks of {b['block_size']} minutes", size=11, anchor="end")
        for m, c in enumerate(counts, start=1):
            svg.circle(p.px(m), p.py(c), r=1.5, fill="#bbb", stroke="none")
        for (lo, hi), v in zip(b["spans"], b["values"]):
            svg.line(p.px(lo - 0.5), p.py(v), p.px(hi + 0.5), p.py(v), stroke="#b03a2e", width=2.5)
    return svg.render()


def plot_maxima_hist(report: dict) -> str:
    sims = {s["half"]: s for s in report["simulations"]}
    svg = Svg()
    svg.text(svg.width / 2, 22, "Simulated distribution of the per-minute maximum", size=14, anchor="middle")
    halves = [h for h in ("first", "second") if h in sims]
    pw = (svg.width - MARGIN["left"] - MARGIN["right"]) / max(1, len(halves))
    for k, half in enumerate(halves):
        s = sims[half]
        hist = {int(v): f for v, f in s["histogram"].items()}
        obs = s.get("observed_max")
        lo = min(min(hist), obs if obs is not None else min(hist)) - 1
        hi = max(max(hist), obs if obs is not None else max(hist)) + 1
        top = nice_max(max(hist.values()) / s["n_sims"] * 1.15)
        x0 = MARGIN["left"] + k * pw
        p = Panel(svg, (x0, MARGIN["top"] + 10, x0 + pw - 40, svg.height - MARGIN["bottom"]), (lo, hi + 1), (0, top))
        step = max(1, math.ceil((hi - lo) / 8))
        p.axes(range(lo, hi + 1, step), _ticks(top), xlabel=f"maximum goals in a minute ({half} half)",
               yfmt="{:.3f}")
        for v in sorted(hist):
            h = hist[v] / s["n_sims"]
            svg.rect(p.px(v), p.py(h), p.px(v + 1) - p.px(v) - 1, p.py(0) - p.py(h), fill="#7f8c8d")
        if obs is not None:
            xo = p.px(obs + 0.5)
            svg.line(xo, p.y0, xo, p.y1, stroke="#c0392b", width=2)
            left = xo < (p.x0 + p.x1) / 2
            tx, anchor = (xo + 4, "start") if left else (xo - 4, "end")
            svg.text(tx, p.y0 + 12, f"observed {obs}", size=10, anchor=anchor)
            svg.text(tx, p.y0 + 26, f"P(max > {obs}) = {s['tail_prob_gt']:.4f}", size=10, anchor=anchor)
    return svg.render()


_RENDERERS = {
    "scatter_loess": plot_scatter_loess,
    "prob_vector": plot_prob_vector,
    "blocks": plot_blocks,
    "maxima_hist": plot_maxima_hist,
}


def render(report: dict, kind: str) -> str:
    try:
        renderer = _RENDERERS[kind]
    except KeyError:
        raise ValueError(f"unknown plot kind {kind!r}; valid kinds: {', '.join(PLOT_KINDS)}") from None
    return renderer(report)
