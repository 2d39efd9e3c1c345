"""Render a trace as a single-machine SVG Gantt chart."""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from .core import Trace

WIDTH = 800
MARGIN = 40
BAND_Y = 30
BAND_H = 60
PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


def _ticks(end: Fraction) -> list[Fraction]:
    if end <= 0:
        return [Fraction(0)]
    step = Fraction(1)
    while end / step > 10:
        step *= 2
    while end / step < 4:
        step /= 2
    out, x = [], Fraction(0)
    while x <= end:
        out.append(x)
        x += step
    return out


def render_svg(trace: Trace, known_times: dict | None = None, frozen_times: dict | None = None) -> str:
    """One rectangle per segment; a shared segment is split into stacked
    sub-bands, one per job.  ``known_times`` and ``frozen_times`` map job ids
    to instants drawn as ticks under the band."""
    end = trace.makespan if trace.segments else Fraction(0)
    span = float(end) or 1.0
    scale = (WIDTH - 2 * MARGIN) / span

    def x(t) -> float:
        return MARGIN + float(t) * scale

    axis_y = BAND_Y + BAND_H + 10
    height = axis_y + 60
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">']
    for seg in trace.segments:
        ids = sorted(seg.rates)
        sub = BAND_H / len(ids)
        out.append(f'<g class="segment" data-start="{seg.start}" data-end="{seg.end}">')
        for k, j in enumerate(ids):
            y = BAND_Y + k * sub
            w = x(seg.end) - x(seg.start)
            out.append(f'<rect x="{x(seg.start):.2f}" y="{y:.2f}" width="{w:.2f}" height="{sub:.2f}" '
                       f'fill="{PALETTE[j % len(PALETTE)]}" stroke="#222" stroke-width="0.5">'
                       f'<title>job {j} rate {seg.rates[j]} on [{seg.start}, {seg.end}]</title></rect>')
            out.append(f'<text x="{x(seg.start) + w / 2:.2f}" y="{y + sub / 2 + 4:.2f}" '
                       f'text-anchor="middle">{escape(str(j))}</text>')
        out.append("</g>")
    out.append(f'<line class="axis" x1="{MARGIN}" y1="{axis_y}" x2="{WIDTH - MARGIN}" y2="{axis_y}" stroke="#000"/>')
    for t in _ticks(end):
        out.append(f'<line x1="{x(t):.2f}" y1="{axis_y}" x2="{x(t):.2f}" y2="{axis_y + 4}" stroke="#000"/>')
        out.append(f'<text x="{x(t):.2f}" y="{axis_y + 16}" text-anchor="middle">{t}</text>')
    for cls, marks, color, dy in (("known", known_times, "#1a7f37", 26), ("frozen", frozen_times, "#8250df", 40)):
        for j, t in sorted((marks or {}).items()):
            if t is None:
                continue
            out.append(f'<g class="{cls}-tick"><line x1="{x(t):.2f}" y1="{BAND_Y}" x2="{x(t):.2f}" '
                       f'y2="{axis_y + dy - 10}" stroke="{color}" stroke-dasharray="3,2"/>'
                       f'<text x="{x(t):.2f}" y="{axis_y + dy}" fill="{color}" text-anchor="middle">'
                       f'{cls[0]}{j}@{t}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def frozen_onsets(ctx) -> dict:
    """First checkpoint at which each job is frozen with respect to the
    context's target."""
    seen: dict = {}
    for s in ctx.checkpoints().events:
        for j in ctx.frozen(ctx.state(s)):
            seen.setdefault(j, s)
    return seen
