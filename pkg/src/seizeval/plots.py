"""Deterministic SVG bar panels for score reports.

SVG is written directly (no plotting backend, no display server) so that the
same reports always produce byte-identical files: reruns of an experiment can
be diffed at the file level.  One panel shows the seven [0, 1] rates at both
scoring levels, a second shows false alarms per day on its own scale.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .metrics import ScoreReport

__all__ = ["metrics_panel_svg", "write_metrics_panel"]

_RATE_METRICS = [
    ("sensitivity_ep", "Sens ep"),
    ("precision_ep", "Prec ep"),
    ("f1_ep", "F1 ep"),
    ("sensitivity_dur", "Sens dur"),
    ("precision_dur", "Prec dur"),
    ("f1_dur", "F1 dur"),
    ("f1_de", "F1 DE"),
]

_PALETTE = ["#4878a8", "#e49444", "#5ba053", "#c65b5b", "#8a7bb5", "#8c8c8c",
            "#d0b35f", "#73a8c4", "#b56fa2", "#6b9e8f"]

_BAR_W = 16
_GAP_IN_GROUP = 3
_GAP_BETWEEN = 24
_PLOT_H = 220
_TOP = 46
_LEFT = 52
_BOTTOM = 58


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v else "0"


def _bars_block(
    x0: float,
    groups: Sequence[tuple[str, Sequence[float]]],
    y_max: float,
    out: list[str],
) -> float:
    """Emit one axis block of grouped bars; returns the x just past it."""
    n_series = len(groups[0][1])
    group_w = n_series * _BAR_W + (n_series - 1) * _GAP_IN_GROUP
    x = x0
    axis_y0 = _TOP + _PLOT_H

    for label, values in groups:
        for s, v in enumerate(values):
            h = 0.0 if y_max == 0 else max(0.0, min(v, y_max)) / y_max * _PLOT_H
            bx = x + s * (_BAR_W + _GAP_IN_GROUP)
            out.append(
                f'<rect x="{bx:.1f}" y="{axis_y0 - h:.1f}" width="{_BAR_W}" '
                f'height="{h:.1f}" fill="{_PALETTE[s % len(_PALETTE)]}"/>'
            )
            out.append(
                f'<text x="{bx + _BAR_W / 2:.1f}" y="{axis_y0 - h - 3:.1f}" '
                f'font-size="8" text-anchor="middle">{_fmt(v)}</text>'
            )
        out.append(
            f'<text x="{x + group_w / 2:.1f}" y="{axis_y0 + 14:.1f}" font-size="10" '
            f'text-anchor="middle" transform="rotate(30 {x + group_w / 2:.1f} '
            f'{axis_y0 + 14:.1f})">{_esc(label)}</text>'
        )
        x += group_w + _GAP_BETWEEN
    return x - _GAP_BETWEEN


def _axis(x0: float, x1: float, y_max: float, ticks: int, out: list[str]) -> None:
    axis_y0 = _TOP + _PLOT_H
    out.append(
        f'<line x1="{x0 - 8:.1f}" y1="{axis_y0}" x2="{x1 + 8:.1f}" y2="{axis_y0}" '
        'stroke="#333" stroke-width="1"/>'
    )
    out.append(
        f'<line x1="{x0 - 8:.1f}" y1="{_TOP}" x2="{x0 - 8:.1f}" y2="{axis_y0}" '
        'stroke="#333" stroke-width="1"/>'
    )
    for t in range(ticks + 1):
        frac = t / ticks
        y = axis_y0 - frac * _PLOT_H
        out.append(
            f'<line x1="{x0 - 12:.1f}" y1="{y:.1f}" x2="{x0 - 8:.1f}" y2="{y:.1f}" '
            'stroke="#333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x0 - 15:.1f}" y="{y + 3:.1f}" font-size="9" '
            f'text-anchor="end">{_fmt(frac * y_max)}</text>'
        )


def metrics_panel_svg(rows: Sequence[tuple[str, ScoreReport]], title: str = "") -> str:
    """Render labeled reports as grouped bars; one color per report row.

    ``rows`` pairs a series label (subject id, configuration name, ...) with
    its report.  Returns the SVG document as a string.
    """
    if not rows:
        raise ValueError("metrics_panel_svg needs at least one report")
    labels = [label for label, _ in rows]
    reports = [rep for _, rep in rows]

    rate_groups = [
        (disp, [getattr(r, attr) for r in reports]) for attr, disp in _RATE_METRICS
    ]
    far_values = [r.far_per_day for r in reports]
    far_max = max(far_values + [1.0])
    # round the FAR axis up to 1/2/5 x 10^k so tick labels stay short
    mag = 1.0
    while mag < far_max:
        for mult in (1.0, 2.0, 5.0):
            if far_max <= mag * mult:
                far_max = mag * mult
                break
        else:
            mag *= 10.0
            continue
        break

    body: list[str] = []
    x_end_rates = _bars_block(_LEFT, rate_groups, 1.0, body)
    _axis(_LEFT, x_end_rates, 1.0, 5, body)

    far_x0 = x_end_rates + 70
    x_end_far = _bars_block(far_x0, [("FA/day", far_values)], far_max, body)
    _axis(far_x0, x_end_far, far_max, 4, body)

    legend_y = _TOP - 28
    lx = _LEFT
    for s, label in enumerate(labels):
        body.append(
            f'<rect x="{lx}" y="{legend_y}" width="10" height="10" '
            f'fill="{_PALETTE[s % len(_PALETTE)]}"/>'
        )
        body.append(
            f'<text x="{lx + 14}" y="{legend_y + 9}" font-size="10">{_esc(label)}</text>'
        )
        lx += 14 + 7 * len(label) + 18

    width = x_end_far + 40
    height = _TOP + _PLOT_H + _BOTTOM
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height}" viewBox="0 0 {width:.0f} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<g font-family="Helvetica, Arial, sans-serif" fill="#222">',
    ]
    if title:
        head.append(
            f'<text x="{_LEFT}" y="14" font-size="13" font-weight="bold">{_esc(title)}</text>'
        )
    return "\n".join(head + body + ["</g>", "</svg>"]) + "\n"


def write_metrics_panel(
    path: str | Path, rows: Sequence[tuple[str, ScoreReport]], title: str = ""
) -> None:
    Path(path).write_text(metrics_panel_svg(rows, title), encoding="utf-8")
