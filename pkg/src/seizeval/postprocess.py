"""Smoothing of raw per-sample predictions and merging of nearby events.

Two rules, applied in this order by the pipeline:

1. :func:`smooth_majority` -- a trailing (causal) windowed majority vote over
   the predicted labels.  The window is causal, not centered, because in an
   online setting no future samples exist; this shifts detected onsets by up
   to the window length and is therefore stated loudly here.  For binary
   labels a moving average thresholded at 0.5 is the same operator.
2. :func:`merge_close_events` -- events closer than a gap are merged into
   their hull, then events shorter than a minimum are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .timeline import Event, LabelSeries, validate_events

__all__ = ["PostprocessConfig", "smooth_majority", "merge_close_events"]


@dataclass(frozen=True)
class PostprocessConfig:
    """Label post-processing parameters.

    ``smooth_window_s``: length of the causal majority window in seconds.
    ``merge_gap_s``: events separated by less than this are merged into one.
    ``min_event_s``: events shorter than this are dropped after merging
    (0 disables the rule).
    """

    smooth_window_s: float = 5.0
    merge_gap_s: float = 30.0
    min_event_s: float = 0.0

    def __post_init__(self):
        if not self.smooth_window_s > 0:
            raise ValidationError(f"smooth_window_s must be > 0, got {self.smooth_window_s}")
        if self.merge_gap_s < 0:
            raise ValidationError(f"merge_gap_s must be >= 0, got {self.merge_gap_s}")
        if self.min_event_s < 0:
            raise ValidationError(f"min_event_s must be >= 0, got {self.min_event_s}")


def smooth_majority(hyp: LabelSeries, cfg: PostprocessConfig) -> LabelSeries:
    """Causal windowed majority vote over a binary label series.

    Output sample ``i`` is 1 iff strictly more than half of the labels in the
    trailing window (samples ``i-w+1 .. i``, truncated at the series start)
    are 1, with ``w = round(smooth_window_s * fs)``.  Ties resolve to 0,
    biasing against false alarms.  Output length equals input length.
    """
    w = max(1, int(round(cfg.smooth_window_s * hyp.fs)))
    x = hyp.labels.astype(np.int64)
    if x.size == 0:
        return hyp
    cs = np.concatenate(([0], np.cumsum(x)))
    idx = np.arange(x.size)
    ones = cs[idx + 1] - cs[np.maximum(idx + 1 - w, 0)]
    width = np.minimum(idx + 1, w)
    out = (2 * ones > width).astype(np.uint8)
    return LabelSeries(out, hyp.fs, hyp.origin)


def merge_close_events(
    events: Sequence[Event], cfg: PostprocessConfig
) -> list[Event]:
    """Merge events whose gap is below ``merge_gap_s``, then drop short ones.

    Consecutive events with gap < ``merge_gap_s`` are replaced by their hull,
    transitively, so the result has pairwise gaps >= ``merge_gap_s``.  Events
    shorter than ``min_event_s`` are removed afterwards.  Idempotent.
    """
    validate_events(events)
    merged: list[Event] = []
    for ev in events:
        if merged and ev.start - merged[-1].end < cfg.merge_gap_s:
            last = merged[-1]
            merged[-1] = Event(last.start, max(last.end, ev.end), last.label)
        else:
            merged.append(ev)
    if cfg.min_event_s > 0:
        merged = [ev for ev in merged if ev.duration >= cfg.min_event_s]
    return merged
