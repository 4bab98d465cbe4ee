"""
From raw window decisions to clinically readable events
=======================================================

A window classifier emits a 0/1 decision every step.  Raw decisions
flicker: single spurious positives, short dropouts inside a seizure, and
one seizure chopped into several fragments.  Two causal operations clean
this up:

* majority smoothing over a trailing window
* merging events separated by less than a gap, then dropping the tiny ones

Both are deliberately simple so that a reader can reimplement them from
the text; this script shows their effect step by step.
"""

import numpy as np

from seizeval.postprocess import PostprocessConfig, merge_close_events, smooth_majority
from seizeval.timeline import Event, LabelSeries, labels_to_events

fs = 1.0

# One decision per second for two minutes.  A real seizure spans 30..60 s
# but the detector drops out briefly at 40 s and fires alone at 100 s.
labels = np.zeros(120, dtype=np.uint8)
labels[30:40] = 1
labels[42:60] = 1
labels[100] = 1
raw = LabelSeries(labels, fs)
print("raw events:     ", labels_to_events(raw))

# A 5 s trailing majority removes the lone positive and most flicker.
cfg = PostprocessConfig(smooth_window_s=5.0, merge_gap_s=30.0, min_event_s=0.0)
smoothed = smooth_majority(raw, cfg)
print("after smoothing:", labels_to_events(smoothed))

# Merging closes the remaining split: any two events closer than 30 s
# become one.  Merging is transitive, so chains collapse in one call.
events = labels_to_events(smoothed)
merged = merge_close_events(events, cfg)
print("after merging:  ", merged)

# Merging is idempotent: applying it again changes nothing.  That is what
# makes the reported event counts stable.
assert merge_close_events(merged, cfg) == merged

# min_event_s discards events shorter than a floor, applied after merging
# so that a run of close short bursts still counts once.
bursty = [Event(10.0, 11.0), Event(13.0, 14.0), Event(80.0, 81.0)]
strict = PostprocessConfig(smooth_window_s=1.0, merge_gap_s=5.0, min_event_s=2.0)
print("\nbursts:", bursty)
print("merged then floored:", merge_close_events(bursty, strict))
