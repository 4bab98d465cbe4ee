"""
Scoring a seizure hypothesis against a reference annotation
===========================================================

A detector's output and a clinician's annotation are both timelines of
events.  The same pair can be scored three ways, and the numbers differ:

* duration level: agreement counted sample by sample
* episode level: any overlap between a reference and a hypothesis event
  counts the reference as detected
* time-aligned level: credit is the fraction of the event actually covered

This script walks through one small example by hand.
"""

import numpy as np

from seizeval.metrics import (
    far_per_day,
    finalize_report,
    score_duration,
    score_episode,
    score_taes,
)
from seizeval.timeline import Event, events_to_labels

# A 100 s record with two annotated seizures.  The detector finds the first
# one (a little short on both sides) and raises one false alarm at 70 s.
fs = 10.0
duration_s = 100.0
reference = [Event(10.0, 20.0), Event(40.0, 50.0)]
hypothesis = [Event(12.0, 18.0), Event(70.0, 80.0)]

ref_series = events_to_labels(reference, fs, duration_s)
hyp_series = events_to_labels(hypothesis, fs, duration_s)

# Duration level: 60 of the 100 seizure-or-alarm samples agree.
counts_dur = score_duration(ref_series, hyp_series)
print("duration counts:", counts_dur)

# Episode level: one hit, one miss, one false alarm.
counts_ep = score_episode(reference, hypothesis)
print("episode counts: ", counts_ep)

# Time-aligned level: the hit is worth only 6/10 of a true positive
# because the hypothesis covers 6 of the 10 seizure seconds.
counts_taes = score_taes(reference, hypothesis)
print("time-aligned:   ", counts_taes)

# The full panel combines episode and duration rates and adds the false
# alarm rate, expressed per 24 h of test data.
report = finalize_report(counts_dur, counts_ep, duration_s)
print()
print(f"sensitivity (episode):  {report.sensitivity_ep:.3f}")
print(f"precision   (episode):  {report.precision_ep:.3f}")
print(f"F1          (episode):  {report.f1_ep:.3f}")
print(f"sensitivity (duration): {report.sensitivity_dur:.3f}")
print(f"precision   (duration): {report.precision_dur:.3f}")
print(f"F1          (duration): {report.f1_dur:.3f}")
print(f"combined F1:            {report.f1_de:.3f}")
print(f"false alarms / day:     {report.far_per_day:.1f}")

# One false alarm in 100 s extrapolates to 864 a day: short test sets make
# FAR look dramatic, which is the point of reporting it per day.
assert report.far_per_day == far_per_day(counts_ep, duration_s)
assert np.isclose(report.far_per_day, 864.0)

# Edge conventions: a perfect empty prediction on an empty reference is a
# clean 1.0 panel, not NaN.
empty = finalize_report(
    score_duration(events_to_labels([], fs, 10.0), events_to_labels([], fs, 10.0)),
    score_episode([], []),
    10.0,
)
print()
print("empty-vs-empty F1:", empty.f1_ep, "FAR:", empty.far_per_day)
