"""Duration-level, episode-level and overlap-weighted scoring of detections.

Three scorers share one counts container:

* :func:`score_duration` -- sample-by-sample confusion counts (every sample is
  one epoch), weighting long events by their length;
* :func:`score_episode` -- any-overlap event counting: a reference event is a
  hit as soon as one predicted event touches it, regardless of coverage;
* :func:`score_taes` -- time-aligned event scoring: the fraction of temporal
  overlap weights the hit/miss/false-alarm contributions, so counts become
  fractional.

:func:`finalize_report` turns counts into the sensitivity/precision/F1 panel
plus the false alarm rate per day, and :func:`aggregate_folds` combines
per-fold (per test file) outputs in the two averaging modes whose divergence
this toolkit exists to measure.

Naming note: averaging per-fold metrics vs. pooling predictions before scoring
are called micro- and macro-averaging in parts of the literature, with
inconsistent assignment.  This package uses the neutral names ``fold_average``
and ``pooled``; the CLI accepts ``micro``/``macro`` as aliases for
``fold_average``/``pooled`` respectively.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import AlignmentError, DomainError, ValidationError
from .timeline import Event, LabelSeries, labels_to_events, validate_events

__all__ = [
    "MetricCounts",
    "ScoreReport",
    "AggregationMode",
    "score_duration",
    "score_episode",
    "score_taes",
    "far_per_day",
    "finalize_report",
    "aggregate_folds",
    "average_reports",
    "report_from_dict",
    "report_to_row",
    "write_report_csv",
    "REPORT_COLUMNS",
    "SECONDS_PER_DAY",
]

SECONDS_PER_DAY = 86400.0

AggregationMode = Literal["fold_average", "pooled"]

AGGREGATION_ALIASES = {
    "fold_average": "fold_average",
    "pooled": "pooled",
    # Literature aliases; assignment of micro/macro varies between papers, so
    # the neutral names above are canonical.
    "micro": "fold_average",
    "macro": "pooled",
}


@dataclass(frozen=True)
class MetricCounts:
    """Confusion counts; reals because overlap-weighted scoring is fractional.

    Unit is samples for duration scoring and events for episode/time-aligned
    scoring.  ``tn`` is fixed to 0 at event level: background episodes are
    unbounded in number, so a true-negative count is undefined there.
    """

    tp: float = 0.0
    fp: float = 0.0
    fn: float = 0.0
    tn: float = 0.0

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValidationError(f"count {name} must be >= 0, got {getattr(self, name)}")

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ScoreReport:
    """The six-plus-one metric panel: episode and duration level rates, their
    combined F1, false alarms per day, and the raw counts behind them."""

    sensitivity_ep: float
    precision_ep: float
    f1_ep: float
    sensitivity_dur: float
    precision_dur: float
    f1_dur: float
    f1_de: float
    far_per_day: float
    counts_ep: MetricCounts
    counts_dur: MetricCounts
    test_duration_s: float

    def to_dict(self) -> dict:
        """JSON-ready mapping using the exact field names of this type."""
        return {
            "sensitivity_ep": self.sensitivity_ep,
            "precision_ep": self.precision_ep,
            "f1_ep": self.f1_ep,
            "sensitivity_dur": self.sensitivity_dur,
            "precision_dur": self.precision_dur,
            "f1_dur": self.f1_dur,
            "f1_de": self.f1_de,
            "far_per_day": self.far_per_day,
            "counts_ep": vars_counts(self.counts_ep),
            "counts_dur": vars_counts(self.counts_dur),
            "test_duration_s": self.test_duration_s,
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def vars_counts(c: MetricCounts) -> dict:
    return {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}


def report_from_dict(doc: dict) -> ScoreReport:
    """Rebuild a report from its :meth:`ScoreReport.to_dict` form."""
    return ScoreReport(
        sensitivity_ep=doc["sensitivity_ep"],
        precision_ep=doc["precision_ep"],
        f1_ep=doc["f1_ep"],
        sensitivity_dur=doc["sensitivity_dur"],
        precision_dur=doc["precision_dur"],
        f1_dur=doc["f1_dur"],
        f1_de=doc["f1_de"],
        far_per_day=doc["far_per_day"],
        counts_ep=MetricCounts(**doc["counts_ep"]),
        counts_dur=MetricCounts(**doc["counts_dur"]),
        test_duration_s=doc["test_duration_s"],
    )


# Fixed column order of the flat CSV serialization of a ScoreReport.
REPORT_COLUMNS = [
    "sensitivity_ep",
    "precision_ep",
    "f1_ep",
    "sensitivity_dur",
    "precision_dur",
    "f1_dur",
    "f1_de",
    "far_per_day",
    "counts_ep_tp",
    "counts_ep_fp",
    "counts_ep_fn",
    "counts_ep_tn",
    "counts_dur_tp",
    "counts_dur_fp",
    "counts_dur_fn",
    "counts_dur_tn",
    "test_duration_s",
]


def report_to_row(report: ScoreReport) -> list[float]:
    """Flatten a report to the fixed :data:`REPORT_COLUMNS` order."""
    return [
        report.sensitivity_ep,
        report.precision_ep,
        report.f1_ep,
        report.sensitivity_dur,
        report.precision_dur,
        report.f1_dur,
        report.f1_de,
        report.far_per_day,
        report.counts_ep.tp,
        report.counts_ep.fp,
        report.counts_ep.fn,
        report.counts_ep.tn,
        report.counts_dur.tp,
        report.counts_dur.fp,
        report.counts_dur.fn,
        report.counts_dur.tn,
        report.test_duration_s,
    ]


def write_report_csv(
    path: str | Path,
    rows: Sequence[tuple[Sequence[str], ScoreReport]],
    key_columns: Sequence[str],
) -> None:
    """Write reports as CSV rows prefixed by identifying key columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(key_columns) + REPORT_COLUMNS)
        for keys, report in rows:
            writer.writerow([*keys, *(repr(v) for v in report_to_row(report))])


# ---------------------------------------------------------------------------
# Scorers
# ---------------------------------------------------------------------------


def score_duration(ref: LabelSeries, hyp: LabelSeries) -> MetricCounts:
    """Sample-by-sample confusion counts between reference and hypothesis.

    Both series must share length, sampling rate and origin; the counts sum
    to the number of scored samples.
    """
    if len(ref) != len(hyp):
        raise AlignmentError(f"length mismatch: ref has {len(ref)} samples, hyp {len(hyp)}")
    if ref.fs != hyp.fs:
        raise AlignmentError(f"sampling rate mismatch: ref fs={ref.fs}, hyp fs={hyp.fs}")
    if ref.origin != hyp.origin:
        raise AlignmentError(f"origin mismatch: ref at {ref.origin}, hyp at {hyp.origin}")
    r = ref.labels
    h = hyp.labels
    tp = int(np.count_nonzero(r & h))
    fp = int(np.count_nonzero(~r.astype(bool) & h.astype(bool)))
    fn = int(np.count_nonzero(r.astype(bool) & ~h.astype(bool)))
    tn = len(ref) - tp - fp - fn
    return MetricCounts(float(tp), float(fp), float(fn), float(tn))


def score_episode(
    ref_events: Sequence[Event], hyp_events: Sequence[Event]
) -> MetricCounts:
    """Any-overlap event counting.

    Each reference event overlapped by at least one hypothesis event counts
    one TP (at most one, however many hypotheses touch it); each untouched
    reference event one FN; each hypothesis event overlapping no reference
    one FP.  Hypotheses that overlap some reference are never false positives.
    """
    validate_events(ref_events)
    validate_events(hyp_events)
    ref_hit = [False] * len(ref_events)
    hyp_hit = [False] * len(hyp_events)
    j_lo = 0
    for i, r in enumerate(ref_events):
        # hyp events are sorted; skip those entirely before r once and for all
        while j_lo < len(hyp_events) and hyp_events[j_lo].end <= r.start:
            j_lo += 1
        j = j_lo
        while j < len(hyp_events) and hyp_events[j].start < r.end:
            if r.intersects(hyp_events[j]):
                ref_hit[i] = True
                hyp_hit[j] = True
            j += 1
    tp = sum(ref_hit)
    fn = len(ref_events) - tp
    fp = len(hyp_events) - sum(hyp_hit)
    return MetricCounts(float(tp), float(fp), float(fn), 0.0)


def score_taes(
    ref_events: Sequence[Event], hyp_events: Sequence[Event]
) -> MetricCounts:
    """Overlap-weighted event counting.

    Per reference event r:  ``tp += |r ∩ union(hyp)| / |r|`` and
    ``fn += 1 - |r ∩ union(hyp)| / |r|``.  Per hypothesis event h:
    ``fp += |h \\ union(ref)| / |h|``.  Both lists being internally disjoint,
    the union intersections reduce to sums of pairwise overlaps.
    """
    validate_events(ref_events)
    validate_events(hyp_events)
    tp = 0.0
    fn = 0.0
    for r in ref_events:
        covered = sum(r.overlap(h) for h in hyp_events)
        frac = covered / r.duration
        tp += frac
        fn += 1.0 - frac
    fp = 0.0
    for h in hyp_events:
        covered = sum(h.overlap(r) for r in ref_events)
        fp += (h.duration - covered) / h.duration
    # clamp tiny negative float residue from the subtractions
    return MetricCounts(tp, max(fp, 0.0), max(fn, 0.0), 0.0)


def far_per_day(counts_ep: MetricCounts, test_duration_s: float) -> float:
    """False-alarm events linearly scaled to a per-day rate.

    Uses the event-level (post-processed) FP count: alarms are events, not
    samples.  On short test spans the linear scaling extrapolates heavily;
    that is exactly the effect the toolkit makes visible.
    """
    if not test_duration_s > 0:
        raise DomainError(f"test duration must be > 0 s, got {test_duration_s}")
    return counts_ep.fp * SECONDS_PER_DAY / test_duration_s


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


def _rate(num: float, den: float, zero_den_value: float) -> float:
    return num / den if den > 0 else zero_den_value


def _rates_from_counts(c: MetricCounts) -> tuple[float, float, float]:
    """Sensitivity, precision, F1 with the zero-denominator conventions.

    A rate whose denominator is 0 is 0, except on a perfect-negative input
    (nothing to detect and nothing detected wrongly) where sensitivity and
    precision are 1, so seizure-free files score cleanly instead of NaN.
    """
    tpr = _rate(c.tp, c.tp + c.fn, 1.0 if c.fp == 0 else 0.0)
    ppv = _rate(c.tp, c.tp + c.fp, 1.0 if c.fn == 0 else 0.0)
    f1 = _rate(2.0 * tpr * ppv, tpr + ppv, 0.0)
    return tpr, ppv, f1


def finalize_report(
    counts_dur: MetricCounts,
    counts_ep: MetricCounts,
    test_duration_s: float,
) -> ScoreReport:
    """Derive the full metric panel from duration- and episode-level counts."""
    tpr_d, ppv_d, f1_d = _rates_from_counts(counts_dur)
    tpr_e, ppv_e, f1_e = _rates_from_counts(counts_ep)
    return ScoreReport(
        sensitivity_ep=tpr_e,
        precision_ep=ppv_e,
        f1_ep=f1_e,
        sensitivity_dur=tpr_d,
        precision_dur=ppv_d,
        f1_dur=f1_d,
        f1_de=(f1_e + f1_d) / 2.0,
        far_per_day=far_per_day(counts_ep, test_duration_s),
        counts_ep=counts_ep,
        counts_dur=counts_dur,
        test_duration_s=test_duration_s,
    )


def _score_pair(ref: LabelSeries, hyp: LabelSeries) -> tuple[MetricCounts, MetricCounts]:
    counts_dur = score_duration(ref, hyp)
    counts_ep = score_episode(labels_to_events(ref), labels_to_events(hyp))
    return counts_dur, counts_ep


def aggregate_folds(
    fold_outputs: Sequence[tuple[LabelSeries, LabelSeries]],
    mode: AggregationMode = "pooled",
) -> ScoreReport:
    """Combine per-fold (reference, hypothesis) series into one report.

    Each element is the test output of one fold -- one test file, already
    post-processed.  ``pooled`` appends all folds in the given temporal order
    and scores once; events are extracted per fold first, so runs touching a
    fold boundary are never merged across it.  ``fold_average`` scores every
    fold separately and averages each rate arithmetically (unweighted).

    In both modes the false alarm rate is computed from the pooled event FP
    count over the total test duration: per-fold FAR scaling is degenerate on
    short folds.  In ``fold_average`` reports the counts fields hold the
    pooled sums while the rates are fold averages.
    """
    mode = AGGREGATION_ALIASES.get(mode, mode)
    if mode not in ("fold_average", "pooled"):
        raise DomainError(f"unknown aggregation mode {mode!r}")
    if not fold_outputs:
        raise DomainError("aggregate_folds requires at least one fold")

    per_fold = [_score_pair(ref, hyp) for ref, hyp in fold_outputs]
    pooled_dur = sum((d for d, _ in per_fold), MetricCounts())
    pooled_ep = sum((e for _, e in per_fold), MetricCounts())
    total_duration = sum(ref.duration_s for ref, _ in fold_outputs)

    if mode == "pooled":
        return finalize_report(pooled_dur, pooled_ep, total_duration)

    reports = [
        finalize_report(d, e, ref.duration_s)
        for (d, e), (ref, _) in zip(per_fold, fold_outputs)
    ]
    mean = lambda xs: float(np.mean(xs))
    return ScoreReport(
        sensitivity_ep=mean([r.sensitivity_ep for r in reports]),
        precision_ep=mean([r.precision_ep for r in reports]),
        f1_ep=mean([r.f1_ep for r in reports]),
        sensitivity_dur=mean([r.sensitivity_dur for r in reports]),
        precision_dur=mean([r.precision_dur for r in reports]),
        f1_dur=mean([r.f1_dur for r in reports]),
        f1_de=mean([r.f1_de for r in reports]),
        far_per_day=far_per_day(pooled_ep, total_duration),
        counts_ep=pooled_ep,
        counts_dur=pooled_dur,
        test_duration_s=total_duration,
    )


def average_reports(reports: Sequence[ScoreReport]) -> ScoreReport:
    """Unweighted arithmetic mean of reports (e.g. across subjects).

    All rate fields including the false alarm rate are averaged; counts and
    test durations are summed so the totals stay auditable.
    """
    if not reports:
        raise DomainError("average_reports requires at least one report")
    mean = lambda xs: float(np.mean(xs))
    return ScoreReport(
        sensitivity_ep=mean([r.sensitivity_ep for r in reports]),
        precision_ep=mean([r.precision_ep for r in reports]),
        f1_ep=mean([r.f1_ep for r in reports]),
        sensitivity_dur=mean([r.sensitivity_dur for r in reports]),
        precision_dur=mean([r.precision_dur for r in reports]),
        f1_dur=mean([r.f1_dur for r in reports]),
        f1_de=mean([r.f1_de for r in reports]),
        far_per_day=mean([r.far_per_day for r in reports]),
        counts_ep=sum((r.counts_ep for r in reports), MetricCounts()),
        counts_dur=sum((r.counts_dur for r in reports), MetricCounts()),
        test_duration_s=float(sum(r.test_duration_s for r in reports)),
    )
