"""Scoring rules against independent oracles, conventions and aggregation."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from seizeval.errors import AlignmentError, DomainError, ValidationError
from seizeval.metrics import (
    AGGREGATION_ALIASES,
    REPORT_COLUMNS,
    MetricCounts,
    aggregate_folds,
    average_reports,
    far_per_day,
    finalize_report,
    report_from_dict,
    report_to_row,
    score_duration,
    score_episode,
    score_taes,
    write_report_csv,
)
from seizeval.timeline import Event, LabelSeries, events_to_labels, labels_to_events

from conftest import random_disjoint_events


# --- independent oracles ----------------------------------------------------


def oracle_duration(ref, hyp):
    """Per-sample confusion counts by an explicit Python loop."""
    tp = fp = fn = tn = 0
    for a, b in zip(ref.labels.tolist(), hyp.labels.tolist()):
        if a and b:
            tp += 1
        elif a:
            fn += 1
        elif b:
            fp += 1
        else:
            tn += 1
    return MetricCounts(float(tp), float(fp), float(fn), float(tn))


def oracle_episode(ref_events, hyp_events):
    """All-pairs overlap enumeration."""
    tp = sum(1 for r in ref_events if any(r.overlap(h) > 0 for h in hyp_events))
    fn = len(ref_events) - tp
    fp = sum(1 for h in hyp_events if all(h.overlap(r) == 0 for r in ref_events))
    return MetricCounts(float(tp), float(fp), float(fn), 0.0)


def oracle_taes(ref_events, hyp_events):
    """Fractional overlap bookkeeping, one pair at a time."""
    tp = fn = fp = 0.0
    for r in ref_events:
        frac = sum(r.overlap(h) for h in hyp_events) / r.duration
        tp += frac
        fn += 1.0 - frac
    for h in hyp_events:
        fp += (h.duration - sum(h.overlap(r) for r in ref_events)) / h.duration
    return MetricCounts(tp, max(fp, 0.0), max(fn, 0.0), 0.0)


binary_arrays = arrays(np.uint8, st.integers(1, 400), elements=st.integers(0, 1))


class TestScoreDuration:
    @given(binary_arrays, binary_arrays)
    @settings(max_examples=120, deadline=None)
    def test_matches_naive_loop(self, a, b):
        n = min(len(a), len(b))
        ref = LabelSeries(a[:n], fs=32.0)
        hyp = LabelSeries(b[:n], fs=32.0)
        assert score_duration(ref, hyp) == oracle_duration(ref, hyp)

    def test_counts_sum_to_samples(self):
        ref = LabelSeries([0, 1, 1, 0, 1], 1.0)
        hyp = LabelSeries([0, 1, 0, 1, 1], 1.0)
        assert score_duration(ref, hyp).total == 5

    def test_alignment_checks(self):
        with pytest.raises(AlignmentError, match="length"):
            score_duration(LabelSeries([0, 1], 1.0), LabelSeries([0], 1.0))
        with pytest.raises(AlignmentError, match="rate"):
            score_duration(LabelSeries([0], 1.0), LabelSeries([0], 2.0))
        with pytest.raises(AlignmentError, match="origin"):
            score_duration(LabelSeries([0], 1.0), LabelSeries([0], 1.0, origin=1.0))


class TestScoreEpisode:
    def test_any_overlap_is_a_hit(self):
        # one-sample touch counts; full containment counts once
        ref = [Event(10, 20)]
        assert score_episode(ref, [Event(19.9, 30)]).tp == 1
        assert score_episode(ref, [Event(0, 100)]).tp == 1

    def test_multiple_hyps_on_one_ref_count_once(self):
        ref = [Event(10, 20)]
        hyp = [Event(11, 12), Event(13, 14), Event(19, 25)]
        c = score_episode(ref, hyp)
        assert (c.tp, c.fp, c.fn) == (1, 0, 0)

    def test_one_hyp_covering_two_refs_counts_both(self):
        c = score_episode([Event(0, 10), Event(20, 30)], [Event(5, 25)])
        assert (c.tp, c.fp, c.fn) == (2, 0, 0)

    def test_detected_8_of_10_gives_sensitivity_08(self):
        # ten reference seizures, eight overlapped, two missed
        ref = [Event(i * 100.0, i * 100.0 + 50.0) for i in range(10)]
        hyp = [Event(i * 100.0 + 10.0, i * 100.0 + 20.0) for i in range(8)]
        c = score_episode(ref, hyp)
        assert (c.tp, c.fn) == (8, 2)
        report = finalize_report(MetricCounts(), c, test_duration_s=1000.0)
        assert report.sensitivity_ep == pytest.approx(0.8)

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        ref = random_disjoint_events(rng, 200.0)
        hyp = random_disjoint_events(rng, 200.0)
        got = score_episode(ref, hyp)
        want = oracle_episode(ref, hyp)
        assert got == want


class TestScoreTaes:
    def test_exact_match_is_unit_weight(self):
        c = score_taes([Event(0, 10)], [Event(0, 10)])
        assert (c.tp, c.fp, c.fn) == (1.0, 0.0, 0.0)

    def test_half_coverage(self):
        c = score_taes([Event(0, 10)], [Event(0, 5)])
        assert c.tp == pytest.approx(0.5)
        assert c.fn == pytest.approx(0.5)
        assert c.fp == pytest.approx(0.0)

    def test_spill_becomes_fractional_fp(self):
        # hyp of 20 s covers the 10 s ref entirely and spills 10 s
        c = score_taes([Event(10, 20)], [Event(5, 25)])
        assert c.tp == pytest.approx(1.0)
        assert c.fp == pytest.approx(0.5)

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        ref = random_disjoint_events(rng, 200.0)
        hyp = random_disjoint_events(rng, 200.0)
        got = score_taes(ref, hyp)
        want = oracle_taes(ref, hyp)
        assert got.tp == pytest.approx(want.tp, abs=1e-12)
        assert got.fp == pytest.approx(want.fp, abs=1e-12)
        assert got.fn == pytest.approx(want.fn, abs=1e-12)


class TestFar:
    def test_scales_fp_to_days(self):
        c = MetricCounts(fp=3.0)
        assert far_per_day(c, 86400.0) == 3.0
        assert far_per_day(c, 43200.0) == 6.0

    def test_requires_positive_duration(self):
        with pytest.raises(DomainError):
            far_per_day(MetricCounts(), 0.0)


class TestConventions:
    def test_perfect_prediction_all_ones(self):
        ref = LabelSeries([0, 1, 1, 0, 0, 1], 1.0)
        rep = finalize_report(
            score_duration(ref, ref),
            score_episode(labels_to_events(ref), labels_to_events(ref)),
            ref.duration_s,
        )
        for name in REPORT_COLUMNS[:7]:
            assert getattr(rep, name) == 1.0, name
        assert rep.far_per_day == 0.0

    def test_perfect_negative_file_scores_clean_ones(self):
        # nothing to find, nothing claimed: defined as perfect, not NaN
        ref = LabelSeries(np.zeros(100), 1.0)
        rep = finalize_report(
            score_duration(ref, ref), score_episode([], []), 100.0
        )
        assert rep.sensitivity_ep == 1.0
        assert rep.precision_ep == 1.0
        assert rep.far_per_day == 0.0
        assert not any(np.isnan(v) for v in report_to_row(rep))

    def test_zero_ref_with_false_alarms(self):
        c = MetricCounts(tp=0, fp=2, fn=0)
        rep = finalize_report(MetricCounts(tn=10, fp=5), c, 100.0)
        assert rep.sensitivity_ep == 0.0  # fp present: not a perfect negative
        assert rep.precision_ep == 0.0
        assert rep.far_per_day == pytest.approx(2 * 864.0)

    def test_zero_hyp_with_misses(self):
        c = MetricCounts(tp=0, fp=0, fn=3)
        rep = finalize_report(MetricCounts(fn=30, tn=70), c, 100.0)
        assert rep.sensitivity_ep == 0.0
        assert rep.precision_ep == 0.0  # misses exist: empty hyp is not perfect

    def test_f1_de_is_mean_of_levels(self):
        rep = finalize_report(
            MetricCounts(tp=50, fp=50), MetricCounts(tp=1, fn=1), 100.0
        )
        assert rep.f1_de == pytest.approx((rep.f1_ep + rep.f1_dur) / 2)


class TestAggregation:
    def _two_fold_fixture(self):
        """Fold A: 90 TP + 10 FP; fold B: 1 TP + 9 FP.

        Per-fold precisions 0.9 and 0.1 average to 0.5, while pooling gives
        91/110, the overestimation-by-averaging example in reverse.
        """
        ref_a = LabelSeries([1] * 90 + [0] * 10, 1.0)
        hyp_a = LabelSeries([1] * 100, 1.0)
        ref_b = LabelSeries([1] + [0] * 9, 1.0)
        hyp_b = LabelSeries([1] * 10, 1.0)
        return [(ref_a, hyp_a), (ref_b, hyp_b)]

    def test_fold_average_vs_pooled_divergence(self):
        folds = self._two_fold_fixture()
        fa = aggregate_folds(folds, "fold_average")
        po = aggregate_folds(folds, "pooled")
        assert fa.precision_dur == pytest.approx(0.5)
        assert po.precision_dur == pytest.approx(91 / 110)

    def test_single_fold_modes_agree(self):
        ref = LabelSeries([0, 1, 1, 0, 1, 0], 1.0)
        hyp = LabelSeries([0, 1, 0, 0, 1, 1], 1.0)
        fa = aggregate_folds([(ref, hyp)], "fold_average")
        po = aggregate_folds([(ref, hyp)], "pooled")
        assert report_to_row(fa) == report_to_row(po)

    def test_aliases_map_to_canonical_modes(self):
        folds = self._two_fold_fixture()
        assert report_to_row(aggregate_folds(folds, "micro")) == report_to_row(
            aggregate_folds(folds, "fold_average")
        )
        assert report_to_row(aggregate_folds(folds, "macro")) == report_to_row(
            aggregate_folds(folds, "pooled")
        )
        assert set(AGGREGATION_ALIASES.values()) == {"fold_average", "pooled"}

    def test_events_never_merge_across_fold_boundary(self):
        # a run ending fold 1 and a run starting fold 2 stay two events
        ref = LabelSeries([0, 0, 1, 1], 1.0)
        hyp = LabelSeries([0, 0, 1, 1], 1.0)
        ref2 = LabelSeries([1, 1, 0, 0], 1.0)
        hyp2 = LabelSeries([0, 0, 0, 0], 1.0)
        rep = aggregate_folds([(ref, hyp), (ref2, hyp2)], "pooled")
        assert rep.counts_ep.tp == 1
        assert rep.counts_ep.fn == 1  # second fold's seizure missed, not merged

    def test_far_pooled_in_both_modes(self):
        folds = self._two_fold_fixture()
        fa = aggregate_folds(folds, "fold_average")
        po = aggregate_folds(folds, "pooled")
        assert fa.far_per_day == po.far_per_day

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            aggregate_folds([], "pooled")
        with pytest.raises(DomainError):
            aggregate_folds(self._two_fold_fixture(), "bogus")

    def test_average_reports_means_rates_sums_counts(self):
        r1 = finalize_report(MetricCounts(tp=10), MetricCounts(tp=1), 100.0)
        r2 = finalize_report(MetricCounts(fn=10, tn=10), MetricCounts(fn=1), 100.0)
        avg = average_reports([r1, r2])
        assert avg.sensitivity_dur == pytest.approx(0.5)
        assert avg.counts_dur.tp == 10
        assert avg.counts_dur.fn == 10
        assert avg.test_duration_s == 200.0


class TestReportSerialization:
    def _report(self):
        return finalize_report(MetricCounts(tp=3, fp=1, fn=2, tn=4), MetricCounts(tp=1, fp=1), 50.0)

    def test_json_round_trip(self):
        rep = self._report()
        back = report_from_dict(json.loads(rep.to_json()))
        assert back == rep

    def test_row_matches_columns(self):
        row = report_to_row(self._report())
        assert len(row) == len(REPORT_COLUMNS)

    def test_csv_written_with_fixed_header(self, tmp_path):
        path = tmp_path / "r.csv"
        write_report_csv(path, [(("s01", "0"), self._report())], ["subject", "fold"])
        lines = path.read_text().splitlines()
        assert lines[0] == "subject,fold," + ",".join(REPORT_COLUMNS)
        assert lines[1].startswith("s01,0,")

    def test_negative_counts_rejected(self):
        with pytest.raises(ValidationError):
            MetricCounts(tp=-1)
