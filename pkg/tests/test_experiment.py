"""Experiment engine: config round trips, standalone scoring, the chance
baseline, full micro runs, and artifact determinism."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from seizeval.errors import AlignmentError, ExperimentError, ValidationError
from seizeval.experiment import (
    ExperimentConfig,
    config_from_mapping,
    config_to_mapping,
    load_config,
    permutation_episode_f1,
    run_experiment,
    save_config,
    score_only,
)
from seizeval.features import WindowingConfig
from seizeval.postprocess import PostprocessConfig
from seizeval.predictor import PredictorConfig
from seizeval.timeline import Event, write_annotations

ARTIFACTS = [
    "config.yaml",
    "foldplans.json",
    "fold_reports.csv",
    "subject_reports.csv",
    "report.json",
    "panels.svg",
]


def micro_config(out_dir, **over):
    """A complete experiment small enough to run in a couple of seconds."""
    base = dict(
        source="synthetic",
        arrangement="fact_k",
        factor_k=1,
        cv="l1o",
        scope="personalized",
        windowing=WindowingConfig(window_s=4.0, step_s=1.0),
        postprocess=PostprocessConfig(),
        predictor=PredictorConfig(n_trees=10),
        seed=20260823,
        out_dir=str(out_dir),
        synth_subjects=2,
        synth_hours=0.3,
        synth_fs=128.0,
        synth_channels=2,
        synth_seizures_mean=2.0,
        synth_seizures_sd=0.1,
        synth_len_mean_s=40.0,
        synth_len_sd_s=5.0,
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestConfig:
    def test_yaml_round_trip(self, tmp_path):
        cfg = micro_config(tmp_path / "run", aggregation="pooled", jobs=2)
        path = tmp_path / "config.yaml"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_flat_keys_reach_nested_configs(self):
        cfg = config_from_mapping(
            {"ws": 2.0, "wss": 0.25, "smooth_s": 6.0, "merge_gap_s": 120.0,
             "n_trees": 7, "max_depth": 3}
        )
        assert cfg.windowing == WindowingConfig(window_s=2.0, step_s=0.25)
        assert cfg.postprocess.smooth_window_s == 6.0
        assert cfg.postprocess.merge_gap_s == 120.0
        assert cfg.predictor.n_trees == 7
        assert cfg.predictor.max_depth == 3

    def test_mapping_round_trip(self):
        cfg = micro_config("x", aggregation="pooled")
        assert config_from_mapping(config_to_mapping(cfg)) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown config key"):
            config_from_mapping({"learning_rate": 0.1})

    def test_aggregation_aliases_accepted(self):
        for name in ("fold_average", "pooled", "micro", "macro"):
            assert config_from_mapping({"aggregation": name}).aggregation == name
        with pytest.raises(ValidationError):
            config_from_mapping({"aggregation": "median"})

    def test_l1o_needs_single_seizure_files(self):
        with pytest.raises(ValidationError, match="one seizure per file"):
            ExperimentConfig(arrangement="win_h", cv="l1o")
        ExperimentConfig(arrangement="win_h", cv="tscv")

    def test_edf_source_requires_data_dir(self):
        with pytest.raises(ValidationError, match="data_dir"):
            ExperimentConfig(source="edf_dir")

    def test_jobs_positive(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(jobs=0)

    def test_empty_yaml_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(path) == ExperimentConfig()


class TestScoreOnly:
    def _csv(self, tmp_path, name, rows):
        path = tmp_path / name
        write_annotations(path, rows)
        return path

    def test_identical_files_score_perfectly(self, tmp_path):
        rows = [
            ("s01", "s01_00", Event(10.0, 20.0)),
            ("s01", "s01_00", Event(40.0, 50.0)),
        ]
        ref = self._csv(tmp_path, "ref.csv", rows)
        hyp = self._csv(tmp_path, "hyp.csv", rows)
        rep = score_only(ref, hyp)
        assert rep.sensitivity_ep == 1.0
        assert rep.precision_ep == 1.0
        assert rep.f1_ep == 1.0
        assert rep.f1_dur == 1.0
        assert rep.f1_de == 1.0
        assert rep.far_per_day == 0.0

    def test_disjoint_hypothesis_scores_zero_sensitivity(self, tmp_path):
        ref = self._csv(tmp_path, "ref.csv", [("s01", "s01_00", Event(10.0, 20.0))])
        hyp = self._csv(tmp_path, "hyp.csv", [("s01", "s01_00", Event(50.0, 60.0))])
        rep = score_only(ref, hyp)
        assert rep.sensitivity_ep == 0.0
        assert rep.precision_ep == 0.0
        assert rep.far_per_day > 0.0

    def test_partial_overlap_counts(self, tmp_path):
        # two reference events; one hypothesis hits, the other is noise
        ref = self._csv(
            tmp_path, "ref.csv",
            [("s01", "s01_00", Event(10.0, 20.0)), ("s01", "s01_00", Event(40.0, 50.0))],
        )
        hyp = self._csv(
            tmp_path, "hyp.csv",
            [("s01", "s01_00", Event(12.0, 18.0)), ("s01", "s01_00", Event(70.0, 80.0))],
        )
        rep = score_only(ref, hyp)
        assert rep.sensitivity_ep == 0.5
        assert rep.precision_ep == 0.5
        assert rep.f1_ep == 0.5
        assert rep.sensitivity_dur == pytest.approx(6.0 / 20.0)
        # one event-level false alarm over the default 80 s span
        assert rep.far_per_day == pytest.approx(86400.0 / 80.0)

    def test_duration_override_changes_far(self, tmp_path):
        ref = self._csv(tmp_path, "ref.csv", [("s01", "s01_00", Event(10.0, 20.0))])
        hyp = self._csv(tmp_path, "hyp.csv", [("s01", "s01_00", Event(50.0, 60.0))])
        rep = score_only(ref, hyp, duration_s=86400.0)
        assert rep.far_per_day == pytest.approx(1.0)

    def test_multiple_files_average_by_default(self, tmp_path):
        ref = self._csv(
            tmp_path, "ref.csv",
            [("s01", "s01_00", Event(10.0, 20.0)), ("s01", "s01_01", Event(10.0, 20.0))],
        )
        hyp = self._csv(
            tmp_path, "hyp.csv",
            [("s01", "s01_00", Event(10.0, 20.0)), ("s01", "s01_01", Event(50.0, 60.0))],
        )
        rep = score_only(ref, hyp, duration_s=100.0)
        assert rep.sensitivity_ep == 0.5  # (1 + 0) / 2

    def test_unknown_hypothesis_file_rejected(self, tmp_path):
        ref = self._csv(tmp_path, "ref.csv", [("s01", "s01_00", Event(10.0, 20.0))])
        hyp = self._csv(tmp_path, "hyp.csv", [("s01", "s01_99", Event(10.0, 20.0))])
        with pytest.raises(AlignmentError, match="s01_99"):
            score_only(ref, hyp)

    def test_empty_reference_rejected(self, tmp_path):
        ref = self._csv(tmp_path, "ref.csv", [])
        hyp = self._csv(tmp_path, "hyp.csv", [])
        with pytest.raises(AlignmentError, match="no events"):
            score_only(ref, hyp)


class TestPermutationBaseline:
    REF = [Event(100.0, 160.0), Event(500.0, 550.0)]
    HYP = [Event(105.0, 150.0), Event(520.0, 560.0)]

    def test_deterministic_given_seed(self):
        a = permutation_episode_f1(self.REF, self.HYP, 3600.0, 50, seed=1)
        b = permutation_episode_f1(self.REF, self.HYP, 3600.0, 50, seed=1)
        assert np.array_equal(a, b)

    def test_shape_and_range(self):
        out = permutation_episode_f1(self.REF, self.HYP, 3600.0, 64, seed=2)
        assert out.shape == (64,)
        assert np.all((out >= 0.0) & (out <= 1.0))

    def test_chance_level_sits_below_a_real_match(self):
        # the aligned hypothesis scores F1 = 1; shifted versions rarely do
        out = permutation_episode_f1(self.REF, self.HYP, 3600.0, 200, seed=3)
        assert np.quantile(out, 0.95) < 1.0
        assert out.mean() < 0.5


class TestRunExperiment:
    def test_artifacts_and_summary(self, tmp_path):
        cfg = micro_config(tmp_path / "run")
        summary = run_experiment(cfg)
        out = Path(summary.out_dir)
        for name in ARTIFACTS:
            assert (out / name).exists(), name
        assert not (out / "INCOMPLETE").exists()
        assert [s for s, _ in summary.subject_reports] == ["s01", "s02"]
        assert set(summary.plans) == {"s01", "s02"}
        assert 0.0 <= summary.average.f1_ep <= 1.0

    def test_report_json_contents(self, tmp_path):
        cfg = micro_config(tmp_path / "run")
        run_experiment(cfg)
        doc = json.loads((tmp_path / "run" / "report.json").read_text())
        assert set(doc) == {"average", "subjects", "versions"}
        assert sorted(doc["subjects"]) == ["s01", "s02"]
        for lib in ("seizeval", "numpy", "scipy", "scikit-learn"):
            assert lib in doc["versions"]
        assert doc["average"]["f1_ep"] == pytest.approx(
            np.mean([doc["subjects"][s]["f1_ep"] for s in doc["subjects"]])
        )

    def test_fold_reports_cover_every_fold(self, tmp_path):
        cfg = micro_config(tmp_path / "run")
        summary = run_experiment(cfg)
        lines = (tmp_path / "run" / "fold_reports.csv").read_text().splitlines()
        n_folds = sum(len(plan.folds) for plan in summary.plans.values())
        assert len(lines) == 1 + n_folds
        assert lines[0].startswith("subject,fold,test_files,")

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = micro_config(tmp_path / "run")
        run_experiment(cfg)
        before = {n: (tmp_path / "run" / n).read_bytes() for n in ARTIFACTS}
        run_experiment(cfg)
        after = {n: (tmp_path / "run" / n).read_bytes() for n in ARTIFACTS}
        assert before == after

    def test_separable_micro_run_detects_seizures(self, tmp_path):
        cfg = micro_config(tmp_path / "run", synth_gain=8.0)
        summary = run_experiment(cfg)
        assert summary.average.sensitivity_ep > 0.5

    def test_generalized_scope(self, tmp_path):
        cfg = micro_config(
            tmp_path / "run", scope="generalized", arrangement="stos", cv="tscv"
        )
        summary = run_experiment(cfg)
        assert set(summary.plans) == {"all"}
        assert summary.plans["all"].scheme == "loso"
        assert [s for s, _ in summary.subject_reports] == ["s01", "s02"]

    def test_threshold_baseline_predictor(self, tmp_path):
        cfg = micro_config(
            tmp_path / "run",
            predictor=PredictorConfig(
                kind="threshold_baseline",
                threshold_feature="line_length",
                threshold_value=1e9,  # never fires: a clean all-negative run
            ),
        )
        summary = run_experiment(cfg)
        assert summary.average.far_per_day == 0.0
        assert summary.average.sensitivity_ep == 0.0

    def test_failed_stage_names_itself_and_leaves_marker(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        cfg = micro_config(
            tmp_path / "run", source="edf_dir", data_dir=str(empty)
        )
        with pytest.raises(ExperimentError, match=r"\[data\]"):
            run_experiment(cfg)
        assert (tmp_path / "run" / "INCOMPLETE").exists()

    def test_jobs_do_not_change_results(self, tmp_path):
        a = run_experiment(micro_config(tmp_path / "a", jobs=1))
        b = run_experiment(micro_config(tmp_path / "b", jobs=2))
        assert a.average == b.average


class TestFitFallback:
    def test_single_class_fold_falls_back_to_threshold(self):
        from seizeval.experiment import _fit_with_fallback
        from seizeval.features import FeatureMatrix

        rng = np.random.default_rng(0)
        train = FeatureMatrix(
            values=rng.standard_normal((50, 2)),
            window_times=np.arange(50.0),
            labels=np.zeros(50, dtype=np.uint8),
            columns=["ch00_line_length", "ch00_mean_amp"],
            fs=1.0,
            n_samples=50,
            window_s=1.0,
            step_s=1.0,
        )
        model = _fit_with_fallback(train, PredictorConfig(n_trees=5))
        assert model.config.kind == "threshold_baseline"
        col = train.values[:, 0]
        assert model.config.threshold_value == pytest.approx(
            col.mean() + 3.0 * col.std()
        )
