"""Filtering, per-window features and window/sample projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seizeval.errors import CapacityError, DomainError, SchemaError, ValidationError
from seizeval.features import (
    DEFAULT_BANDS,
    FEATURE_NAMES,
    BandDefinition,
    FeatureMatrix,
    WindowingConfig,
    band_powers,
    bandpass_filter,
    extract_features,
    line_length,
)
from seizeval.timeline import Event

from conftest import make_recording


class TestConfigs:
    def test_windowing_validation(self):
        with pytest.raises(ValidationError):
            WindowingConfig(window_s=4.0, step_s=0.0)
        with pytest.raises(ValidationError):
            WindowingConfig(window_s=1.0, step_s=2.0)
        assert WindowingConfig(4.0, 4.0).step_samples(256.0) == 1024

    def test_band_validation(self):
        with pytest.raises(ValidationError):
            BandDefinition("bad", 5.0, 5.0)
        with pytest.raises(ValidationError):
            BandDefinition("bad", -1.0, 5.0)

    def test_default_bands_and_feature_count(self):
        assert len(DEFAULT_BANDS) == 7
        assert len(FEATURE_NAMES) == 19
        by_name = {b.name: (b.lo_hz, b.hi_hz) for b in DEFAULT_BANDS}
        assert by_name["delta"] == (0.5, 4.0)
        assert by_name["theta"] == (4.0, 8.0)
        assert by_name["alpha"] == (8.0, 12.0)
        assert by_name["beta"] == (12.0, 30.0)
        assert by_name["gamma"] == (30.0, 45.0)
        assert by_name["lf1"] == (0.0, 0.5)
        assert by_name["lf2"] == (0.1, 0.5)


class TestBandpass:
    def test_5hz_preserved_within_5_percent(self):
        fs = 256.0
        t = np.arange(int(20 * fs)) / fs
        x = np.sin(2 * np.pi * 5.0 * t)
        y = bandpass_filter(x, fs, 1.0, 20.0, order=4)
        mid = slice(len(t) // 4, 3 * len(t) // 4)
        ratio = np.abs(y[mid]).max() / np.abs(x[mid]).max()
        assert abs(ratio - 1.0) < 0.05

    def test_50hz_attenuated_60db(self):
        fs = 256.0
        t = np.arange(int(20 * fs)) / fs
        x = np.sin(2 * np.pi * 50.0 * t)
        y = bandpass_filter(x, fs, 1.0, 20.0, order=4)
        mid = slice(len(t) // 4, 3 * len(t) // 4)
        atten_db = 20 * np.log10(np.abs(y[mid]).max() / np.abs(x[mid]).max())
        assert atten_db <= -60.0

    def test_zero_in_zero_out(self):
        y = bandpass_filter(np.zeros(1000), 256.0, 1.0, 20.0)
        assert np.allclose(y, 0.0)

    def test_length_preserved_and_2d(self):
        x = np.random.default_rng(0).standard_normal((3, 500))
        y = bandpass_filter(x, 100.0, 1.0, 20.0)
        assert y.shape == x.shape

    def test_invalid_edges_rejected(self):
        with pytest.raises(DomainError):
            bandpass_filter(np.zeros(100), 100.0, 0.0, 20.0)
        with pytest.raises(DomainError):
            bandpass_filter(np.zeros(100), 100.0, 30.0, 20.0)
        with pytest.raises(DomainError):
            bandpass_filter(np.zeros(100), 100.0, 1.0, 60.0)


class TestLineLength:
    def test_constant_window_is_zero(self):
        assert line_length(np.full(50, 3.7)) == 0.0

    def test_alternating_unit_signal(self):
        n = 64
        x = np.resize([1.0, -1.0], n)
        assert line_length(x) == pytest.approx((n - 1) * 2 / n)

    @given(st.integers(2, 300), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_matches_naive_loop(self, n, seed):
        x = np.random.default_rng(seed).standard_normal(n)
        naive = sum(abs(x[i] - x[i - 1]) for i in range(1, n)) / n
        assert line_length(x) == pytest.approx(naive, rel=1e-12)

    def test_too_short_rejected(self):
        with pytest.raises(DomainError):
            line_length(np.array([1.0]))


class TestBandPowers:
    def test_relative_sums_to_one_for_noise(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            w = rng.standard_normal(1024)
            _, rel = band_powers(w, fs=256.0)
            assert rel.sum() == pytest.approx(1.0, abs=1e-9)

    def test_tone_lands_in_its_band(self):
        fs = 256.0
        t = np.arange(1024) / fs
        w = np.sin(2 * np.pi * 10.0 * t)  # alpha band [8, 12)
        absolute, rel = band_powers(w, fs)
        names = [b.name for b in DEFAULT_BANDS]
        assert rel[names.index("alpha")] > 0.99

    def test_total_power_tracks_variance(self):
        # in-band signal: integrated PSD over the bands ~ signal variance
        fs = 256.0
        t = np.arange(4096) / fs
        w = 2.0 * np.sin(2 * np.pi * 6.0 * t)
        absolute, _ = band_powers(w, fs)
        assert absolute.sum() == pytest.approx(np.var(w), rel=1e-2)

    def test_zero_window_flagged_and_zero(self):
        with pytest.warns(UserWarning, match="zero in-band power"):
            absolute, rel = band_powers(np.zeros(512), fs=256.0)
        assert np.all(absolute == 0)
        assert np.all(rel == 0)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(2)
        batch = rng.standard_normal((6, 512))
        abs_b, rel_b = band_powers(batch, fs=128.0)
        for i in range(6):
            abs_1, rel_1 = band_powers(batch[i], fs=128.0)
            assert np.allclose(abs_b[i], abs_1)
            assert np.allclose(rel_b[i], rel_1)

    def test_window_shorter_than_1s_rejected(self):
        with pytest.raises(DomainError):
            band_powers(np.zeros(100), fs=256.0)

    def test_band_beyond_nyquist_rejected(self):
        with pytest.raises(DomainError):
            band_powers(np.zeros(256), fs=64.0, bands=[BandDefinition("hi", 10.0, 40.0)])


class TestExtractFeatures:
    def _rec(self, duration_s=60.0, fs=128.0, events=(), seed=0, n_channels=2):
        n = int(duration_s * fs)
        rng = np.random.default_rng(seed)
        payload = rng.standard_normal((n_channels, n))
        return make_recording(
            duration_s=duration_s, fs=fs, events=events, payload=payload
        )

    def test_row_count_formula(self):
        rec = self._rec(duration_s=60.0, fs=128.0)
        fm = extract_features(rec, WindowingConfig(4.0, 0.5))
        win, step, n = 512, 64, 60 * 128
        assert fm.n_windows == (n - win) // step + 1
        assert fm.values.shape == (fm.n_windows, 2 * 19)

    def test_column_names(self):
        rec = self._rec()
        fm = extract_features(rec, WindowingConfig(4.0, 1.0))
        assert fm.columns[0] == "ch00_mean_amp"
        assert fm.columns[19] == "ch01_mean_amp"
        assert fm.columns[1] == "ch00_line_length"
        assert len(fm.columns) == 38

    def test_window_labels_strict_majority(self):
        # 4 s windows at 1 s steps against a 3 s seizure [10, 13)
        rec = self._rec(duration_s=30.0, fs=128.0, events=[Event(10.0, 13.0)])
        fm = extract_features(rec, WindowingConfig(4.0, 1.0))
        t = fm.window_times
        labels = dict(zip(t.tolist(), fm.labels.tolist()))
        assert labels[8.0] == 0  # [8,12): exactly half is not a majority
        assert labels[9.0] == 1  # [9,13): 3 of 4 s
        assert labels[10.0] == 1
        assert labels[11.0] == 0  # [11,15): back to 2 of 4 s
        assert labels[12.0] == 0

    def test_feature_values_match_scalar_ops(self):
        rec = self._rec(duration_s=20.0, fs=128.0)
        fm = extract_features(rec, WindowingConfig(4.0, 2.0), bandpass=None)
        sig = rec.load_signal()
        w0 = sig[0, :512]
        assert fm.values[0, 0] == pytest.approx(np.abs(w0).mean())
        assert fm.values[0, 1] == pytest.approx(line_length(w0))
        absolute, rel = band_powers(w0, 128.0)
        assert np.allclose(fm.values[0, 2:9], absolute)
        assert np.allclose(fm.values[0, 9:16], rel)
        assert fm.values[0, 16] == pytest.approx(absolute.sum())

    def test_relative_powers_sum_to_one_rowwise(self):
        rec = self._rec(duration_s=30.0, fs=128.0)
        fm = extract_features(rec, WindowingConfig(4.0, 1.0))
        rel = fm.values[:, 9:16]
        assert np.allclose(rel.sum(axis=1), 1.0, atol=1e-9)

    def test_file_shorter_than_window_rejected(self):
        rec = self._rec(duration_s=2.0, fs=128.0)
        with pytest.raises(CapacityError):
            extract_features(rec, WindowingConfig(4.0, 0.5))

    def test_deterministic(self):
        rec = self._rec()
        a = extract_features(rec, WindowingConfig(4.0, 0.5))
        b = extract_features(rec, WindowingConfig(4.0, 0.5))
        assert np.array_equal(a.values, b.values)


class TestProjection:
    def _fm(self, n_windows, n_samples, fs=1.0, window_s=4.0, step_s=1.0):
        return FeatureMatrix(
            values=np.zeros((n_windows, 1)),
            window_times=np.arange(n_windows) * step_s,
            labels=np.zeros(n_windows, dtype=np.uint8),
            columns=["ch00_mean_amp"],
            fs=fs,
            n_samples=n_samples,
            window_s=window_s,
            step_s=step_s,
        )

    def test_first_window_stamps_full_span(self):
        fm = self._fm(n_windows=3, n_samples=6)
        out = fm.project_to_samples(np.array([1, 0, 0]))
        assert out.labels.tolist() == [1, 1, 1, 1, 0, 0]

    def test_later_windows_stamp_new_step(self):
        fm = self._fm(n_windows=3, n_samples=6)
        out = fm.project_to_samples(np.array([0, 1, 0]))
        assert out.labels.tolist() == [0, 0, 0, 0, 1, 0]

    def test_tail_keeps_last_label(self):
        # 10 samples, windows cover up to sample 7; tail 7..9 follows last
        fm = self._fm(n_windows=2, n_samples=10)
        out = fm.project_to_samples(np.array([0, 1]))
        assert out.labels.tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 1, 1]

    def test_single_window_fills_whole_file(self):
        fm = self._fm(n_windows=1, n_samples=7)
        out = fm.project_to_samples(np.array([1]))
        assert out.labels.tolist() == [1] * 7

    def test_wrong_count_rejected(self):
        fm = self._fm(n_windows=3, n_samples=6)
        with pytest.raises(ValidationError):
            fm.project_to_samples(np.array([1, 0]))

    def test_projection_round_trips_through_extraction(self):
        # all-ones window labels must project to all-ones samples
        rec = make_recording(
            duration_s=20.0, fs=128.0,
            payload=np.random.default_rng(3).standard_normal((2, 2560)),
        )
        fm = extract_features(rec, WindowingConfig(4.0, 0.5))
        out = fm.project_to_samples(np.ones(fm.n_windows, dtype=np.uint8))
        assert out.labels.all()
        assert len(out) == 2560


class TestFeatureMatrixIO:
    def _fm(self):
        rec = make_recording(
            duration_s=12.0, fs=128.0, events=[Event(5.0, 7.0)],
            payload=np.random.default_rng(4).standard_normal((2, 1536)),
        )
        return extract_features(rec, WindowingConfig(4.0, 1.0))

    def test_csv_round_trip(self, tmp_path):
        fm = self._fm()
        path = tmp_path / "f.csv"
        fm.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header.startswith("t_start,label,ch00_mean_amp")
        back = FeatureMatrix.from_csv(path, fm.fs, fm.n_samples, WindowingConfig(4.0, 1.0))
        assert back.columns == fm.columns
        assert np.allclose(back.values, fm.values, rtol=1e-9)
        assert np.array_equal(back.labels, fm.labels)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,cls,x\n0,0,1\n")
        with pytest.raises(SchemaError):
            FeatureMatrix.from_csv(path, 128.0, 1536, WindowingConfig(4.0, 1.0))

    def test_concatenate_checks_schema(self):
        fm = self._fm()
        other = FeatureMatrix(
            values=np.zeros((2, 3)),
            window_times=np.zeros(2),
            labels=np.zeros(2, dtype=np.uint8),
            columns=["a", "b", "c"],
            fs=fm.fs,
            n_samples=10,
            window_s=fm.window_s,
            step_s=fm.step_s,
        )
        with pytest.raises(SchemaError):
            FeatureMatrix.concatenate([fm, other])
        both = FeatureMatrix.concatenate([fm, fm])
        assert both.n_windows == 2 * fm.n_windows
        assert both.n_samples == 2 * fm.n_samples

    def test_concatenate_empty_rejected(self):
        with pytest.raises(ValidationError):
            FeatureMatrix.concatenate([])
