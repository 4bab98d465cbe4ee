"""Signal preprocessing and sliding-window feature extraction.

Per channel, 19 features are computed on each window: mean absolute
amplitude, normalized line length, absolute and relative spectral power in
seven frequency bands, and three spectral aggregates (total in-band power,
band entropy, peak frequency).  Windows advance by a configurable step, so
consecutive windows usually overlap.

The expected preprocessing is a zero-phase Butterworth bandpass
(forward-backward, so the effective magnitude response is squared and the
phase is zero); :func:`extract_features` applies it by default.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal as sps

from .errors import CapacityError, DomainError, SchemaError, ValidationError
from .timeline import LabelSeries, events_to_labels

__all__ = [
    "WindowingConfig",
    "BandDefinition",
    "FeatureMatrix",
    "DEFAULT_BANDS",
    "DEFAULT_BANDPASS",
    "FEATURE_NAMES",
    "bandpass_filter",
    "line_length",
    "band_powers",
    "extract_features",
]


@dataclass(frozen=True)
class WindowingConfig:
    """Sliding-window geometry: window length and step, both in seconds."""

    window_s: float = 4.0
    step_s: float = 0.5

    def __post_init__(self):
        if not 0 < self.step_s <= self.window_s:
            raise ValidationError(
                f"require 0 < step_s <= window_s, got step={self.step_s}, "
                f"window={self.window_s}"
            )

    def window_samples(self, fs: float) -> int:
        return max(1, int(round(self.window_s * fs)))

    def step_samples(self, fs: float) -> int:
        return max(1, int(round(self.step_s * fs)))


@dataclass(frozen=True)
class BandDefinition:
    """Named frequency band ``[lo_hz, hi_hz)``."""

    name: str
    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        if not (0 <= self.lo_hz < self.hi_hz):
            raise ValidationError(
                f"band {self.name}: require 0 <= lo < hi, got [{self.lo_hz}, {self.hi_hz})"
            )


# The five conventional EEG rhythm bands plus two low-frequency bands.
DEFAULT_BANDS = (
    BandDefinition("delta", 0.5, 4.0),
    BandDefinition("theta", 4.0, 8.0),
    BandDefinition("alpha", 8.0, 12.0),
    BandDefinition("beta", 12.0, 30.0),
    BandDefinition("gamma", 30.0, 45.0),
    BandDefinition("lf1", 0.0, 0.5),
    BandDefinition("lf2", 0.1, 0.5),
)

# (lo_hz, hi_hz, order) of the default zero-phase Butterworth bandpass.
DEFAULT_BANDPASS = (1.0, 20.0, 4)

FEATURE_NAMES = (
    ("mean_amp", "line_length")
    + tuple(f"pow_{b.name}" for b in DEFAULT_BANDS)
    + tuple(f"rel_{b.name}" for b in DEFAULT_BANDS)
    + ("pow_total", "band_entropy", "peak_freq")
)


def bandpass_filter(
    x: np.ndarray, fs: float, lo: float, hi: float, order: int = 4
) -> np.ndarray:
    """Zero-phase Butterworth bandpass, applied forward and backward.

    ``order`` is the design order of the underlying lowpass prototype; the
    two-pass application squares the magnitude response and cancels the
    phase.  Filters along the last axis, preserving length, so 1-D signals
    and ``(n_channels, n_samples)`` arrays both work.
    """
    if not (0 < lo < hi < fs / 2):
        raise DomainError(
            f"band edges must satisfy 0 < lo < hi < fs/2, got lo={lo}, hi={hi}, fs={fs}"
        )
    sos = sps.butter(order, [lo, hi], btype="bandpass", fs=fs, output="sos")
    return sps.sosfiltfilt(sos, np.asarray(x, dtype=np.float64), axis=-1)


def line_length(window: np.ndarray) -> float:
    """Sum of absolute first differences divided by window length in samples.

    The division makes the value comparable across window sizes.
    """
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise DomainError(f"line_length needs a 1-D window of >= 2 samples, got shape {w.shape}")
    return float(np.abs(np.diff(w)).sum() / w.size)


def _periodogram(x: np.ndarray, fs: float) -> tuple[np.ndarray, np.ndarray]:
    """Rectangular-window periodogram along the last axis (keeps the DC bin)."""
    return sps.periodogram(x, fs=fs, window="boxcar", detrend=False, axis=-1)


def _band_masks(freqs: np.ndarray, fs: float, bands: Sequence[BandDefinition]) -> list[np.ndarray]:
    masks = []
    for b in bands:
        if b.hi_hz > fs / 2:
            raise DomainError(
                f"band {b.name} [{b.lo_hz}, {b.hi_hz}) exceeds the Nyquist frequency {fs / 2}"
            )
        masks.append((freqs >= b.lo_hz) & (freqs < b.hi_hz))
    return masks


def band_powers(
    window: np.ndarray,
    fs: float,
    bands: Sequence[BandDefinition] = DEFAULT_BANDS,
) -> tuple[np.ndarray, np.ndarray]:
    """Absolute and relative spectral power per band.

    Power spectral density is estimated by the periodogram of the window;
    absolute power integrates it over ``[lo, hi)`` and relative power divides
    by the total over all given bands, so the relative values sum to 1
    whenever that total is nonzero.  A window with zero in-band power gets
    relative powers of 0 and triggers a warning.

    Accepts a single window (1-D) or a batch ``(n_windows, n_samples)``;
    the band axis is last in both cases.
    """
    x = np.asarray(window, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[np.newaxis, :]
    if x.shape[-1] < fs:
        raise DomainError(
            f"window of {x.shape[-1]} samples is shorter than 1 s at fs={fs}; "
            "the lowest band is unresolvable"
        )
    freqs, psd = _periodogram(x, fs)
    df = freqs[1] - freqs[0]
    masks = _band_masks(freqs, fs, bands)
    absolute = np.stack([psd[:, m].sum(axis=-1) * df for m in masks], axis=-1)
    total = absolute.sum(axis=-1, keepdims=True)
    zero = total[:, 0] == 0
    if np.any(zero):
        warnings.warn(
            f"{int(zero.sum())} window(s) with zero in-band power; "
            "relative band powers set to 0",
            stacklevel=2,
        )
    relative = np.divide(absolute, total, out=np.zeros_like(absolute), where=total > 0)
    if single:
        return absolute[0], relative[0]
    return absolute, relative


@dataclass
class FeatureMatrix:
    """Windowed features of one file (or a training concatenation of files).

    ``values`` has one row per window and ``n_channels * 19`` columns, in
    ``columns`` order (``chNN_<feature>``).  ``window_times`` holds each
    window's start second relative to the file origin and ``labels`` the
    per-window binary class.  Source geometry (``fs``, ``n_samples``,
    windowing) is retained so window-level predictions can be projected back
    onto the sample grid.
    """

    values: np.ndarray
    window_times: np.ndarray
    labels: np.ndarray
    columns: list[str]
    fs: float
    n_samples: int
    window_s: float
    step_s: float
    file_id: str = ""

    def __post_init__(self):
        if not (len(self.values) == len(self.window_times) == len(self.labels)):
            raise ValidationError(
                f"row mismatch: {len(self.values)} value rows, "
                f"{len(self.window_times)} times, {len(self.labels)} labels"
            )
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValidationError(
                f"values shape {self.values.shape} does not match {len(self.columns)} columns"
            )

    @property
    def n_windows(self) -> int:
        return len(self.values)

    def project_to_samples(self, window_labels: np.ndarray) -> LabelSeries:
        """Expand per-window labels to a per-sample series of the source file.

        The first window stamps its label on its full span; every later
        window stamps the step-long stretch it newly covers.  Samples after
        the last window's end keep the last window's label: the final
        prediction stays in force until the end of the file.
        """
        lab = np.asarray(window_labels, dtype=np.uint8)
        if lab.shape != (self.n_windows,):
            raise ValidationError(
                f"expected {self.n_windows} window labels, got shape {lab.shape}"
            )
        win = int(round(self.window_s * self.fs))
        step = int(round(self.step_s * self.fs))
        out = np.empty(self.n_samples, dtype=np.uint8)
        out[:win] = lab[0]
        if self.n_windows > 1:
            body = np.repeat(lab[1:], step)
            out[win : win + body.size] = body
        covered = win + (self.n_windows - 1) * step
        out[covered:] = lab[-1]
        return LabelSeries(out, self.fs)

    @classmethod
    def concatenate(cls, parts: Sequence["FeatureMatrix"]) -> "FeatureMatrix":
        """Stack matrices of several files for training.

        Columns, sampling rate and windowing must agree.  Window times are
        kept file-relative; the result is meant for fitting, not projection.
        """
        if not parts:
            raise ValidationError("cannot concatenate zero feature matrices")
        first = parts[0]
        for p in parts[1:]:
            if p.columns != first.columns:
                raise SchemaError(
                    f"feature columns differ between {first.file_id!r} and {p.file_id!r}"
                )
            if p.fs != first.fs or p.window_s != first.window_s or p.step_s != first.step_s:
                raise SchemaError("windowing/fs differ between concatenated matrices")
        return cls(
            values=np.concatenate([p.values for p in parts]),
            window_times=np.concatenate([p.window_times for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
            columns=list(first.columns),
            fs=first.fs,
            n_samples=sum(p.n_samples for p in parts),
            window_s=first.window_s,
            step_s=first.step_s,
            file_id="+".join(p.file_id for p in parts),
        )

    def to_csv(self, path: str | Path) -> None:
        """Columnar CSV with header ``t_start,label,<ch>_<feat>,...``."""
        header = ",".join(["t_start", "label"] + self.columns)
        data = np.column_stack(
            [self.window_times, self.labels.astype(np.float64), self.values]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.12g")

    @classmethod
    def from_csv(
        cls, path: str | Path, fs: float, n_samples: int, cfg: WindowingConfig
    ) -> "FeatureMatrix":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        if header[:2] != ["t_start", "label"]:
            raise SchemaError(f"{path}: expected columns t_start,label,..., got {header[:2]}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(
            values=data[:, 2:],
            window_times=data[:, 0],
            labels=data[:, 1].astype(np.uint8),
            columns=header[2:],
            fs=fs,
            n_samples=n_samples,
            window_s=cfg.window_s,
            step_s=cfg.step_s,
            file_id=Path(path).stem,
        )


def _windowed(x: np.ndarray, win: int, step: int) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(x, win)[::step]


def extract_features(
    file,
    cfg: WindowingConfig = WindowingConfig(),
    bands: Sequence[BandDefinition] = DEFAULT_BANDS,
    bandpass: tuple[float, float, int] | None = DEFAULT_BANDPASS,
) -> FeatureMatrix:
    """Extract the per-channel feature set over sliding windows of a file.

    ``file`` is any object with ``meta`` (:class:`~seizeval.timeline.RecordingMeta`),
    ``events`` and ``load_signal()``; both recordings and arrangement-built
    data files qualify.  Windows start at multiples of the step while the
    full window fits, giving ``floor((n - win) / step) + 1`` rows.  A window
    is labeled 1 iff strictly more than half of its samples are inside a
    seizure event.  Channels are processed independently in index order, so
    the result does not depend on any processing order.
    """
    meta = file.meta
    fs = meta.fs
    win = cfg.window_samples(fs)
    step = cfg.step_samples(fs)
    sig = np.asarray(file.load_signal(), dtype=np.float64)
    n = sig.shape[-1]
    if n < win:
        raise CapacityError(
            f"{meta.file_id}: file of {n} samples is shorter than one "
            f"{cfg.window_s} s window ({win} samples)"
        )
    if bandpass is not None:
        lo, hi, order = bandpass
        sig = bandpass_filter(sig, fs, lo, hi, order)

    n_windows = (n - win) // step + 1
    n_channels = sig.shape[0]

    # window labels: strict majority of the per-sample reference labels
    ref = events_to_labels(file.events, fs, meta.duration_s).labels
    cs = np.concatenate(([0], np.cumsum(ref, dtype=np.int64)))
    starts = np.arange(n_windows) * step
    ones = cs[starts + win] - cs[starts]
    labels = (2 * ones > win).astype(np.uint8)

    n_feats = len(FEATURE_NAMES)
    values = np.empty((n_windows, n_channels * n_feats), dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # zero-power windows are legal here
        for c in range(n_channels):
            sw = _windowed(sig[c], win, step)
            freqs, psd = _periodogram(sw, fs)
            df = freqs[1] - freqs[0]
            masks = _band_masks(freqs, fs, bands)
            absolute = np.stack([psd[:, m].sum(axis=-1) * df for m in masks], axis=-1)
            total = absolute.sum(axis=-1)
            relative = np.divide(
                absolute,
                total[:, np.newaxis],
                out=np.zeros_like(absolute),
                where=total[:, np.newaxis] > 0,
            )
            entropy = -np.sum(
                np.where(relative > 0, relative * np.log(np.maximum(relative, 1e-300)), 0.0),
                axis=-1,
            )
            block = np.empty((n_windows, n_feats))
            block[:, 0] = np.abs(sw).mean(axis=-1)
            block[:, 1] = np.abs(np.diff(sw, axis=-1)).sum(axis=-1) / win
            nb = len(bands)
            block[:, 2 : 2 + nb] = absolute
            block[:, 2 + nb : 2 + 2 * nb] = relative
            block[:, 2 + 2 * nb] = total
            block[:, 3 + 2 * nb] = entropy
            block[:, 4 + 2 * nb] = freqs[np.argmax(psd, axis=-1)]
            values[:, c * n_feats : (c + 1) * n_feats] = block

    columns = [f"ch{c:02d}_{name}" for c in range(n_channels) for name in FEATURE_NAMES]
    return FeatureMatrix(
        values=values,
        window_times=starts / fs,
        labels=labels,
        columns=columns,
        fs=fs,
        n_samples=n,
        window_s=cfg.window_s,
        step_s=cfg.step_s,
        file_id=meta.file_id,
    )
