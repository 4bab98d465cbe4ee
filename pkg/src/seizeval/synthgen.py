"""Deterministic synthetic multichannel recordings with planted seizures.

Background activity is band-limited Gaussian noise; each seizure adds a
rhythmic burst with onset/offset ramps on top of it.  The burst amplitude is
``(seizure_gain - 1)`` times the background RMS, so ``seizure_gain=1`` plants
bursts of zero amplitude: the classes become statistically identical, which
is the negative control for end-to-end tests.

Subjects are individualized on purpose: subject ``i`` gets burst frequency
``seizure_freq_hz + i * seizure_freq_step_hz`` and a global amplitude scale
``subject_scale_base ** (i - (n-1)/2)``.  A model trained on one subject
therefore transfers imperfectly to another, giving cross-subject experiments
a real personalized-vs-generalized gap to measure.

Recordings are split into hour-long files (the last may be shorter), signals
synthesized lazily per file from per-file RNG streams, so generation is
reproducible file-by-file and nothing large stays resident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .errors import CapacityError, ValidationError
from .timeline import (
    Event,
    Recording,
    RecordingMeta,
    RecordingSet,
    write_annotations,
)

__all__ = ["SynthConfig", "SynthSource", "generate", "save_dataset"]

_FILE_LEN_S = 3600.0
_EDGE_MARGIN_S = 5.0
_MIN_GAP_S = 120.0
_RAMP_MAX_S = 2.0


@dataclass(frozen=True)
class SynthConfig:
    """Shape parameters of the generated dataset.

    Seizure count and length are drawn per subject from truncated normal
    distributions (``max(minimum, round(draw))``); the defaults follow the
    CHB-MIT summary statistics (7.6 +/- 5.8 seizures of 58.6 +/- 65.0 s at
    256 Hz on 18 channels).
    """

    n_subjects: int = 3
    hours_per_subject: float = 8.0
    fs: float = 256.0
    n_channels: int = 18
    seizures_mean: float = 7.6
    seizures_sd: float = 5.8
    seizures_min: int = 2
    seizure_len_mean_s: float = 58.6
    seizure_len_sd_s: float = 65.0
    seizure_len_min_s: float = 10.0
    seizure_freq_hz: float = 4.0
    seizure_freq_step_hz: float = 2.5
    seizure_gain: float = 4.0
    subject_scale_base: float = 2.0
    background_band: tuple[float, float] = (0.5, 30.0)
    rng_seed: int = 12345

    def __post_init__(self):
        if self.n_subjects < 1 or self.n_channels < 1 or self.seizures_min < 1:
            raise ValidationError("subject, channel and seizure counts must be positive")
        if self.hours_per_subject <= 0 or self.fs <= 0:
            raise ValidationError("hours_per_subject and fs must be positive")
        if self.seizure_len_min_s < 2.0 / self.fs:
            raise ValidationError(
                f"minimum seizure length {self.seizure_len_min_s} s is below "
                f"two samples at fs={self.fs}"
            )
        if self.seizure_gain < 1:
            raise ValidationError(f"seizure_gain must be >= 1, got {self.seizure_gain}")
        top_freq = self.seizure_freq_hz + self.seizure_freq_step_hz * (self.n_subjects - 1)
        if not (0 < self.seizure_freq_hz and top_freq < self.fs / 2):
            raise ValidationError(
                f"seizure frequencies must lie in (0, fs/2); subject range is "
                f"[{self.seizure_freq_hz}, {top_freq}] at fs={self.fs}"
            )
        lo, hi = self.background_band
        if not 0 < lo < hi < self.fs / 2:
            raise ValidationError(f"background band {self.background_band} invalid for fs={self.fs}")

    def subject_scale(self, subject_index: int) -> float:
        return float(self.subject_scale_base ** (subject_index - (self.n_subjects - 1) / 2))

    def subject_freq(self, subject_index: int) -> float:
        return self.seizure_freq_hz + self.seizure_freq_step_hz * subject_index


def _file_spans(cfg: SynthConfig) -> list[tuple[float, float]]:
    """Hour-long [start, end) spans covering the subject's recording time."""
    total = cfg.hours_per_subject * 3600.0
    spans = []
    t = 0.0
    while t < total - 1e-9:
        spans.append((t, min(t + _FILE_LEN_S, total)))
        t += _FILE_LEN_S
    return spans


def _plan_subject(cfg: SynthConfig, subject_index: int) -> list[Event]:
    """Draw seizure positions for one subject on the global subject timeline.

    Every seizure lies fully inside one file (with an edge margin) and is at
    least 120 s from its neighbours.  Placement is rejection sampling from
    the subject's own RNG stream, so subjects are independent and the whole
    plan depends only on (seed, subject index).
    """
    rng = np.random.default_rng([cfg.rng_seed, subject_index])
    n_seiz = max(cfg.seizures_min, int(round(rng.normal(cfg.seizures_mean, cfg.seizures_sd))))
    spans = _file_spans(cfg)
    grid = 1.0 / cfg.fs

    events: list[Event] = []
    for _ in range(n_seiz):
        length = max(cfg.seizure_len_min_s, rng.normal(cfg.seizure_len_mean_s, cfg.seizure_len_sd_s))
        length = max(cfg.seizure_len_min_s, round(length * cfg.fs) / cfg.fs)
        placed = False
        for _attempt in range(10000):
            f0, f1 = spans[rng.integers(len(spans))]
            lo = f0 + _EDGE_MARGIN_S
            hi = f1 - _EDGE_MARGIN_S - length
            if hi <= lo:
                continue
            start = round(rng.uniform(lo, hi) / grid) * grid
            end = start + length
            if all(
                start - ev.end >= _MIN_GAP_S or ev.start - end >= _MIN_GAP_S
                for ev in events
            ):
                events.append(Event(start, end))
                placed = True
                break
        if not placed:
            raise CapacityError(
                f"subject {subject_index}: cannot place {n_seiz} seizures of ~"
                f"{cfg.seizure_len_mean_s:.0f} s with {_MIN_GAP_S:.0f} s gaps in "
                f"{cfg.hours_per_subject} h; reduce count/length or extend recording"
            )
    return sorted(events)


def _ramp_envelope(n: int, fs: float) -> np.ndarray:
    """Trapezoidal onset/offset envelope; ramps take up to 2 s each."""
    ramp = min(int(round(_RAMP_MAX_S * fs)), n // 4)
    env = np.ones(n)
    if ramp > 0:
        slope = np.linspace(0.0, 1.0, ramp, endpoint=False)
        env[:ramp] = slope
        env[n - ramp :] = slope[::-1]
    return env


class SynthSource:
    """Regenerates one file's signal deterministically on demand."""

    def __init__(self, cfg: SynthConfig, subject_index: int, file_index: int,
                 n_samples: int, events: tuple[Event, ...]):
        self.cfg = cfg
        self.subject_index = subject_index
        self.file_index = file_index
        self.n_samples = n_samples
        self.events = events  # file-relative

    def load(self) -> np.ndarray:
        cfg = self.cfg
        rng = np.random.default_rng([cfg.rng_seed, self.subject_index, self.file_index])
        white = rng.standard_normal((cfg.n_channels, self.n_samples))
        sos = sps.butter(4, cfg.background_band, btype="bandpass", fs=cfg.fs, output="sos")
        bg = sps.sosfiltfilt(sos, white, axis=-1)
        bg /= bg.std(axis=-1, keepdims=True)  # unit RMS background per channel
        scale = cfg.subject_scale(self.subject_index)
        sig = bg * scale

        # burst RMS = (gain - 1) x background RMS; gain=1 adds nothing
        amp = (cfg.seizure_gain - 1.0) * scale * math.sqrt(2.0)
        freq = cfg.subject_freq(self.subject_index)
        for ev in self.events:
            i0 = int(round(ev.start * cfg.fs))
            i1 = int(round(ev.end * cfg.fs))
            t = np.arange(i1 - i0) / cfg.fs
            env = _ramp_envelope(i1 - i0, cfg.fs)
            phases = rng.uniform(0.0, 2.0 * np.pi, size=cfg.n_channels)
            burst = amp * env * np.sin(2.0 * np.pi * freq * t + phases[:, np.newaxis])
            sig[:, i0:i1] += burst
        return sig


def generate(cfg: SynthConfig = SynthConfig()) -> RecordingSet:
    """Build the full synthetic RecordingSet with ground-truth events.

    Subjects are named ``s01, s02, ...`` and files ``s01_00, s01_01, ...``
    in temporal order.  Events are stored file-relative on each recording;
    signal arrays are synthesized lazily by each recording's source.
    """
    spans = _file_spans(cfg)
    recordings = []
    for si in range(cfg.n_subjects):
        subject = f"s{si + 1:02d}"
        global_events = _plan_subject(cfg, si)
        for fi, (f0, f1) in enumerate(spans):
            inside = tuple(
                ev.shift(-f0) for ev in global_events if f0 <= ev.start and ev.end <= f1
            )
            n_samples = int(round((f1 - f0) * cfg.fs))
            meta = RecordingMeta(
                subject_id=subject,
                file_id=f"{subject}_{fi:02d}",
                duration_s=f1 - f0,
                n_channels=cfg.n_channels,
                fs=cfg.fs,
                seq_index=fi,
            )
            recordings.append(
                Recording(
                    meta=meta,
                    events=inside,
                    source=SynthSource(cfg, si, fi, n_samples, inside),
                )
            )
        covered = sum(
            1 for ev in global_events
            if any(f0 <= ev.start and ev.end <= f1 for f0, f1 in spans)
        )
        if covered != len(global_events):
            raise CapacityError(
                f"subject {subject}: {len(global_events) - covered} seizures fell "
                "outside all file spans"
            )
    return RecordingSet(recordings)


def save_dataset(recordings: RecordingSet, out_dir: str | Path) -> tuple[list[Path], Path]:
    """Write every recording as an EDF file plus one annotations CSV.

    Returns the signal paths and the annotation path.  Writing quantizes to
    the EDF 16-bit grid; rerunning with the same RecordingSet produces
    byte-identical files.
    """
    from .edfio import write_edf  # deferred: edfio imports timeline, not us

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    rows = []
    for rec in recordings:
        sig = rec.load_signal()
        path = out_dir / f"{rec.meta.file_id}.edf"
        # one shared symmetric range per file keeps channels comparable
        write_edf(path, sig, rec.meta.fs, recording_id=rec.meta.file_id)
        paths.append(path)
        for ev in rec.events:
            rows.append((rec.meta.subject_id, rec.meta.file_id, ev))
    ann_path = out_dir / "annotations.csv"
    write_annotations(ann_path, rows)
    return paths, ann_path
