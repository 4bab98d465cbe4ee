"""Canonical sample-level and event-level representations of binary annotations.

Two interchangeable views of the same information are used everywhere:

* :class:`LabelSeries` -- one 0/1 label per sample at a fixed sampling rate,
* :class:`Event` -- a half-open ``[start, end)`` interval of one class episode.

``labels_to_events`` / ``events_to_labels`` convert between them losslessly
whenever event boundaries fall on sample boundaries.  All intervals in the
package are half-open so that adjacent episodes never double-count a sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundaryError, ValidationError

__all__ = [
    "Event",
    "LabelSeries",
    "RecordingMeta",
    "Recording",
    "RecordingSet",
    "ArraySource",
    "labels_to_events",
    "events_to_labels",
    "validate_events",
    "read_annotations",
    "write_annotations",
    "ANNOTATION_HEADER",
]

# Slack used when snapping real-valued event boundaries onto the sample grid.
_GRID_EPS = 1e-9


@dataclass(frozen=True, order=True)
class Event:
    """Half-open time interval ``[start, end)`` of one class episode, in seconds.

    Zero-length events are rejected: they are unobservable at any sampling
    rate and break overlap arithmetic.
    """

    start: float
    end: float
    label: int = 1

    def __post_init__(self):
        if not self.start < self.end:
            raise ValidationError(
                f"event must satisfy start < end, got [{self.start}, {self.end})"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start

    def overlap(self, other: "Event") -> float:
        """Length in seconds of the intersection with ``other`` (0 if disjoint)."""
        return max(0.0, min(self.end, other.end) - max(self.start, other.start))

    def intersects(self, other: "Event") -> bool:
        return self.start < other.end and other.start < self.end

    def shift(self, offset_s: float) -> "Event":
        return Event(self.start + offset_s, self.end + offset_s, self.label)


class LabelSeries:
    """Per-sample binary annotation with sampling rate and time origin.

    ``labels`` holds only 0 and 1 (0 = background, 1 = seizure), ``fs`` is the
    sampling frequency in Hz and ``origin`` the time in seconds of sample 0
    within its recording.  Instances are immutable; the backing array is
    marked read-only.
    """

    __slots__ = ("labels", "fs", "origin")

    def __init__(self, labels, fs: float, origin: float = 0.0):
        arr = np.asarray(labels, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValidationError(f"labels must be one-dimensional, got shape {arr.shape}")
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            bad = np.unique(np.asarray(labels))
            raise ValidationError(f"labels must contain only 0 and 1, got values {bad}")
        if not fs > 0:
            raise ValidationError(f"sampling frequency must be positive, got {fs}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "fs", float(fs))
        object.__setattr__(self, "origin", float(origin))

    def __setattr__(self, name, value):
        raise AttributeError("LabelSeries is immutable")

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs

    @property
    def end(self) -> float:
        return self.origin + self.duration_s

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelSeries):
            return NotImplemented
        return (
            self.fs == other.fs
            and self.origin == other.origin
            and len(self) == len(other)
            and bool(np.array_equal(self.labels, other.labels))
        )

    def __repr__(self) -> str:
        return (
            f"LabelSeries(n={len(self)}, fs={self.fs}, origin={self.origin}, "
            f"positives={int(self.labels.sum())})"
        )


def validate_events(events: Sequence[Event]) -> None:
    """Check that ``events`` are sorted by start and pairwise non-overlapping."""
    for i in range(1, len(events)):
        if events[i].start < events[i - 1].start:
            raise ValidationError(
                f"events must be sorted by start time: event {i} starts at "
                f"{events[i].start} before event {i - 1} at {events[i - 1].start}"
            )
        if events[i].start < events[i - 1].end:
            raise ValidationError(
                f"events must not overlap: event {i - 1} ends at {events[i - 1].end}, "
                f"event {i} starts at {events[i].start}"
            )


def labels_to_events(series: LabelSeries, target_label: int = 1) -> list[Event]:
    """Extract maximal runs of ``target_label`` as sorted, disjoint events.

    A run over samples ``[i, j]`` becomes ``[origin + i/fs, origin + (j+1)/fs)``,
    so the summed event durations equal exactly (number of target samples)/fs.
    """
    mask = series.labels == target_label
    if not mask.any():
        return []
    padded = np.diff(np.concatenate(([0], mask.view(np.uint8), [0])).astype(np.int8))
    starts = np.flatnonzero(padded == 1)
    ends = np.flatnonzero(padded == -1)  # one past the last index of each run
    fs, origin = series.fs, series.origin
    return [
        Event(origin + s / fs, origin + e / fs, int(target_label))
        for s, e in zip(starts.tolist(), ends.tolist())
    ]


def events_to_labels(
    events: Sequence[Event],
    fs: float,
    duration_s: float,
    origin: float = 0.0,
) -> LabelSeries:
    """Rasterize sorted, non-overlapping events onto a sample grid.

    Sample ``i`` is labeled 1 iff its timestamp ``origin + i/fs`` lies inside
    some event's ``[start, end)``.  Inverse of :func:`labels_to_events` when
    all event boundaries fall on sample boundaries.
    """
    validate_events(events)
    n = int(round(duration_s * fs))
    labels = np.zeros(n, dtype=np.uint8)
    end_of_span = origin + duration_s
    for ev in events:
        if ev.start < origin - _GRID_EPS or ev.end > end_of_span + _GRID_EPS:
            raise BoundaryError(
                f"event [{ev.start}, {ev.end}) outside recording span "
                f"[{origin}, {end_of_span})"
            )
        lo = int(np.ceil((ev.start - origin) * fs - _GRID_EPS))
        hi = int(np.ceil((ev.end - origin) * fs - _GRID_EPS))
        labels[max(lo, 0) : min(hi, n)] = 1
    return LabelSeries(labels, fs, origin)


# ---------------------------------------------------------------------------
# Recordings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecordingMeta:
    """Identity and shape of one signal file.

    ``seq_index`` gives the temporal order of the file within its subject;
    indices must be unique and contiguous from 0 per subject (enforced by
    :class:`RecordingSet`).
    """

    subject_id: str
    file_id: str
    duration_s: float
    n_channels: int
    fs: float
    seq_index: int

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValidationError(f"{self.file_id}: duration_s must be > 0")
        if self.seq_index < 0:
            raise ValidationError(f"{self.file_id}: seq_index must be >= 0")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.fs))


class ArraySource:
    """In-memory payload handle: a fixed ``(n_channels, n_samples)`` array."""

    def __init__(self, data: np.ndarray):
        data = np.asarray(data)
        if data.ndim != 2:
            raise ValidationError(f"signal array must be 2-D, got shape {data.shape}")
        self._data = data

    def load(self) -> np.ndarray:
        return self._data


@dataclass(frozen=True)
class Recording:
    """One signal file: metadata, its seizure events, and a lazy payload handle.

    ``events`` are file-relative (seconds from the start of this file) and must
    lie within ``[0, meta.duration_s)``.  ``source`` is any object with a
    ``load() -> ndarray (n_channels, n_samples)`` method; it is only invoked
    when the signal is actually needed.
    """

    meta: RecordingMeta
    events: tuple[Event, ...] = ()
    source: object | None = None

    def __post_init__(self):
        events = tuple(sorted(self.events))
        validate_events(events)
        for ev in events:
            if ev.start < 0 or ev.end > self.meta.duration_s + _GRID_EPS:
                raise BoundaryError(
                    f"{self.meta.file_id}: event [{ev.start}, {ev.end}) outside "
                    f"file span [0, {self.meta.duration_s})"
                )
        object.__setattr__(self, "events", events)

    def load_signal(self) -> np.ndarray:
        if self.source is None:
            raise ValidationError(f"{self.meta.file_id}: recording has no signal payload")
        data = np.asarray(self.source.load())
        if data.shape != (self.meta.n_channels, self.meta.n_samples):
            raise ValidationError(
                f"{self.meta.file_id}: payload shape {data.shape} does not match "
                f"metadata ({self.meta.n_channels}, {self.meta.n_samples})"
            )
        return data

    def label_series(self) -> LabelSeries:
        return events_to_labels(self.events, self.meta.fs, self.meta.duration_s)


@dataclass
class RecordingSet:
    """Ordered collection of recordings grouped by subject.

    Within each subject the ``seq_index`` values must be unique and contiguous
    starting at 0; iteration order is by sorted subject id, then seq_index.
    """

    recordings: list[Recording] = field(default_factory=list)

    def __post_init__(self):
        by_subject: dict[str, list[int]] = {}
        for rec in self.recordings:
            by_subject.setdefault(rec.meta.subject_id, []).append(rec.meta.seq_index)
        for subject, indices in by_subject.items():
            if sorted(indices) != list(range(len(indices))):
                raise ValidationError(
                    f"subject {subject}: seq_index values must be unique and "
                    f"contiguous from 0, got {sorted(indices)}"
                )
        self.recordings = sorted(
            self.recordings, key=lambda r: (r.meta.subject_id, r.meta.seq_index)
        )

    def subjects(self) -> list[str]:
        return sorted({rec.meta.subject_id for rec in self.recordings})

    def files(self, subject_id: str) -> list[Recording]:
        return [r for r in self.recordings if r.meta.subject_id == subject_id]

    def subset(self, subject_ids: Iterable[str]) -> "RecordingSet":
        wanted = set(subject_ids)
        return RecordingSet([r for r in self.recordings if r.meta.subject_id in wanted])

    def __len__(self) -> int:
        return len(self.recordings)

    def __iter__(self):
        return iter(self.recordings)


# ---------------------------------------------------------------------------
# Annotation CSV  (the authoritative event interchange format)
# ---------------------------------------------------------------------------

ANNOTATION_HEADER = ["subject", "file", "start_s", "end_s", "label"]


def write_annotations(
    path: str | Path, rows: Iterable[tuple[str, str, Event]]
) -> None:
    """Write ``(subject_id, file_id, event)`` triples to the annotation CSV.

    One row per event, times as decimal seconds, UTF-8, header
    ``subject,file,start_s,end_s,label``.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANNOTATION_HEADER)
        for subject, file_id, ev in rows:
            writer.writerow([subject, file_id, repr(ev.start), repr(ev.end), ev.label])


def read_annotations(path: str | Path) -> dict[tuple[str, str], list[Event]]:
    """Read the annotation CSV into ``{(subject, file): [events...]}``.

    Events are returned sorted per file and validated as non-overlapping.
    """
    out: dict[tuple[str, str], list[Event]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ANNOTATION_HEADER:
            raise ValidationError(
                f"{path}: expected header {','.join(ANNOTATION_HEADER)}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValidationError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
            subject, file_id, start_s, end_s, label = row
            try:
                ev = Event(float(start_s), float(end_s), int(label))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            out.setdefault((subject, file_id), []).append(ev)
    for key, events in out.items():
        events.sort()
        validate_events(events)
    return out
