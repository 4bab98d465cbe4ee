"""Data arrangements and cross-validation fold construction.

Recordings are first stitched into one continuous per-subject timeline, then
rearranged into files by one of three schemes:

* Fact-k: one file per seizure, the seizure centered with k times its length
  of randomly drawn non-seizure signal split on both sides;
* seizure-to-seizure: consecutive files each ending at a seizure end;
* fixed windows: an initial file large enough to train on, then fixed-length
  slices.

Fold plans over those files implement leave-one-seizure-out, expanding-window
time-series cross-validation, and leave-one-subject-out.  Plans serialize to
JSON so a run can be audited and replayed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, DomainError, ValidationError
from .timeline import (
    Event,
    Recording,
    RecordingMeta,
    RecordingSet,
    validate_events,
)

__all__ = [
    "DataFile",
    "Fold",
    "FoldPlan",
    "SubjectTimeline",
    "build_fact_subset",
    "build_seizure_to_seizure",
    "build_fixed_windows",
    "make_folds_l1o",
    "make_folds_tscv",
    "make_scope_generalized",
    "validate_plan",
]

# Non-seizure blocks for Fact-k are drawn no closer than this to any seizure,
# so peri-ictal signal cannot leak label information into "background" data.
FACT_GUARD_S = 60.0


class DataFile(Recording):
    """A file produced by an arrangement builder.

    Same contract as :class:`~seizeval.timeline.Recording` (metadata, events
    within ``[0, duration)``, lazy payload); the distinct type records that
    the file was built by a partitioning rule rather than read from disk.
    """


def _snap(t_s: float, fs: float) -> int:
    """Time in seconds to sample index, stable against float jitter."""
    return int(np.ceil(t_s * fs - 1e-9))


class SubjectTimeline:
    """One subject's recordings glued into a single continuous timeline.

    Files are ordered by ``seq_index`` and treated as temporally adjacent;
    positions on the stitched timeline are expressed in samples.  Events are
    lifted from file-relative to timeline coordinates.
    """

    def __init__(self, recordings: RecordingSet, subject_id: str):
        files = recordings.files(subject_id)
        if not files:
            raise DomainError(f"subject {subject_id!r} has no recordings")
        fs = {f.meta.fs for f in files}
        n_ch = {f.meta.n_channels for f in files}
        if len(fs) != 1 or len(n_ch) != 1:
            raise ValidationError(
                f"subject {subject_id}: mixed fs {sorted(fs)} or channel counts "
                f"{sorted(n_ch)}; cannot stitch a single timeline"
            )
        self.subject_id = subject_id
        self.files = files
        self.fs = fs.pop()
        self.n_channels = n_ch.pop()
        lengths = [f.meta.n_samples for f in files]
        self.file_starts = np.concatenate(([0], np.cumsum(lengths)))
        self.total_samples = int(self.file_starts[-1])

        events = []
        for f in files:
            offset_s = self.file_starts[f.meta.seq_index] / self.fs
            events.extend(ev.shift(offset_s) for ev in f.events)
        events.sort()
        validate_events(events)
        self.events: list[Event] = events

    @property
    def total_duration_s(self) -> float:
        return self.total_samples / self.fs

    def source_for(self, segments: Sequence[tuple[int, int]]) -> "CompositeSource":
        return CompositeSource(self, segments)


class CompositeSource:
    """Payload handle concatenating sample segments of a subject timeline.

    ``segments`` are half-open ``[lo, hi)`` sample ranges in timeline
    coordinates, emitted in the given order.  Underlying files are loaded at
    most once per ``load`` call.
    """

    def __init__(self, timeline: SubjectTimeline, segments: Sequence[tuple[int, int]]):
        for lo, hi in segments:
            if not 0 <= lo < hi <= timeline.total_samples:
                raise ValidationError(
                    f"segment [{lo}, {hi}) outside timeline of "
                    f"{timeline.total_samples} samples"
                )
        self.timeline = timeline
        self.segments = [(int(lo), int(hi)) for lo, hi in segments]

    def load(self) -> np.ndarray:
        tl = self.timeline
        cache: dict[int, np.ndarray] = {}
        parts = []
        for lo, hi in self.segments:
            first = int(np.searchsorted(tl.file_starts, lo, side="right") - 1)
            pos = lo
            while pos < hi:
                f0 = int(tl.file_starts[first])
                f1 = int(tl.file_starts[first + 1])
                if first not in cache:
                    cache[first] = tl.files[first].load_signal()
                cut_hi = min(hi, f1)
                parts.append(cache[first][:, pos - f0 : cut_hi - f0])
                pos = cut_hi
                first += 1
        return np.concatenate(parts, axis=1)


# ---------------------------------------------------------------------------
# Arrangements
# ---------------------------------------------------------------------------


def _event_samples(tl: SubjectTimeline) -> list[tuple[int, int]]:
    return [(_snap(ev.start, tl.fs), _snap(ev.end, tl.fs)) for ev in tl.events]


def _free_intervals(tl: SubjectTimeline, guard_samples: int) -> list[tuple[int, int]]:
    """Seizure-free sample ranges at least ``guard_samples`` from any seizure."""
    blocked = [
        (max(0, s - guard_samples), min(tl.total_samples, e + guard_samples))
        for s, e in _event_samples(tl)
    ]
    free = []
    cursor = 0
    for s, e in blocked:
        if s > cursor:
            free.append((cursor, s))
        cursor = max(cursor, e)
    if cursor < tl.total_samples:
        free.append((cursor, tl.total_samples))
    return free


def _draw_blocks(
    free: list[tuple[int, int]], needed: int, rng: np.random.Generator, subject: str
) -> list[tuple[int, int]]:
    """Take ``needed`` samples of contiguous blocks out of the free pool.

    Intervals are chosen with probability proportional to length and consumed
    without replacement (the pool is shared across calls), so no background
    sample appears in two output files.
    """
    blocks = []
    while needed > 0:
        lengths = np.array([b - a for a, b in free], dtype=np.int64)
        if lengths.sum() < needed:
            raise CapacityError(
                f"subject {subject}: only {int(lengths.sum())} non-seizure samples "
                f"left but {needed} more required; lower the factor or the guard"
            )
        i = int(rng.choice(len(free), p=lengths / lengths.sum()))
        a, b = free[i]
        take = min(needed, b - a)
        start = int(rng.integers(a, b - take + 1))
        blocks.append((start, start + take))
        del free[i]
        if start > a:
            free.append((a, start))
        if start + take < b:
            free.append((start + take, b))
        free.sort()
        needed -= take
    return blocks


def build_fact_subset(
    recordings: RecordingSet, factor_k: int, rng_seed: int
) -> list[DataFile]:
    """One balanced file per seizure: the seizure centered in k x its length
    of non-seizure context.

    Each output file holds the full seizure with ``k*len/2`` of randomly
    selected non-seizure signal on each side, so the total length is
    ``(1+k) * len`` and the seizure fraction exactly ``1/(1+k)``.  Selection
    is seeded and draws contiguous blocks, without replacement across all
    files of a subject, from regions at least 60 s away from any seizure.
    """
    if factor_k < 1:
        raise ValidationError(f"factor_k must be a positive integer, got {factor_k}")
    out: list[DataFile] = []
    for ordinal, subject in enumerate(recordings.subjects()):
        tl = SubjectTimeline(recordings, subject)
        if not tl.events:
            raise DomainError(f"subject {subject}: no seizures; Fact-{factor_k} undefined")
        rng = np.random.default_rng([rng_seed, ordinal])
        guard = int(round(FACT_GUARD_S * tl.fs))
        free = _free_intervals(tl, guard)
        for j, (s, e) in enumerate(_event_samples(tl)):
            length = e - s
            side = factor_k * length
            left_n = side // 2
            right_n = side - left_n
            left = sorted(_draw_blocks(free, left_n, rng, subject))
            right = sorted(_draw_blocks(free, right_n, rng, subject))
            segments = left + [(s, e)] + right
            duration_s = (left_n + length + right_n) / tl.fs
            meta = RecordingMeta(
                subject_id=subject,
                file_id=f"{subject}_fact{factor_k}_{j:02d}",
                duration_s=duration_s,
                n_channels=tl.n_channels,
                fs=tl.fs,
                seq_index=j,
            )
            ev = Event(left_n / tl.fs, (left_n + length) / tl.fs)
            out.append(DataFile(meta=meta, events=(ev,), source=tl.source_for(segments)))
    return out


def build_seizure_to_seizure(recordings: RecordingSet) -> list[DataFile]:
    """Files running from the end of the previous seizure to the end of the next.

    The subject timeline is cut at every seizure end, so each file carries
    exactly one seizure, at its end.  The final file extends to the end of
    the data, so the files are an exact partition of the timeline.
    """
    out: list[DataFile] = []
    for subject in recordings.subjects():
        tl = SubjectTimeline(recordings, subject)
        if not tl.events:
            raise DomainError(f"subject {subject}: no seizures; cannot cut seizure-to-seizure")
        cuts = _event_samples(tl)
        prev = 0
        for j, (s, e) in enumerate(cuts):
            hi = e if j < len(cuts) - 1 else tl.total_samples
            meta = RecordingMeta(
                subject_id=subject,
                file_id=f"{subject}_stos_{j:02d}",
                duration_s=(hi - prev) / tl.fs,
                n_channels=tl.n_channels,
                fs=tl.fs,
                seq_index=j,
            )
            ev = Event((s - prev) / tl.fs, (e - prev) / tl.fs)
            out.append(
                DataFile(meta=meta, events=(ev,), source=tl.source_for([(prev, hi)]))
            )
            prev = hi
    return out


def build_fixed_windows(
    recordings: RecordingSet,
    window_h: float,
    first_fold_min_h: float = 5.0,
    first_fold_min_seizures: int = 1,
) -> list[DataFile]:
    """Fixed-duration files with an enlarged first file.

    The first file extends until it spans at least ``first_fold_min_h`` hours
    and fully contains ``first_fold_min_seizures`` seizures; if the seizure
    requirement forces it past the minimum, it grows to the next whole-window
    boundary.  The rest of the timeline is cut into ``window_h`` slices, the
    final partial slice kept.  Files may contain zero or several seizures;
    a seizure crossing a cut is split between the adjacent files.
    """
    if window_h <= 0:
        raise ValidationError(f"window_h must be positive, got {window_h}")
    out: list[DataFile] = []
    for subject in recordings.subjects():
        tl = SubjectTimeline(recordings, subject)
        win_n = int(round(window_h * 3600 * tl.fs))
        min_n = int(round(first_fold_min_h * 3600 * tl.fs))
        if tl.total_samples < min_n:
            raise CapacityError(
                f"subject {subject}: recording of {tl.total_duration_s / 3600:.2f} h "
                f"is shorter than the {first_fold_min_h} h first-file minimum"
            )
        ends = [e for _, e in _event_samples(tl)]
        if len(ends) < first_fold_min_seizures:
            raise CapacityError(
                f"subject {subject}: {len(ends)} seizures cannot satisfy the "
                f"first-file requirement of {first_fold_min_seizures}"
            )
        need = ends[first_fold_min_seizures - 1]
        if need <= min_n:
            first_end = min_n
        else:
            first_end = int(np.ceil(need / win_n)) * win_n
        first_end = min(first_end, tl.total_samples)

        cuts = [0, first_end]
        while cuts[-1] < tl.total_samples:
            cuts.append(min(cuts[-1] + win_n, tl.total_samples))
        for j, (lo, hi) in enumerate(zip(cuts[:-1], cuts[1:])):
            span = Event(lo / tl.fs, hi / tl.fs)
            inside = []
            for ev in tl.events:
                cut = Event(max(ev.start, span.start), min(ev.end, span.end)) if ev.intersects(span) else None
                if cut is not None:
                    inside.append(cut.shift(-span.start))
            meta = RecordingMeta(
                subject_id=subject,
                file_id=f"{subject}_win{window_h:g}h_{j:02d}",
                duration_s=(hi - lo) / tl.fs,
                n_channels=tl.n_channels,
                fs=tl.fs,
                seq_index=j,
            )
            out.append(
                DataFile(meta=meta, events=tuple(inside), source=tl.source_for([(lo, hi)]))
            )
    return out


# ---------------------------------------------------------------------------
# Fold plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fold:
    """One train/test split, by file id."""

    train: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        if not self.train or not self.test:
            raise ValidationError("fold must have non-empty train and test sets")
        if set(self.train) & set(self.test):
            raise ValidationError(
                f"train and test overlap: {sorted(set(self.train) & set(self.test))}"
            )


@dataclass(frozen=True)
class FoldPlan:
    """Ordered folds plus the scheme and scope that produced them."""

    folds: tuple[Fold, ...]
    scheme: str
    scope: str = "personalized"

    def __post_init__(self):
        if not self.folds:
            raise ValidationError("fold plan must contain at least one fold")
        if self.scheme not in ("l1o", "tscv", "loso"):
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        if self.scope not in ("personalized", "generalized"):
            raise ValidationError(f"unknown scope {self.scope!r}")

    def to_json(self) -> str:
        doc = {
            "scheme": self.scheme,
            "scope": self.scope,
            "folds": [{"train": list(f.train), "test": list(f.test)} for f in self.folds],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        doc = json.loads(text)
        folds = tuple(
            Fold(tuple(f["train"]), tuple(f["test"])) for f in doc["folds"]
        )
        return cls(folds=folds, scheme=doc["scheme"], scope=doc["scope"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FoldPlan":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def make_folds_l1o(files: Sequence[Recording]) -> FoldPlan:
    """Leave-one-seizure-out: each fold tests one single-seizure file.

    Data from one seizure is held out; seizures both before and after it
    train the model.  Requires every file to hold exactly one seizure, which
    the Fact-k and seizure-to-seizure arrangements guarantee.
    """
    for f in files:
        if len(f.events) != 1:
            raise ValidationError(
                f"{f.meta.file_id}: leave-one-seizure-out needs exactly one "
                f"seizure per file, found {len(f.events)}"
            )
    if len(files) < 2:
        raise DomainError(f"need at least 2 files, got {len(files)}")
    ids = [f.meta.file_id for f in files]
    folds = tuple(
        Fold(train=tuple(x for x in ids if x != ids[i]), test=(ids[i],))
        for i in range(len(ids))
    )
    return FoldPlan(folds=folds, scheme="l1o")


def make_folds_tscv(files: Sequence[Recording]) -> FoldPlan:
    """Expanding-window time-series cross-validation.

    Fold i trains on the first i files and tests on file i+1, so training
    only ever sees data acquired before the test data.  ``files`` must be in
    temporal order (ascending ``seq_index`` per subject).
    """
    if len(files) < 2:
        raise DomainError(f"need at least 2 files for expanding folds, got {len(files)}")
    for a, b in zip(files[:-1], files[1:]):
        if a.meta.subject_id == b.meta.subject_id and a.meta.seq_index >= b.meta.seq_index:
            raise ValidationError(
                f"files not in temporal order: {a.meta.file_id} (seq "
                f"{a.meta.seq_index}) precedes {b.meta.file_id} (seq {b.meta.seq_index})"
            )
    ids = [f.meta.file_id for f in files]
    folds = tuple(
        Fold(train=tuple(ids[: i + 1]), test=(ids[i + 1],)) for i in range(len(ids) - 1)
    )
    return FoldPlan(folds=folds, scheme="tscv")


def make_scope_generalized(
    files: Iterable[Recording], test_subject: str | None = None
) -> FoldPlan:
    """Leave-one-subject-out folds: train on every other subject's files.

    With ``test_subject`` given, a single fold for that subject; otherwise
    one fold per subject, in sorted subject order.
    """
    files = list(files)
    by_subject: dict[str, list[str]] = {}
    for f in files:
        by_subject.setdefault(f.meta.subject_id, []).append(f.meta.file_id)
    if len(by_subject) < 2:
        raise DomainError(
            f"leave-one-subject-out needs >= 2 subjects, got {sorted(by_subject)}"
        )
    targets = [test_subject] if test_subject is not None else sorted(by_subject)
    if test_subject is not None and test_subject not in by_subject:
        raise DomainError(f"unknown test subject {test_subject!r}")
    folds = []
    for subject in targets:
        train = tuple(
            fid for s in sorted(by_subject) if s != subject for fid in by_subject[s]
        )
        folds.append(Fold(train=train, test=tuple(by_subject[subject])))
    return FoldPlan(folds=tuple(folds), scheme="loso", scope="generalized")


def validate_plan(plan: FoldPlan, files: Sequence[Recording]) -> None:
    """Check a plan's structural invariants against the files it names.

    Verifies that every referenced id exists, train/test are disjoint (the
    Fold type already enforces it), time-series folds respect temporal
    precedence within each subject, and generalized folds never share a
    subject between train and test.
    """
    catalog: Mapping[str, RecordingMeta] = {f.meta.file_id: f.meta for f in files}
    for k, fold in enumerate(plan.folds):
        for fid in fold.train + fold.test:
            if fid not in catalog:
                raise ValidationError(f"fold {k}: unknown file id {fid!r}")
        if plan.scheme == "tscv":
            for tr in fold.train:
                for te in fold.test:
                    a, b = catalog[tr], catalog[te]
                    if a.subject_id == b.subject_id and a.seq_index >= b.seq_index:
                        raise ValidationError(
                            f"fold {k}: training file {tr} (seq {a.seq_index}) does "
                            f"not precede test file {te} (seq {b.seq_index})"
                        )
        if plan.scope == "generalized":
            train_subjects = {catalog[t].subject_id for t in fold.train}
            test_subjects = {catalog[t].subject_id for t in fold.test}
            if train_subjects & test_subjects:
                raise ValidationError(
                    f"fold {k}: subjects {sorted(train_subjects & test_subjects)} "
                    "appear in both train and test"
                )
