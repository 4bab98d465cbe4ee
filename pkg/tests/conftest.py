"""Shared helpers for the test suite: tiny in-memory recordings."""

from __future__ import annotations

import numpy as np
import pytest

from seizeval.timeline import (
    ArraySource,
    Event,
    Recording,
    RecordingMeta,
    RecordingSet,
)


def make_recording(
    subject="s01",
    seq=0,
    duration_s=600.0,
    events=(),
    fs=64.0,
    n_channels=2,
    payload=None,
    file_id=None,
):
    """Small in-memory recording; payload defaults to zeros."""
    n = int(round(duration_s * fs))
    if payload is None:
        payload = np.zeros((n_channels, n))
    meta = RecordingMeta(
        subject_id=subject,
        file_id=file_id or f"{subject}_{seq:02d}",
        duration_s=duration_s,
        n_channels=payload.shape[0],
        fs=fs,
        seq_index=seq,
    )
    return Recording(meta=meta, events=tuple(events), source=ArraySource(payload))


def marker_recording(subject="s01", seq=0, duration_s=600.0, events=(), fs=64.0):
    """Recording whose channel 0 stores each sample's own global time in
    seconds, so slices can be traced back to their source positions."""
    n = int(round(duration_s * fs))
    payload = np.vstack([np.arange(n) / fs, np.zeros(n)])
    return make_recording(subject, seq, duration_s, events, fs, payload=payload)


def make_recset(*recordings) -> RecordingSet:
    return RecordingSet(list(recordings))


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def random_disjoint_events(rng, span_s, max_events=8, min_len=0.5) -> list[Event]:
    """Sorted non-overlapping events inside [0, span_s)."""
    n = int(rng.integers(0, max_events + 1))
    cuts = np.sort(rng.uniform(0, span_s, size=2 * n))
    events = []
    for s, e in zip(cuts[0::2], cuts[1::2]):
        if e - s >= min_len:
            events.append(Event(float(s), float(e)))
    return events
