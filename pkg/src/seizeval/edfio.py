"""EDF (European Data Format) reading and writing.

One strict parser serves two paths: real-world recordings (the CHB-MIT
container format) and this package's own synthetic output, which is written
by the minimal EDF-compatible writer below.  The parser validates header
arithmetic before touching sample data and reports truncation with byte
offsets; arbitrary byte streams must produce a clean error, never a crash.

Only plain EDF is handled.  Seizure times travel in the annotation CSV
(see :mod:`seizeval.timeline`), not in EDF+ annotation signals.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ChannelLookupError,
    EdfFormatError,
    EdfParseError,
    ValidationError,
)
from .timeline import (
    Recording,
    RecordingMeta,
    RecordingSet,
    read_annotations,
)

__all__ = [
    "EdfHeader",
    "CHB_COMMON_18",
    "parse_edf",
    "read_edf_header",
    "write_edf",
    "select_channels",
    "EdfSignalSource",
    "load_recording_set",
]

# The 18 bipolar derivations present in every CHB-MIT subject.
CHB_COMMON_18 = (
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1",
    "FP1-F3", "F3-C3", "C3-P3", "P3-O1",
    "FP2-F4", "F4-C4", "C4-P4", "P4-O2",
    "FP2-F8", "F8-T8", "T8-P8", "P8-O2",
    "FZ-CZ", "CZ-PZ",
)

_HEADER_SIZE = 256
_SIGNAL_HEADER_SIZE = 256
_DIG_MIN = -32768
_DIG_MAX = 32767


@dataclass(frozen=True)
class EdfHeader:
    """Decoded EDF header: global fields plus per-signal arrays."""

    version: str
    patient_id: str
    recording_id: str
    start_date: str
    start_time: str
    header_bytes: int
    n_records: int
    record_duration_s: float
    n_signals: int
    labels: tuple[str, ...]
    transducers: tuple[str, ...]
    phys_dims: tuple[str, ...]
    phys_mins: tuple[float, ...]
    phys_maxs: tuple[float, ...]
    dig_mins: tuple[int, ...]
    dig_maxs: tuple[int, ...]
    prefilters: tuple[str, ...]
    samples_per_record: tuple[int, ...]

    @property
    def duration_s(self) -> float:
        return self.n_records * self.record_duration_s

    def fs(self, signal_index: int) -> float:
        return self.samples_per_record[signal_index] / self.record_duration_s


def _text(buf: bytes, offset: int, size: int, what: str) -> str:
    raw = buf[offset : offset + size]
    if len(raw) < size:
        raise EdfParseError(
            f"truncated while reading {what}: wanted {size} bytes", offset=offset
        )
    try:
        return raw.decode("ascii").strip()
    except UnicodeDecodeError:
        raise EdfParseError(f"non-ASCII bytes in {what}", offset=offset) from None


def _int(buf: bytes, offset: int, size: int, what: str) -> int:
    text = _text(buf, offset, size, what)
    try:
        return int(text)
    except ValueError:
        raise EdfFormatError(
            f"{what} at byte {offset} is not an integer: {text!r}"
        ) from None


def _float(buf: bytes, offset: int, size: int, what: str) -> float:
    text = _text(buf, offset, size, what)
    try:
        value = float(text)
    except ValueError:
        raise EdfFormatError(
            f"{what} at byte {offset} is not numeric: {text!r}"
        ) from None
    if not np.isfinite(value):
        raise EdfFormatError(f"{what} at byte {offset} is not finite: {text!r}")
    return value


def _parse_header(buf: bytes) -> EdfHeader:
    if len(buf) < _HEADER_SIZE:
        raise EdfParseError(
            f"truncated header: wanted {_HEADER_SIZE} bytes, found {len(buf)}",
            offset=len(buf),
        )
    version = _text(buf, 0, 8, "version")
    patient_id = _text(buf, 8, 80, "patient id")
    recording_id = _text(buf, 88, 80, "recording id")
    start_date = _text(buf, 168, 8, "start date")
    start_time = _text(buf, 176, 8, "start time")
    header_bytes = _int(buf, 184, 8, "header byte count")
    n_records = _int(buf, 236, 8, "record count")
    record_duration = _float(buf, 244, 8, "record duration")
    n_signals = _int(buf, 252, 4, "signal count")

    if n_signals <= 0:
        raise EdfFormatError(f"signal count must be positive, got {n_signals}")
    expected_hdr = _HEADER_SIZE + _SIGNAL_HEADER_SIZE * n_signals
    if header_bytes != expected_hdr:
        raise EdfFormatError(
            f"header byte count {header_bytes} does not equal "
            f"256 + 256 x {n_signals} signals = {expected_hdr}"
        )
    if len(buf) < expected_hdr:
        raise EdfParseError(
            f"truncated signal headers: wanted {expected_hdr} bytes, found {len(buf)}",
            offset=len(buf),
        )
    if record_duration <= 0:
        raise EdfFormatError(f"record duration must be positive, got {record_duration}")
    if n_records < -1:
        raise EdfFormatError(f"record count must be >= 0 (or -1 for unknown), got {n_records}")

    # signal header fields are stored field-major: all labels, then all
    # transducers, and so on
    ns = n_signals
    pos = _HEADER_SIZE

    def block(size: int, what: str, conv) -> tuple:
        nonlocal pos
        out = tuple(conv(buf, pos + i * size, size, f"{what} of signal {i}") for i in range(ns))
        pos += size * ns
        return out

    labels = block(16, "label", _text)
    transducers = block(80, "transducer", _text)
    phys_dims = block(8, "physical dimension", _text)
    phys_mins = block(8, "physical minimum", _float)
    phys_maxs = block(8, "physical maximum", _float)
    dig_mins = block(8, "digital minimum", _int)
    dig_maxs = block(8, "digital maximum", _int)
    prefilters = block(80, "prefiltering", _text)
    samples_per_record = block(8, "samples per record", _int)

    for i in range(ns):
        if dig_mins[i] >= dig_maxs[i]:
            raise EdfFormatError(
                f"signal {i} ({labels[i]!r}): digital min {dig_mins[i]} "
                f"must be < digital max {dig_maxs[i]}"
            )
        if samples_per_record[i] <= 0:
            raise EdfFormatError(
                f"signal {i} ({labels[i]!r}): samples per record must be positive, "
                f"got {samples_per_record[i]}"
            )

    return EdfHeader(
        version=version,
        patient_id=patient_id,
        recording_id=recording_id,
        start_date=start_date,
        start_time=start_time,
        header_bytes=header_bytes,
        n_records=n_records,
        record_duration_s=record_duration,
        n_signals=ns,
        labels=labels,
        transducers=transducers,
        phys_dims=phys_dims,
        phys_mins=phys_mins,
        phys_maxs=phys_maxs,
        dig_mins=dig_mins,
        dig_maxs=dig_maxs,
        prefilters=prefilters,
        samples_per_record=samples_per_record,
    )


def read_edf_header(path: str | Path) -> EdfHeader:
    """Decode only the header of an EDF file (cheap; no sample data read)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER_SIZE)
        if len(head) < _HEADER_SIZE:
            raise EdfParseError(
                f"{path}: truncated header: wanted {_HEADER_SIZE} bytes, "
                f"found {len(head)}",
                offset=len(head),
            )
        try:
            ns = int(head[252:256].decode("ascii").strip())
        except (UnicodeDecodeError, ValueError):
            raise EdfFormatError(f"{path}: unreadable signal count field") from None
        if ns <= 0:
            raise EdfFormatError(f"{path}: signal count must be positive, got {ns}")
        rest = fh.read(_SIGNAL_HEADER_SIZE * ns)
    return _parse_header(head + rest)


def parse_edf(source: bytes | str | Path) -> tuple[EdfHeader, list[np.ndarray]]:
    """Decode an EDF byte stream into a header and per-signal physical samples.

    ``source`` is either the raw bytes or a path to read them from.  Samples
    are 2-byte little-endian two's-complement integers, scaled linearly from
    ``[dig_min, dig_max]`` to ``[phys_min, phys_max]`` per signal.  Signals
    may have different sampling rates, so the result is a list of 1-D arrays.

    A stream shorter than its own declared size raises
    :class:`~seizeval.errors.EdfParseError` naming expected and actual byte
    counts; internally inconsistent headers raise
    :class:`~seizeval.errors.EdfFormatError`.
    """
    if isinstance(source, (str, Path)):
        buf = Path(source).read_bytes()
    else:
        buf = bytes(source)
    header = _parse_header(buf)

    spr = np.asarray(header.samples_per_record, dtype=np.int64)
    record_bytes = int(2 * spr.sum())
    data_bytes = len(buf) - header.header_bytes
    n_records = header.n_records
    if n_records == -1:
        # unknown record count: infer from the payload size
        if data_bytes % record_bytes != 0:
            raise EdfFormatError(
                f"payload of {data_bytes} bytes is not a whole number of "
                f"{record_bytes}-byte records"
            )
        n_records = data_bytes // record_bytes
        header = dataclasses.replace(header, n_records=n_records)
    expected = record_bytes * n_records
    if data_bytes < expected:
        raise EdfParseError(
            f"truncated data records: expected {expected} data bytes "
            f"({n_records} records x {record_bytes} bytes), found {data_bytes}",
            offset=len(buf),
        )
    if data_bytes > expected:
        raise EdfFormatError(
            f"{data_bytes - expected} trailing bytes after the declared "
            f"{n_records} data records"
        )

    raw = np.frombuffer(buf, dtype="<i2", offset=header.header_bytes)
    table = raw.reshape(n_records, record_bytes // 2)
    offsets = np.concatenate(([0], np.cumsum(spr)))
    signals = []
    for i in range(header.n_signals):
        dig = table[:, offsets[i] : offsets[i + 1]].reshape(-1).astype(np.float64)
        gain = (header.phys_maxs[i] - header.phys_mins[i]) / (
            header.dig_maxs[i] - header.dig_mins[i]
        )
        signals.append((dig - header.dig_mins[i]) * gain + header.phys_mins[i])
    return header, signals


def select_channels(
    header: EdfHeader,
    signals: Sequence[np.ndarray],
    wanted_labels: Sequence[str],
) -> np.ndarray:
    """Reorder parsed signals into a ``(len(wanted), n_samples)`` matrix.

    Labels are matched after whitespace stripping.  Every wanted label must
    occur exactly once; a duplicate in the file is ambiguous and rejected
    rather than silently resolved.
    """
    available = [lab.strip() for lab in header.labels]
    rows = []
    length = None
    for want in wanted_labels:
        hits = [i for i, lab in enumerate(available) if lab == want.strip()]
        if not hits:
            raise ChannelLookupError(
                f"channel {want!r} not present; available: {sorted(set(available))}"
            )
        if len(hits) > 1:
            raise ChannelLookupError(
                f"channel {want!r} appears {len(hits)} times (signals {hits}); "
                "disambiguate by index before selection"
            )
        i = hits[0]
        if length is None:
            length = len(signals[i])
        elif len(signals[i]) != length:
            raise ChannelLookupError(
                f"channel {want!r} has {len(signals[i])} samples but previous "
                f"selected channels have {length}; mixed rates cannot form a matrix"
            )
        rows.append(signals[i])
    return np.stack(rows)


def _fit8(value: float) -> str:
    """Render a float into at most 8 ASCII characters, round-trippable."""
    for digits in range(8, 0, -1):
        s = f"{value:.{digits}g}"
        if len(s) <= 8:
            return s
    raise ValidationError(f"cannot render {value!r} in 8 characters")


def write_edf(
    path: str | Path,
    signals: np.ndarray,
    fs: float,
    labels: Sequence[str] | None = None,
    phys_range: tuple[float, float] | None = None,
    patient_id: str = "X",
    recording_id: str = "synthetic",
    start_date: str = "01.01.26",
    start_time: str = "00.00.00",
) -> None:
    """Write a ``(n_channels, n_samples)`` matrix as a minimal EDF file.

    Uses 1-second data records, so ``fs`` must be a whole number and the
    sample count a multiple of ``fs``.  Values are quantized onto the 16-bit
    grid spanned by ``phys_range`` (default: tight symmetric range per call);
    the physical min/max written to the header are the exact 8-character
    decimals used for quantization, which makes write-then-parse exact at the
    digital level.
    """
    sig = np.asarray(signals, dtype=np.float64)
    if sig.ndim != 2:
        raise ValidationError(f"signals must be 2-D (channels x samples), got {sig.shape}")
    n_channels, n_samples = sig.shape
    spr = int(round(fs))
    if spr != fs or spr <= 0:
        raise ValidationError(f"fs must be a positive integer for 1 s records, got {fs}")
    if n_samples % spr != 0:
        raise ValidationError(
            f"sample count {n_samples} is not a whole number of 1 s records at fs={spr}"
        )
    n_records = n_samples // spr
    if labels is None:
        labels = [f"CH{c:02d}" for c in range(n_channels)]
    if len(labels) != n_channels:
        raise ValidationError(f"{len(labels)} labels for {n_channels} channels")
    for lab in labels:
        if len(lab) > 16 or not lab.isascii():
            raise ValidationError(f"label {lab!r} must be ASCII and at most 16 chars")

    if phys_range is None:
        peak = float(np.max(np.abs(sig))) if sig.size else 0.0
        peak = max(peak, 1e-6)
        phys_range = (-peak, peak)
    pmin_s, pmax_s = _fit8(phys_range[0]), _fit8(phys_range[1])
    # quantize against the values as they will be re-read from the header
    pmin, pmax = float(pmin_s), float(pmax_s)
    if not pmin < pmax:
        raise ValidationError(f"physical range must satisfy min < max, got [{pmin}, {pmax}]")
    gain = (pmax - pmin) / (_DIG_MAX - _DIG_MIN)
    dig = np.rint((sig - pmin) / gain) + _DIG_MIN
    dig = np.clip(dig, _DIG_MIN, _DIG_MAX).astype("<i2")

    def pad(text: str, size: int) -> bytes:
        b = text.encode("ascii")
        if len(b) > size:
            raise ValidationError(f"field {text!r} exceeds {size} bytes")
        return b.ljust(size)

    ns = n_channels
    head = b"".join(
        [
            pad("0", 8),
            pad(patient_id, 80),
            pad(recording_id, 80),
            pad(start_date, 8),
            pad(start_time, 8),
            pad(str(_HEADER_SIZE + _SIGNAL_HEADER_SIZE * ns), 8),
            pad("", 44),
            pad(str(n_records), 8),
            pad("1", 8),
            pad(str(ns), 4),
        ]
    )
    sig_head = b"".join(
        [
            b"".join(pad(lab, 16) for lab in labels),
            b"".join(pad("", 80) for _ in range(ns)),
            b"".join(pad("uV", 8) for _ in range(ns)),
            b"".join(pad(pmin_s, 8) for _ in range(ns)),
            b"".join(pad(pmax_s, 8) for _ in range(ns)),
            b"".join(pad(str(_DIG_MIN), 8) for _ in range(ns)),
            b"".join(pad(str(_DIG_MAX), 8) for _ in range(ns)),
            b"".join(pad("", 80) for _ in range(ns)),
            b"".join(pad(str(spr), 8) for _ in range(ns)),
            b"".join(pad("", 32) for _ in range(ns)),
        ]
    )
    # record-major interleave: for each 1 s record, each channel's block
    records = dig.reshape(n_channels, n_records, spr).transpose(1, 0, 2)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(sig_head)
        fh.write(records.tobytes())


class EdfSignalSource:
    """Lazy signal loader: parses its EDF file on each load() call.

    Keeps memory flat when iterating many files; parsing an hour-long file
    is cheap next to filtering it.
    """

    def __init__(self, path: str | Path, channels: Sequence[str] | None = None):
        self.path = Path(path)
        self.channels = tuple(channels) if channels is not None else None

    def load(self) -> np.ndarray:
        header, signals = parse_edf(self.path)
        if self.channels is not None:
            return select_channels(header, signals, self.channels)
        return select_channels(header, signals, header.labels)


_FILE_STEM = re.compile(r"^(?P<subject>.+?)_(?P<num>\d+)$")


def load_recording_set(
    data_dir: str | Path,
    annotations_csv: str | Path | None = None,
    channels: Sequence[str] | None = None,
) -> RecordingSet:
    """Assemble a RecordingSet from a directory of EDF files plus annotations.

    File stems must follow ``<subject>_<number>.edf`` (the CHB-MIT layout,
    e.g. ``chb01_03.edf``); the number gives the temporal order within the
    subject.  ``annotations_csv`` holds the seizure events keyed by subject
    and file stem (defaulting to ``annotations.csv`` inside ``data_dir`` when
    present); files absent from it simply carry no seizures.  Signals stay
    on disk until a recording's ``load_signal`` is called.
    """
    data_dir = Path(data_dir)
    paths = sorted(data_dir.glob("*.edf"))
    if not paths:
        raise ValidationError(f"no .edf files found in {data_dir}")
    if annotations_csv is None and (data_dir / "annotations.csv").exists():
        annotations_csv = data_dir / "annotations.csv"
    events_by_key = read_annotations(annotations_csv) if annotations_csv else {}

    per_subject: dict[str, list[Path]] = {}
    for p in paths:
        m = _FILE_STEM.match(p.stem)
        if not m:
            raise ValidationError(
                f"{p.name}: file stem must look like <subject>_<number> "
                "so temporal order is defined"
            )
        per_subject.setdefault(m.group("subject"), []).append(p)

    recordings = []
    for subject in sorted(per_subject):
        ordered = sorted(per_subject[subject], key=lambda p: int(_FILE_STEM.match(p.stem).group("num")))
        for seq, p in enumerate(ordered):
            header = read_edf_header(p)
            wanted = tuple(channels) if channels is not None else tuple(
                lab.strip() for lab in header.labels
            )
            for lab in wanted:
                if lab not in [x.strip() for x in header.labels]:
                    raise ChannelLookupError(
                        f"{p.name}: channel {lab!r} not present; available: "
                        f"{[x.strip() for x in header.labels]}"
                    )
            rates = {header.fs(i) for i, lab in enumerate(header.labels) if lab.strip() in wanted}
            if len(rates) != 1:
                raise ValidationError(
                    f"{p.name}: selected channels have mixed sampling rates {sorted(rates)}"
                )
            meta = RecordingMeta(
                subject_id=subject,
                file_id=p.stem,
                duration_s=header.duration_s,
                n_channels=len(wanted),
                fs=rates.pop(),
                seq_index=seq,
            )
            events = events_by_key.get((subject, p.stem), [])
            recordings.append(
                Recording(meta=meta, events=tuple(events), source=EdfSignalSource(p, wanted))
            )

    leftover = set(events_by_key) - {
        (r.meta.subject_id, r.meta.file_id) for r in recordings
    }
    if leftover:
        raise ValidationError(
            f"annotations reference files not present in {data_dir}: {sorted(leftover)}"
        )
    return RecordingSet(recordings)
