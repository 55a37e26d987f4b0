"""Readers and writers for RTTM, JSON-lines proposals and DEMB embeddings.

DEMB layout (all little-endian)::

    b"DEMB" | u32 version | u32 id_len | id bytes (UTF-8) | u32 dim |
    u32 frame_count | f64 hop_seconds | f64 window_seconds | u8 has_activity |
    f32[frame_count * dim] frames (row-major) | f32[frame_count] activity?
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import (
    BadMagicError,
    DiarizationError,
    EmbeddingFormatError,
    InvalidDimensionError,
    InvalidIntervalError,
    ProposalParseError,
    RttmParseError,
    TruncatedPayloadError,
)
from .timeline import DiarizationAnnotation, SpeakerSegment, TimeInterval, normalize_annotation

# HuBERT front end: 16 kHz audio, 320-sample stride, 400-sample window, 1280-d features
SAMPLE_RATE = 16000
FRAME_STRIDE = 320
FRAME_WINDOW = 400
FEATURE_DIM = 1280
DEFAULT_HOP = FRAME_STRIDE / SAMPLE_RATE
DEFAULT_WINDOW = FRAME_WINDOW / SAMPLE_RATE

DEMB_MAGIC = b"DEMB"
DEMB_VERSION = 1
_DEMB_HEAD = struct.Struct("<4sI")
_DEMB_SHAPE = struct.Struct("<IIddB")

TextSource = str | IO[str]


def _lines(text: TextSource) -> Iterator[str]:
    if isinstance(text, str):
        return iter(text.splitlines())
    return (line.rstrip("\r\n") for line in text)


# ---------------------------------------------------------------- RTTM


def _rttm_number(token: str, what: str, lineno: int, line: str) -> Decimal:
    try:
        value = Decimal(token)
    except InvalidOperation:
        raise RttmParseError(f"non-numeric {what} {token!r}", lineno, line) from None
    if not value.is_finite():
        raise RttmParseError(f"non-finite {what} {token!r}", lineno, line)
    return value


def parse_rttm(text: TextSource, warnings: list[str] | None = None) -> dict[str, DiarizationAnnotation]:
    """Parse RTTM text into normalized annotations keyed by recording id.

    Lines of other types (``SPKR-INFO``, ``NON-LEX`` ...) are skipped; a note is
    appended to ``warnings`` when a list is given.
    """
    segments: dict[str, list[SpeakerSegment]] = {}
    for lineno, line in enumerate(_lines(text), start=1):
        fields = line.split()
        if not fields:
            continue
        if fields[0] != "SPEAKER":
            if warnings is not None:
                warnings.append(f"line {lineno}: skipped {fields[0]} line")
            continue
        if len(fields) != 10:
            raise RttmParseError(f"expected 10 fields, got {len(fields)}", lineno, line)
        _, rec, _chan, tbeg, tdur, _ortho, _stype, name = fields[:8]
        start = _rttm_number(tbeg, "onset", lineno, line)
        dur = _rttm_number(tdur, "duration", lineno, line)
        if dur <= 0:
            raise RttmParseError(f"non-positive duration {tdur}", lineno, line)
        # decimal sum so that e.g. 0.100 + 0.200 lands exactly on float 0.3
        try:
            interval = TimeInterval(float(start), float(start + dur))
        except InvalidIntervalError as exc:
            raise RttmParseError(str(exc), lineno, line) from None
        segments.setdefault(rec, []).append(SpeakerSegment(rec, name, interval))
    return {
        rec: normalize_annotation(DiarizationAnnotation(rec, segs))
        for rec, segs in segments.items()
    }


def write_rttm(annotations: dict[str, DiarizationAnnotation] | Iterable[DiarizationAnnotation]) -> str:
    if isinstance(annotations, dict):
        annotations = annotations.values()
    rows = []
    for ann in annotations:
        for seg in ann.segments:
            start = Decimal(f"{seg.start:.3f}")
            dur = Decimal(f"{seg.end:.3f}") - start
            rows.append((seg.recording_id, seg.start, seg.speaker, start, dur))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return "".join(
        f"SPEAKER {rec} 1 {start} {dur} <NA> <NA> {speaker} <NA> <NA>\n"
        for rec, _, speaker, start, dur in rows
    )


# ---------------------------------------------------------------- proposals


@dataclass(frozen=True, slots=True)
class ProposalRecord:
    recording_id: str
    start: float
    end: float
    speaker: str
    score: float
    source: str = "unknown"

    def __post_init__(self):
        for name in ("start", "end", "score"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidIntervalError(f"{name} must be a number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise InvalidIntervalError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.start < 0:
            raise InvalidIntervalError(f"negative start {self.start}")
        if not self.start < self.end:
            raise InvalidIntervalError(f"start {self.start} must be < end {self.end}")
        if self.score < 0:
            raise InvalidIntervalError(f"negative score {self.score}")
        for name in ("recording_id", "speaker", "source"):
            if not isinstance(getattr(self, name), str) or not getattr(self, name):
                raise DiarizationError(f"{name} must be a non-empty string")

    @property
    def interval(self) -> TimeInterval:
        return TimeInterval(self.start, self.end)


_REQUIRED = ("recording_id", "start", "end", "speaker", "score")


def read_proposals(text: TextSource) -> list[ProposalRecord]:
    records = []
    for lineno, line in enumerate(_lines(text), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, parse_constant=_reject_constant)
        except ValueError as exc:
            raise ProposalParseError(f"invalid JSON: {exc}", lineno, line) from None
        if not isinstance(obj, dict):
            raise ProposalParseError("expected a JSON object", lineno, line)
        missing = [key for key in _REQUIRED if key not in obj]
        if missing:
            raise ProposalParseError(f"missing key(s) {', '.join(missing)}", lineno, line)
        try:
            records.append(
                ProposalRecord(
                    obj["recording_id"], obj["start"], obj["end"], obj["speaker"],
                    obj["score"], obj.get("source", "unknown"),
                )
            )
        except DiarizationError as exc:
            raise ProposalParseError(str(exc), lineno, line) from None
    return records


def _reject_constant(name: str):
    raise ValueError(f"non-finite constant {name}")


def write_proposals(props: Iterable[ProposalRecord]) -> str:
    out = io.StringIO()
    for p in props:
        obj = {
            "recording_id": p.recording_id,
            "start": p.start,
            "end": p.end,
            "speaker": p.speaker,
            "score": p.score,
            "source": p.source,
        }
        out.write(json.dumps(obj, allow_nan=False))
        out.write("\n")
    return out.getvalue()


# ---------------------------------------------------------------- embeddings


@dataclass(eq=False)
class EmbeddingSequence:
    """Frame-level features; frame ``i`` covers ``[i*hop, i*hop + window)``."""

    recording_id: str
    frames: np.ndarray
    hop_seconds: float = DEFAULT_HOP
    window_seconds: float = DEFAULT_WINDOW
    activity: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise InvalidDimensionError(f"frames must be 2-D, got shape {self.frames.shape}")
        if self.frames.shape[1] == 0:
            raise InvalidDimensionError("embedding dim must be positive")
        if not (self.hop_seconds > 0 and self.window_seconds > 0):
            raise EmbeddingFormatError("hop and window must be positive")
        if self.activity is not None:
            self.activity = np.asarray(self.activity, dtype=np.float32)
            if self.activity.shape != (self.frame_count,):
                raise EmbeddingFormatError(
                    f"activity has shape {self.activity.shape}, expected ({self.frame_count},)"
                )
            if np.any(~((self.activity >= 0) & (self.activity <= 1))):
                raise EmbeddingFormatError("activity values must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def duration(self) -> float:
        return self.frame_count * self.hop_seconds


def read_embeddings(data: bytes | IO[bytes]) -> EmbeddingSequence:
    if not isinstance(data, (bytes, bytearray, memoryview)):
        data = data.read()
    buf = memoryview(data)
    if bytes(buf[:4]) != DEMB_MAGIC:
        raise BadMagicError(f"bad magic {bytes(buf[:4])!r}")
    if len(buf) < _DEMB_HEAD.size:
        raise TruncatedPayloadError("header truncated")
    _, version = _DEMB_HEAD.unpack_from(buf, 0)
    if version != DEMB_VERSION:
        raise EmbeddingFormatError(f"unsupported DEMB version {version}")
    pos = _DEMB_HEAD.size
    if len(buf) < pos + 4:
        raise TruncatedPayloadError("header truncated")
    (id_len,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    if len(buf) < pos + id_len + _DEMB_SHAPE.size:
        raise TruncatedPayloadError("header truncated")
    try:
        recording_id = bytes(buf[pos : pos + id_len]).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EmbeddingFormatError(f"recording id is not UTF-8: {exc}") from None
    pos += id_len
    dim, count, hop, window, has_activity = _DEMB_SHAPE.unpack_from(buf, pos)
    pos += _DEMB_SHAPE.size
    if dim == 0:
        raise InvalidDimensionError("dim must be positive")
    if has_activity not in (0, 1):
        raise EmbeddingFormatError(f"has_activity flag must be 0 or 1, got {has_activity}")
    expected = pos + 4 * count * dim + (4 * count if has_activity else 0)
    if len(buf) != expected:
        raise TruncatedPayloadError(f"payload has {len(buf)} bytes, header promises {expected}")
    frames = np.frombuffer(buf, dtype="<f4", count=count * dim, offset=pos).reshape(count, dim)
    pos += 4 * count * dim
    activity = None
    if has_activity:
        activity = np.frombuffer(buf, dtype="<f4", count=count, offset=pos).astype(np.float32)
    return EmbeddingSequence(recording_id, frames.astype(np.float32), hop, window, activity)


def write_embeddings(seq: EmbeddingSequence) -> bytes:
    rec = seq.recording_id.encode("utf-8")
    parts = [
        _DEMB_HEAD.pack(DEMB_MAGIC, DEMB_VERSION),
        struct.pack("<I", len(rec)),
        rec,
        _DEMB_SHAPE.pack(seq.dim, seq.frame_count, seq.hop_seconds, seq.window_seconds,
                         int(seq.activity is not None)),
        np.ascontiguousarray(seq.frames, dtype="<f4").tobytes(),
    ]
    if seq.activity is not None:
        parts.append(np.ascontiguousarray(seq.activity, dtype="<f4").tobytes())
    return b"".join(parts)


def group_by_recording(props: Iterable[ProposalRecord]) -> dict[str, list[ProposalRecord]]:
    """Split proposals per recording; keys in sorted order."""
    groups: dict[str, list[ProposalRecord]] = {}
    for p in props:
        groups.setdefault(p.recording_id, []).append(p)
    return {rec: groups[rec] for rec in sorted(groups)}
