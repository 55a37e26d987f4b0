"""Half-open time intervals and diarization annotations.

All times are float seconds compared exactly: ``[start, end)`` intervals that
touch at a point do not overlap.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidIntervalError, RecordingMismatchError

Span = tuple[float, float]


@dataclass(frozen=True, order=True, slots=True)
class TimeInterval:
    start: float
    end: float

    def __post_init__(self):
        start, end = float(self.start), float(self.end)
        if not (math.isfinite(start) and math.isfinite(end)):
            raise InvalidIntervalError(f"non-finite interval [{start}, {end})")
        if start < 0:
            raise InvalidIntervalError(f"negative start in [{start}, {end})")
        if not start < end:
            raise InvalidIntervalError(f"empty or reversed interval [{start}, {end})")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def duration(self) -> float:
        return self.end - self.start

    def overlaps(self, other: TimeInterval) -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True, slots=True)
class SpeakerSegment:
    recording_id: str
    speaker: str
    interval: TimeInterval

    def __post_init__(self):
        if not isinstance(self.recording_id, str) or not self.recording_id:
            raise InvalidIntervalError("segment recording_id must be a non-empty string")
        if not isinstance(self.speaker, str) or not self.speaker:
            raise InvalidIntervalError("segment speaker must be a non-empty string")

    @property
    def start(self) -> float:
        return self.interval.start

    @property
    def end(self) -> float:
        return self.interval.end


@dataclass(frozen=True)
class DiarizationAnnotation:
    """Speaker segments of one recording. Distinct speakers may overlap."""

    recording_id: str
    segments: tuple[SpeakerSegment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        segments = tuple(self.segments)
        for seg in segments:
            if seg.recording_id != self.recording_id:
                raise RecordingMismatchError(
                    f"segment of recording {seg.recording_id!r} inside annotation "
                    f"for {self.recording_id!r}"
                )
        object.__setattr__(self, "segments", segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def speakers(self) -> list[str]:
        return sorted({seg.speaker for seg in self.segments})

    def spans_by_speaker(self) -> dict[str, list[Span]]:
        out: dict[str, list[Span]] = defaultdict(list)
        for seg in self.segments:
            out[seg.speaker].append((seg.start, seg.end))
        return dict(out)

    @classmethod
    def from_spans(cls, recording_id: str, spans: dict[str, Iterable[Span]]) -> DiarizationAnnotation:
        segments = [
            SpeakerSegment(recording_id, speaker, TimeInterval(s, e))
            for speaker, items in spans.items()
            for s, e in items
        ]
        return normalize_annotation(cls(recording_id, segments))


def interval_iou(a: TimeInterval, b: TimeInterval) -> float:
    return span_iou(a.start, a.end, b.start, b.end)


def span_iou(s1: float, e1: float, s2: float, e2: float) -> float:
    inter = min(e1, e2) - max(s1, s2)
    if inter <= 0.0:
        return 0.0
    union = (e1 - s1) + (e2 - s2) - inter
    return inter / union


def merge_spans(spans: Iterable[Span]) -> list[Span]:
    """Union of spans as a sorted disjoint list; touching spans are joined."""
    ordered = sorted(spans)
    merged: list[list[float]] = []
    for s, e in ordered:
        if merged and s <= merged[-1][1]:
            if e > merged[-1][1]:
                merged[-1][1] = e
        else:
            merged.append([s, e])
    return [(s, e) for s, e in merged]


def spans_duration(spans: Iterable[Span]) -> float:
    return math.fsum(e - s for s, e in merge_spans(spans))


def union_duration(intervals: Iterable[TimeInterval]) -> float:
    return spans_duration((iv.start, iv.end) for iv in intervals)


def intersect_spans(a: Sequence[Span], b: Sequence[Span]) -> list[Span]:
    """Intersection of two sorted disjoint span lists."""
    out: list[Span] = []
    i = j = 0
    while i < len(a) and j < len(b):
        s = max(a[i][0], b[j][0])
        e = min(a[i][1], b[j][1])
        if s < e:
            out.append((s, e))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def subtract_spans(a: Sequence[Span], b: Sequence[Span]) -> list[Span]:
    """``a`` minus ``b``; both sorted and disjoint."""
    out: list[Span] = []
    j = 0
    for s, e in a:
        cur = s
        while j < len(b) and b[j][1] <= cur:
            j += 1
        k = j
        while k < len(b) and b[k][0] < e:
            if b[k][0] > cur:
                out.append((cur, b[k][0]))
            cur = max(cur, b[k][1])
            if cur >= e:
                break
            k += 1
        if cur < e:
            out.append((cur, e))
    return out


def normalize_annotation(ann: DiarizationAnnotation) -> DiarizationAnnotation:
    """Merge each speaker's overlapping or touching segments and sort by (start, speaker)."""
    by_speaker = ann.spans_by_speaker()
    segments = [
        SpeakerSegment(ann.recording_id, speaker, TimeInterval(s, e))
        for speaker, spans in by_speaker.items()
        for s, e in merge_spans(spans)
    ]
    segments.sort(key=lambda seg: (seg.start, seg.speaker, seg.end))
    return DiarizationAnnotation(ann.recording_id, segments)


def active_count_spans(tracks: Iterable[Sequence[Span]], minimum: int) -> list[Span]:
    """Times covered by at least ``minimum`` of the given disjoint span lists."""
    events: list[tuple[float, int]] = []
    for spans in tracks:
        for s, e in spans:
            events.append((s, 1))
            events.append((e, -1))
    # ends sort before starts at equal times (half-open)
    events.sort(key=lambda ev: (ev[0], ev[1]))
    out: list[Span] = []
    active = 0
    opened: float | None = None
    for t, delta in events:
        active += delta
        if active >= minimum and opened is None:
            opened = t
        elif active < minimum and opened is not None:
            if t > opened:
                out.append((opened, t))
            opened = None
    return merge_spans(out)


def overlap_regions(ann: DiarizationAnnotation) -> list[TimeInterval]:
    tracks = [merge_spans(spans) for spans in ann.spans_by_speaker().values()]
    return [TimeInterval(s, e) for s, e in active_count_spans(tracks, 2)]
