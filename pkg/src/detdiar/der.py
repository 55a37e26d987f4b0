"""Diarization error rate with optimal one-to-one speaker mapping.

Scoring is exact: the timeline is swept at segment boundaries, never sampled.
At each instant with ``R`` active reference and ``H`` active hypothesis
speakers, missed speech is ``max(R - H, 0)``, false alarm ``max(H - R, 0)``
and confusion ``min(R, H)`` minus the correctly mapped active pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .assignment import optimal_mapping
from .errors import EmptyInputError, RecordingMismatchError, UndefinedDerError
from .timeline import (
    DiarizationAnnotation,
    Span,
    active_count_spans,
    intersect_spans,
    merge_spans,
    subtract_spans,
)


@dataclass(frozen=True)
class ScoringOptions:
    collar: float = 0.0
    exclude_overlap: bool = False

    def __post_init__(self):
        if not (self.collar >= 0 and math.isfinite(self.collar)):
            raise ValueError("collar must be a finite non-negative number of seconds")


@dataclass
class DerReport:
    recording_id: str
    total_ref: float
    miss: float
    false_alarm: float
    confusion: float
    der: float
    mapping: list[tuple[str, str]] = field(default_factory=list)

    @property
    def errors(self) -> float:
        return self.miss + self.false_alarm + self.confusion

    def to_json(self) -> str:
        d = asdict(self)
        d["mapping"] = [list(pair) for pair in self.mapping]
        return json.dumps(d)


def _tracks(ann: DiarizationAnnotation) -> dict[str, list[Span]]:
    spans = ann.spans_by_speaker()
    return {spk: merge_spans(spans[spk]) for spk in sorted(spans)}


def _check_same_recording(ref: DiarizationAnnotation, hyp: DiarizationAnnotation):
    if ref.recording_id != hyp.recording_id:
        raise RecordingMismatchError(
            f"reference {ref.recording_id!r} scored against hypothesis {hyp.recording_id!r}"
        )


def _overlap(tracks_a: list[list[Span]], tracks_b: list[list[Span]]) -> np.ndarray:
    out = np.zeros((len(tracks_a), len(tracks_b)))
    for i, a in enumerate(tracks_a):
        for j, b in enumerate(tracks_b):
            out[i, j] = math.fsum(e - s for s, e in intersect_spans(a, b))
    return out


def build_overlap_matrix(
    ref: DiarizationAnnotation,
    hyp: DiarizationAnnotation,
    region: Sequence[Span] | None = None,
) -> np.ndarray:
    """Seconds of co-activity, rows ordered as ``ref.speakers``, columns as ``hyp.speakers``.

    When ``region`` (sorted disjoint spans) is given only time inside it counts.
    """
    _check_same_recording(ref, hyp)
    ref_tracks = list(_tracks(ref).values())
    hyp_tracks = list(_tracks(hyp).values())
    if region is not None:
        region = merge_spans(region)
        ref_tracks = [intersect_spans(t, region) for t in ref_tracks]
        hyp_tracks = [intersect_spans(t, region) for t in hyp_tracks]
    return _overlap(ref_tracks, hyp_tracks)


def scoring_region(
    ref: DiarizationAnnotation, hyp: DiarizationAnnotation, opts: ScoringOptions
) -> list[Span]:
    """Scored time: everything, minus collars around reference boundaries, minus
    reference overlap when excluded."""
    ref_tracks = _tracks(ref)
    hyp_tracks = _tracks(hyp)
    spans = [s for t in (*ref_tracks.values(), *hyp_tracks.values()) for s in t]
    if not spans:
        return []
    region = [(min(s for s, _ in spans), max(e for _, e in spans))]
    if opts.collar > 0:
        zones = [
            (b - opts.collar, b + opts.collar)
            for track in ref_tracks.values()
            for seg in track
            for b in seg
        ]
        region = subtract_spans(region, merge_spans(zones))
    if opts.exclude_overlap:
        region = subtract_spans(region, active_count_spans(ref_tracks.values(), 2))
    return region


def compute_der(
    ref: DiarizationAnnotation,
    hyp: DiarizationAnnotation,
    opts: ScoringOptions = ScoringOptions(),
) -> DerReport:
    _check_same_recording(ref, hyp)
    region = scoring_region(ref, hyp, opts)
    ref_labels, hyp_labels = ref.speakers, hyp.speakers
    ref_tracks = [intersect_spans(t, region) for t in _tracks(ref).values()]
    hyp_tracks = [intersect_spans(t, region) for t in _tracks(hyp).values()]

    # speakers are mapped on scored time only, which makes the mapping the one
    # that minimizes confusion (and hence DER)
    pairs = optimal_mapping(_overlap(ref_tracks, hyp_tracks))
    hyp_of_ref = dict(pairs)

    events: list[tuple[float, int, int, int]] = []
    for r, track in enumerate(ref_tracks):
        for s, e in track:
            events += [(s, 0, r, 1), (e, 0, r, -1)]
    for h, track in enumerate(hyp_tracks):
        for s, e in track:
            events += [(s, 1, h, 1), (e, 1, h, -1)]
    events.sort()

    active_ref: set[int] = set()
    active_hyp: set[int] = set()
    total, miss, fa, conf = [], [], [], []
    prev = None
    for t, kind, idx, delta in events:
        if prev is not None and t > prev and (active_ref or active_hyp):
            dt = t - prev
            n_ref, n_hyp = len(active_ref), len(active_hyp)
            correct = sum(1 for r in active_ref if hyp_of_ref.get(r, -1) in active_hyp)
            total.append(dt * n_ref)
            if n_ref > n_hyp:
                miss.append(dt * (n_ref - n_hyp))
            elif n_hyp > n_ref:
                fa.append(dt * (n_hyp - n_ref))
            if min(n_ref, n_hyp) > correct:
                conf.append(dt * (min(n_ref, n_hyp) - correct))
        prev = t
        target = active_ref if kind == 0 else active_hyp
        if delta > 0:
            target.add(idx)
        else:
            target.discard(idx)

    total_ref = math.fsum(total)
    report = DerReport(
        recording_id=ref.recording_id,
        total_ref=total_ref,
        miss=math.fsum(miss),
        false_alarm=math.fsum(fa),
        confusion=math.fsum(conf),
        der=0.0,
        mapping=[(hyp_labels[h], ref_labels[r]) for r, h in pairs],
    )
    report.der = _ratio(report.errors, total_ref, ref.recording_id)
    return report


def _ratio(errors: float, total: float, recording_id: str) -> float:
    if total > 0:
        return errors / total
    if errors > 0:
        raise UndefinedDerError(
            f"undefined DER for {recording_id!r}: empty reference but {errors:.3f}s of hypothesis speech"
        )
    return 0.0


def aggregate_der(reports: Sequence[DerReport]) -> DerReport:
    """Duration-weighted pooling of per-recording reports."""
    if not reports:
        raise EmptyInputError("no reports to aggregate")
    total = math.fsum(r.total_ref for r in reports)
    out = DerReport(
        recording_id="ALL",
        total_ref=total,
        miss=math.fsum(r.miss for r in reports),
        false_alarm=math.fsum(r.false_alarm for r in reports),
        confusion=math.fsum(r.confusion for r in reports),
        der=0.0,
        mapping=[pair for r in reports for pair in r.mapping],
    )
    out.der = _ratio(out.errors, total, "ALL")
    return out


def format_report_table(reports: Sequence[DerReport], total: DerReport | None = None) -> str:
    """Aligned text table with one row per recording and a final ALL row."""
    rows = list(reports)
    if total is None and rows:
        total = aggregate_der(rows)
    if total is not None:
        rows.append(total)
    header = ("recording", "ref(s)", "miss(s)", "fa(s)", "conf(s)", "DER", "DER%")
    body = [
        (
            r.recording_id,
            f"{r.total_ref:.3f}",
            f"{r.miss:.3f}",
            f"{r.false_alarm:.3f}",
            f"{r.confusion:.3f}",
            f"{r.der:.4f}",
            f"{100 * r.der:.2f}",
        )
        for r in rows
    ]
    widths = [max(len(row[c]) for row in [header, *body]) for c in range(len(header))]
    lines = []
    for row in [header, *body]:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
