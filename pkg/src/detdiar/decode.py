"""Convert surviving proposals into a diarization annotation."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .errors import DiarizationError
from .formats import ProposalRecord
from .nms import check_single_recording
from .timeline import DiarizationAnnotation, SpeakerSegment, normalize_annotation


@dataclass(frozen=True)
class DecodeConfig:
    score_threshold: float = 0.5
    min_duration: float = 0.0
    max_speakers: int | None = None

    def __post_init__(self):
        if self.score_threshold < 0:
            raise DiarizationError("score_threshold must be non-negative")
        if self.min_duration < 0:
            raise DiarizationError("min_duration must be non-negative")
        if self.max_speakers is not None and self.max_speakers < 1:
            raise DiarizationError("max_speakers must be positive")


def decode_diarization(
    props: Sequence[ProposalRecord],
    cfg: DecodeConfig = DecodeConfig(),
    recording_id: str | None = None,
) -> DiarizationAnnotation:
    """Threshold, optionally cap the speaker count, and take per-speaker unions.

    ``recording_id`` names the result when ``props`` is empty.
    """
    rec = check_single_recording(props) or recording_id or ""
    if recording_id is not None and props and rec != recording_id:
        raise DiarizationError(f"proposals belong to {rec!r}, not {recording_id!r}")
    kept = [p for p in props if p.score >= cfg.score_threshold]
    if cfg.max_speakers is not None:
        mass: dict[str, list[float]] = defaultdict(list)
        for p in kept:
            mass[p.speaker].append(p.score)
        ranked = sorted(mass, key=lambda spk: (-math.fsum(mass[spk]), spk))
        allowed = set(ranked[: cfg.max_speakers])
        kept = [p for p in kept if p.speaker in allowed]
    ann = normalize_annotation(
        DiarizationAnnotation(rec, [SpeakerSegment(rec, p.speaker, p.interval) for p in kept])
    )
    if cfg.min_duration > 0:
        ann = DiarizationAnnotation(
            rec, [seg for seg in ann.segments if seg.interval.duration >= cfg.min_duration]
        )
    return ann
