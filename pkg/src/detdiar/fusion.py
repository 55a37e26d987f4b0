"""Score-ranked fusion of two proposal sources."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Literal, Sequence

from .errors import DiarizationError
from .formats import ProposalRecord
from .nms import check_single_recording, rank_key
from .timeline import span_iou


@dataclass(frozen=True)
class FusionConfig:
    k: int = 100
    normalize: Literal["raw", "minmax"] = "raw"
    # 1.0 removes exact same-speaker duplicates only; None keeps everything
    dedup_iou: float | None = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise DiarizationError("k must be positive")
        if self.normalize not in ("raw", "minmax"):
            raise DiarizationError(f"unknown normalization {self.normalize!r}")
        if self.dedup_iou is not None and not 0.0 <= self.dedup_iou <= 1.0:
            raise DiarizationError("dedup_iou must lie in [0, 1]")


def minmax_scores(props: Sequence[ProposalRecord]) -> list[ProposalRecord]:
    """Map scores affinely onto [0, 1]; a constant-score list maps to 1.0."""
    if not props:
        return []
    lo = min(p.score for p in props)
    hi = max(p.score for p in props)
    if hi == lo:
        return [dataclasses.replace(p, score=1.0) for p in props]
    return [dataclasses.replace(p, score=(p.score - lo) / (hi - lo)) for p in props]


def fuse_proposals(
    a: Sequence[ProposalRecord],
    b: Sequence[ProposalRecord],
    cfg: FusionConfig = FusionConfig(),
) -> list[ProposalRecord]:
    check_single_recording([*a, *b])
    if cfg.normalize == "minmax":
        a, b = minmax_scores(a), minmax_scores(b)
    pooled = sorted([*a, *b], key=rank_key)
    if cfg.dedup_iou is None:
        return pooled[: cfg.k]
    kept: list[ProposalRecord] = []
    for p in pooled:
        if len(kept) == cfg.k:
            break
        if any(
            q.speaker == p.speaker and span_iou(q.start, q.end, p.start, p.end) >= cfg.dedup_iou
            for q in kept
        ):
            continue
        kept.append(p)
    return kept
