"""Hard and soft non-maximum suppression over temporal proposals."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Literal, Sequence

from . import kernels
from .errors import DiarizationError, RecordingMismatchError
from .formats import ProposalRecord

Method = Literal["hard", "linear", "gaussian"]
_METHOD_CODES = {"hard": kernels.HARD, "linear": kernels.LINEAR, "gaussian": kernels.GAUSSIAN}


@dataclass(frozen=True)
class NmsConfig:
    method: Method = "gaussian"
    sigma: float = 0.5
    iou_threshold: float = 0.5
    score_floor: float = 0.001
    # detector emits 1000 proposals, 100 survive
    max_in: int = 1000
    max_out: int = 100
    speaker_aware: bool = True

    def __post_init__(self):
        if self.method not in _METHOD_CODES:
            raise DiarizationError(f"unknown NMS method {self.method!r}")
        if not self.sigma > 0:
            raise DiarizationError("sigma must be positive")
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise DiarizationError("iou_threshold must lie in [0, 1]")
        if self.score_floor < 0:
            raise DiarizationError("score_floor must be non-negative")
        if self.max_in < 1 or self.max_out < 1:
            raise DiarizationError("max_in and max_out must be positive")
        if self.max_out > self.max_in:
            raise DiarizationError("max_out must not exceed max_in")


def tie_key(p: ProposalRecord) -> tuple:
    """Order among equal scores: earlier start, smaller speaker, smaller end."""
    return (p.start, p.speaker, p.end, p.source)


def rank_key(p: ProposalRecord) -> tuple:
    return (-p.score, *tie_key(p))


def truncate_top_k(props: Sequence[ProposalRecord], k: int) -> list[ProposalRecord]:
    if k < 1:
        raise DiarizationError("k must be positive")
    return sorted(props, key=rank_key)[:k]


def check_single_recording(props: Sequence[ProposalRecord]) -> str | None:
    recs = {p.recording_id for p in props}
    if len(recs) > 1:
        raise RecordingMismatchError(
            f"proposals from {len(recs)} recordings ({', '.join(sorted(recs))}); group per recording first"
        )
    return next(iter(recs), None)


def soft_nms(props: Sequence[ProposalRecord], cfg: NmsConfig = NmsConfig()) -> list[ProposalRecord]:
    """Suppress overlapping proposals of one recording.

    The top ``cfg.max_in`` proposals enter a greedy loop: the best remaining
    proposal is kept and every proposal in its group (same speaker when
    ``speaker_aware``) is dropped (hard) or has its score decayed by the
    temporal IoU (linear, gaussian). Proposals falling under ``score_floor``
    are discarded. Intervals and labels are never changed, only scores.
    """
    check_single_recording(props)
    pool = truncate_top_k(props, cfg.max_in) if props else []
    if not pool:
        return []
    order = sorted(range(len(pool)), key=lambda i: tie_key(pool[i]))
    tie_rank = [0] * len(pool)
    for r, i in enumerate(order):
        tie_rank[i] = r
    if cfg.speaker_aware:
        labels = {spk: g for g, spk in enumerate(sorted({p.speaker for p in pool}))}
        groups = [labels[p.speaker] for p in pool]
    else:
        groups = [0] * len(pool)
    keep, scores = kernels.soft_nms_kernel(
        [p.start for p in pool],
        [p.end for p in pool],
        [p.score for p in pool],
        groups,
        tie_rank,
        _METHOD_CODES[cfg.method],
        float(cfg.sigma),
        float(cfg.iou_threshold),
        float(cfg.score_floor),
        int(cfg.max_out),
    )
    out = [dataclasses.replace(pool[i], score=float(s)) for i, s in zip(keep, scores)]
    out.sort(key=rank_key)
    return out
