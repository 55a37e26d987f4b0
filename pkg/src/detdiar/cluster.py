"""Clustering diarizer over frame embeddings with speaker-count bounds.

VAD runs are cut into fixed-length chunks, each chunk's frames are mean-pooled
to a unit vector, and the chunk vectors are grouped by average-linkage
agglomerative clustering under cosine distance. The dendrogram cut at
``linkage_cutoff`` proposes a speaker count which is then clamped to
``[min_speakers, max_speakers]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DiarizationError, EmptyInputError, MissingActivityError
from .formats import EmbeddingSequence
from .timeline import DiarizationAnnotation, SpeakerSegment, TimeInterval, normalize_annotation


@dataclass(frozen=True)
class ClusterConfig:
    min_speakers: int = 2
    max_speakers: int = 4
    vad_threshold: float = 0.5
    vad_min_duration: float = 0.1
    vad_merge_gap: float = 0.1
    chunk_seconds: float = 1.0
    linkage_cutoff: float = 0.7

    def __post_init__(self):
        if self.min_speakers < 1 or self.max_speakers < 1:
            raise DiarizationError("speaker bounds must be positive")
        if self.min_speakers > self.max_speakers:
            raise DiarizationError("min_speakers must not exceed max_speakers")
        if not 0.0 <= self.vad_threshold <= 1.0:
            raise DiarizationError("vad_threshold must lie in [0, 1]")
        if self.vad_min_duration < 0 or self.vad_merge_gap < 0:
            raise DiarizationError("VAD durations must be non-negative")
        if not (self.chunk_seconds > 0 and self.linkage_cutoff > 0):
            raise DiarizationError("chunk_seconds and linkage_cutoff must be positive")


def _vad_runs(seq: EmbeddingSequence, cfg: ClusterConfig) -> list[tuple[int, int]]:
    # frame-index arithmetic keeps gap/duration tests exact
    if seq.activity is None:
        raise MissingActivityError(
            f"{seq.recording_id}: embedding sequence has no activity channel; supply per-frame speech scores"
        )
    hop = seq.hop_seconds
    speech = np.concatenate([[False], seq.activity >= cfg.vad_threshold, [False]])
    edges = np.flatnonzero(np.diff(speech.astype(np.int8)))
    runs = [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]
    merged: list[tuple[int, int]] = []
    for a, b in runs:
        if merged and (a - merged[-1][1]) * hop <= cfg.vad_merge_gap:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    return [(a, b) for a, b in merged if (b - a) * hop >= cfg.vad_min_duration]


def vad_segments(seq: EmbeddingSequence, cfg: ClusterConfig = ClusterConfig()) -> list[TimeInterval]:
    hop = seq.hop_seconds
    return [TimeInterval(a * hop, b * hop) for a, b in _vad_runs(seq, cfg)]


def _unit_mean(frames: np.ndarray) -> np.ndarray:
    mean = frames.astype(np.float64).mean(axis=0)
    norm = np.linalg.norm(mean)
    return mean / norm if norm > 0 else mean


def pool_window(seq: EmbeddingSequence, window: TimeInterval) -> np.ndarray:
    """Unit-norm mean of the frames whose start lies in ``window``."""
    starts = np.arange(seq.frame_count) * seq.hop_seconds
    a = int(np.searchsorted(starts, window.start, side="left"))
    b = int(np.searchsorted(starts, window.end, side="left"))
    if b <= a:
        raise EmptyInputError(f"window [{window.start}, {window.end}) covers no frame")
    return _unit_mean(seq.frames[a:b])


def chunk_runs(runs: list[tuple[int, int]], frames_per_chunk: int) -> list[tuple[int, int]]:
    """Cut frame runs into chunks; a tail shorter than half a chunk joins the previous one."""
    chunks = []
    for a, b in runs:
        cuts = list(range(a, b, frames_per_chunk)) + [b]
        pieces = list(zip(cuts[:-1], cuts[1:]))
        if len(pieces) > 1 and 2 * (pieces[-1][1] - pieces[-1][0]) < frames_per_chunk:
            tail = pieces.pop()
            pieces[-1] = (pieces[-1][0], tail[1])
        chunks.extend(pieces)
    return chunks


def cosine_distances(vectors: np.ndarray) -> np.ndarray:
    d = 1.0 - vectors @ vectors.T
    d = np.triu(d, 1)
    return d + d.T


def _speaker_count(heights: np.ndarray, n: int, cfg: ClusterConfig) -> int:
    below = heights <= cfg.linkage_cutoff
    within = n - 1 if below.all() else int(np.argmin(below))
    return max(1, min(max(n - within, cfg.min_speakers), cfg.max_speakers, n))


def ahc_cluster(vectors, cfg: ClusterConfig = ClusterConfig()) -> list[int]:
    """Cluster ids (0-based, in order of first appearance), one per vector."""
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise EmptyInputError("ahc_cluster needs at least one vector")
    n = v.shape[0]
    if n == 1:
        return [0]
    merges, heights = kernels.ahc_kernel(cosine_distances(v))
    k = _speaker_count(heights, n, cfg)
    parent = list(range(n))
    for i, j in merges[: n - k]:
        parent[int(j)] = int(i)

    def root(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    ids: dict[int, int] = {}
    return [ids.setdefault(root(x), len(ids)) for x in range(n)]


def pipeline_diarize(seq: EmbeddingSequence, cfg: ClusterConfig = ClusterConfig()) -> DiarizationAnnotation:
    hop = seq.hop_seconds
    runs = _vad_runs(seq, cfg)
    if not runs:
        return DiarizationAnnotation(seq.recording_id)
    per_chunk = max(1, round(cfg.chunk_seconds / hop))
    chunks = chunk_runs(runs, per_chunk)
    vecs = np.stack([_unit_mean(seq.frames[a:b]) for a, b in chunks])
    labels = ahc_cluster(vecs, cfg)
    rec = seq.recording_id
    segments = [
        SpeakerSegment(rec, f"spk{label}", TimeInterval(a * hop, b * hop))
        for (a, b), label in zip(chunks, labels)
    ]
    return normalize_annotation(DiarizationAnnotation(rec, segments))
