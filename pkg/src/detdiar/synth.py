"""Synthetic fixtures with known ground truth.

Used by the test suite and the benchmarks; nothing here is needed at
inference time. All generators take a ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np

from .formats import EmbeddingSequence, ProposalRecord
from .timeline import DiarizationAnnotation, SpeakerSegment, TimeInterval, normalize_annotation


def _ms(x: float) -> float:
    return round(x * 1000) / 1000


def random_reference(
    rng: np.random.Generator,
    recording_id: str = "rec",
    n_speakers: int = 3,
    n_turns: int = 12,
    overlap_prob: float = 0.2,
) -> DiarizationAnnotation:
    """Turn-taking conversation on a millisecond grid, with occasional overlaps."""
    segments = []
    t = _ms(rng.uniform(0.0, 1.0))
    prev = None
    for _ in range(n_turns):
        choices = [s for s in range(n_speakers) if s != prev] or [0]
        spk = int(rng.choice(choices))
        dur = _ms(rng.uniform(0.8, 4.0))
        segments.append(SpeakerSegment(recording_id, f"S{spk}", TimeInterval(t, _ms(t + dur))))
        if rng.random() < overlap_prob:
            t = _ms(t + dur * rng.uniform(0.5, 0.9))
        else:
            t = _ms(t + dur + rng.uniform(0.0, 1.0))
        prev = spk
    return normalize_annotation(DiarizationAnnotation(recording_id, segments))


def noisy_proposals(
    ref: DiarizationAnnotation,
    rng: np.random.Generator,
    jitter: float,
    copies: int = 4,
    n_false: int = 6,
    source: str = "synthetic",
) -> list[ProposalRecord]:
    """Detector-like proposals around each reference segment.

    Every segment yields ``copies`` proposals whose boundaries move by
    ``jitter * N(0, 1)``; ``n_false`` low-confidence spurious proposals are
    added. Random draws do not depend on ``jitter``, so a fixed seed gives
    coupled fixtures across noise levels.
    """
    rec = ref.recording_id
    speakers = ref.speakers or ["S0"]
    horizon = max((seg.end for seg in ref.segments), default=10.0)
    out = []
    for seg in ref.segments:
        noise = rng.standard_normal((copies, 2))
        scores = rng.uniform(0.55, 1.0, size=copies)
        for (ds, de), score in zip(noise, scores):
            start = max(0.0, seg.start + jitter * ds)
            end = max(start + 0.05, seg.end + jitter * de)
            out.append(ProposalRecord(rec, start, end, seg.speaker, float(score), source))
    for _ in range(n_false):
        start = rng.uniform(0.0, horizon)
        dur = rng.uniform(0.2, 1.5)
        spk = str(rng.choice(speakers))
        out.append(ProposalRecord(rec, start, start + dur, spk, float(rng.uniform(0.0, 0.45)), source))
    return out


def random_proposals(
    rng: np.random.Generator,
    n: int,
    recording_id: str = "rec",
    n_speakers: int = 3,
    horizon: float = 30.0,
    source: str = "random",
) -> list[ProposalRecord]:
    starts = rng.uniform(0.0, horizon, size=n)
    durs = rng.uniform(0.1, 5.0, size=n)
    spk = rng.integers(0, n_speakers, size=n)
    scores = rng.uniform(0.0, 1.0, size=n)
    return [
        ProposalRecord(recording_id, float(s), float(s + d), f"S{k}", float(sc), source)
        for s, d, k, sc in zip(starts, durs, spk, scores)
    ]


def speaker_centroids(rng: np.random.Generator, n_speakers: int, dim: int) -> np.ndarray:
    """Mutually orthogonal unit vectors."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, n_speakers)))
    return q.T


def planted_embeddings(
    rng: np.random.Generator,
    turns: list[tuple[int | None, int]],
    dim: int = 64,
    noise: float = 0.05,
    hop: float = 0.02,
    recording_id: str = "planted",
    n_speakers: int | None = None,
) -> tuple[EmbeddingSequence, DiarizationAnnotation]:
    """Frames drawn around per-speaker centroids.

    ``turns`` is a list of ``(speaker, frame_count)``; ``None`` marks silence
    (activity 0). Returns the sequence and its ground-truth annotation.
    """
    n_speakers = n_speakers or 1 + max((s for s, _ in turns if s is not None), default=0)
    centroids = speaker_centroids(rng, n_speakers, dim)
    frames, activity, segments = [], [], []
    t = 0
    for spk, count in turns:
        if spk is None:
            frames.append(rng.standard_normal((count, dim)) * noise)
            activity.append(np.zeros(count))
        else:
            frames.append(centroids[spk] + rng.standard_normal((count, dim)) * noise / np.sqrt(dim))
            activity.append(np.ones(count))
            segments.append(
                SpeakerSegment(recording_id, f"S{spk}", TimeInterval(t * hop, (t + count) * hop))
            )
        t += count
    seq = EmbeddingSequence(
        recording_id,
        np.concatenate(frames).astype(np.float32),
        hop_seconds=hop,
        window_seconds=0.025,
        activity=np.concatenate(activity).astype(np.float32),
    )
    return seq, normalize_annotation(DiarizationAnnotation(recording_id, segments))
