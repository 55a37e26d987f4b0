"""Non-neural stages of a detection-based speaker diarization pipeline.

Proposal suppression (hard/soft NMS), two-source score fusion, decoding of
proposals into annotations, a speaker-count-bounded clustering diarizer over
frame embeddings, and DER scoring with optimal speaker mapping.
"""

from .cluster import ClusterConfig, ahc_cluster, pipeline_diarize, pool_window, vad_segments
from .decode import DecodeConfig, decode_diarization
from .der import DerReport, ScoringOptions, aggregate_der, build_overlap_matrix, compute_der
from .assignment import optimal_mapping
from .errors import DiarizationError
from .formats import (
    EmbeddingSequence,
    ProposalRecord,
    parse_rttm,
    read_embeddings,
    read_proposals,
    write_embeddings,
    write_proposals,
    write_rttm,
)
from .fusion import FusionConfig, fuse_proposals
from .nms import NmsConfig, soft_nms, truncate_top_k
from .timeline import (
    DiarizationAnnotation,
    SpeakerSegment,
    TimeInterval,
    interval_iou,
    normalize_annotation,
    overlap_regions,
    union_duration,
)

__version__ = "0.1.0"
