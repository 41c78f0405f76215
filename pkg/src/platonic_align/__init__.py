"""Toolkit for measuring cross-modal alignment between embedding archives.

Core pieces: an on-disk layer-major embedding archive format, mutual k-NN
alignment and weighted k-NN retrieval metrics, layer-pair sweeps, test-time
scaling-law fitting, and temporal hard-negative probes.
"""

from platonic_align.aggregate import AggregationSpec, frame_indices, mean_segments
from platonic_align.archive import (
    Archive,
    ArchiveManifest,
    SegmentedMatrix,
    open_archive,
    write_archive,
)
from platonic_align.errors import (
    ArchiveIOError,
    DataError,
    DimensionError,
    FittingError,
    FormatError,
    LayerIndexError,
    PairingError,
    ParameterError,
)
from platonic_align.knn import (
    AlignmentReport,
    NeighborGraph,
    alignment_curve,
    build_neighbor_graph,
    mutual_knn_alignment,
    weighted_knn_retrieval,
)
from platonic_align.scaling import (
    LineFit,
    ScalingLawFit,
    ScoreGrid,
    fit_line,
    fit_scaling_law,
    predict_score,
)
from platonic_align.sweep import LayerPairMatrix, ModelMatrix, best_layer_pair, model_matrix
from platonic_align.temporal import (
    RelatedGroup,
    RelatedRankingResult,
    TemporalProbeResult,
    negative_alignment,
    related_ranking,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationSpec",
    "AlignmentReport",
    "Archive",
    "ArchiveIOError",
    "ArchiveManifest",
    "DataError",
    "DimensionError",
    "FittingError",
    "FormatError",
    "LayerIndexError",
    "LayerPairMatrix",
    "LineFit",
    "ModelMatrix",
    "NeighborGraph",
    "PairingError",
    "ParameterError",
    "RelatedGroup",
    "RelatedRankingResult",
    "ScalingLawFit",
    "ScoreGrid",
    "SegmentedMatrix",
    "TemporalProbeResult",
    "alignment_curve",
    "best_layer_pair",
    "build_neighbor_graph",
    "fit_line",
    "fit_scaling_law",
    "frame_indices",
    "mean_segments",
    "model_matrix",
    "mutual_knn_alignment",
    "negative_alignment",
    "open_archive",
    "predict_score",
    "related_ranking",
    "weighted_knn_retrieval",
    "write_archive",
]
