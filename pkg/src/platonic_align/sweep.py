"""Layer-pair optimization and all-pairs model alignment matrices.

The alignment protocol scores every (layer_x, layer_y) combination and keeps
the maximum. Neighbor graphs depend on one side only, so each layer's graph
is built once and reused across the whole sweep; layer tensors are streamed
from the archive and released immediately, keeping one resident at a time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from platonic_align.aggregate import AggregationSpec, mean_segments
from platonic_align.archive import Archive, first_pairing_mismatch, paired
from platonic_align.errors import PairingError, ParameterError
from platonic_align.knn import NeighborGraph, build_neighbor_graph, mutual_knn_alignment


@dataclass(frozen=True)
class LayerPairMatrix:
    """Alignment score for every layer pair, plus the argmax.

    ``best`` is (layer_x, layer_y, score); ties go to the lowest
    (layer_x, layer_y) lexicographically.
    """

    scores: np.ndarray
    best: tuple[int, int, float]
    k: int
    metric: str


@dataclass(frozen=True)
class MatrixCell:
    score: float
    layer_x: int
    layer_y: int


@dataclass(frozen=True)
class ModelMatrix:
    """Best-layer-pair alignment for every (row archive, col archive)."""

    rows: list[str]
    cols: list[str]
    cells: list[list[MatrixCell]]
    k: int
    metric: str


def _segments_used(archive: Archive, spec: AggregationSpec | int | None) -> int:
    if spec is None:
        return archive.manifest.segment_count
    if isinstance(spec, AggregationSpec):
        return spec.segments_used
    return int(spec)


def _layer_graphs(
    archive: Archive, layers: list[int], s: int, k: int, metric: str
) -> list[NeighborGraph]:
    graphs = []
    for layer in layers:
        features = mean_segments(archive.load_layer(layer), s)
        graphs.append(build_neighbor_graph(features, k, metric))
    return graphs


def best_layer_pair(
    ax: Archive,
    ay: Archive,
    k: int,
    metric: str = "cosine",
    spec_x: AggregationSpec | int | None = None,
    spec_y: AggregationSpec | int | None = None,
    layers_x: list[int] | None = None,
    layers_y: list[int] | None = None,
) -> LayerPairMatrix:
    """Score every layer pair of two paired archives and return the argmax.

    ``spec_x`` / ``spec_y`` choose how many stored segments each side
    averages: an AggregationSpec, a plain segment count, or None for all of
    them. ``layers_x`` / ``layers_y`` restrict the sweep to a subset of
    layers (default: every layer in the archive); the returned matrix is
    indexed by position in those lists.
    """
    if not paired(ax, ay):
        raise PairingError(
            f"archives {ax.identifier!r} and {ay.identifier!r} are not item-aligned: "
            f"{first_pairing_mismatch(ax, ay)}"
        )
    if layers_x is None:
        layers_x = list(range(ax.manifest.layer_count))
    if layers_y is None:
        layers_y = list(range(ay.manifest.layer_count))
    if not layers_x or not layers_y:
        raise ParameterError("layer selections must be non-empty")

    graphs_x = _layer_graphs(ax, layers_x, _segments_used(ax, spec_x), k, metric)
    graphs_y = _layer_graphs(ay, layers_y, _segments_used(ay, spec_y), k, metric)

    scores = np.empty((len(layers_x), len(layers_y)), dtype=np.float64)
    for i, gx in enumerate(graphs_x):
        for j, gy in enumerate(graphs_y):
            scores[i, j] = mutual_knn_alignment(gx, gy).score

    # np.argmax scans in row-major order, which is exactly the lexicographic
    # (layer_x, layer_y) tie-break.
    flat = int(np.argmax(scores))
    bi, bj = divmod(flat, scores.shape[1])
    best = (layers_x[bi], layers_y[bj], float(scores[bi, bj]))
    scores.flags.writeable = False
    return LayerPairMatrix(scores=scores, best=best, k=int(k), metric=metric)


def _cell(ax: Archive, ay: Archive, k: int, metric: str) -> MatrixCell:
    pair = best_layer_pair(ax, ay, k, metric)
    layer_x, layer_y, score = pair.best
    return MatrixCell(score=score, layer_x=layer_x, layer_y=layer_y)


def model_matrix(
    vision_archives: list[Archive],
    text_archives: list[Archive],
    k: int,
    metric: str = "cosine",
    threads: int | None = None,
) -> ModelMatrix:
    """Best-layer-pair score for every (vision, text) archive combination.

    Also serves vision-vision matrices: the two lists may hold archives of
    any modality as long as all of them share identical item_ids. Cells are
    independent and computed in parallel when ``threads`` > 1; the result is
    identical for any thread count.
    """
    if not vision_archives or not text_archives:
        raise ParameterError("both archive lists must be non-empty")
    reference = vision_archives[0]
    for archive in list(vision_archives) + list(text_archives):
        if not paired(reference, archive):
            raise PairingError(
                f"archive {archive.identifier!r} is not item-aligned with "
                f"{reference.identifier!r}: {first_pairing_mismatch(reference, archive)}"
            )

    if threads is None:
        threads = os.cpu_count() or 1
    pairs = [(i, j) for i in range(len(vision_archives)) for j in range(len(text_archives))]
    cells: list[list[MatrixCell | None]] = [
        [None] * len(text_archives) for _ in vision_archives
    ]
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(
                lambda ij: _cell(vision_archives[ij[0]], text_archives[ij[1]], k, metric),
                pairs,
            )
            for (i, j), cell in zip(pairs, results):
                cells[i][j] = cell
    else:
        for i, j in pairs:
            cells[i][j] = _cell(vision_archives[i], text_archives[j], k, metric)

    return ModelMatrix(
        rows=[a.identifier for a in vision_archives],
        cols=[a.identifier for a in text_archives],
        cells=cells,  # type: ignore[arg-type]
        k=int(k),
        metric=metric,
    )
