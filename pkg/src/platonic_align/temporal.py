"""Temporal hard-negative probes over paired embedding spaces.

Two diagnostics for whether representations carry event order:

* ``negative_alignment`` scores video-text alignment twice, once against the
  true captions and once where each item's text-side neighborhood is searched
  from its reorder-negative caption, and reports the drop.
* ``related_ranking`` orders each anchor caption's logically related captions
  by embedding distance, exposing bag-of-words behavior when the word-permuted
  variant always lands closest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from platonic_align.errors import DimensionError, ParameterError
from platonic_align.knn import (
    NeighborGraph,
    _order_by_distance,
    build_neighbor_graph,
    cross_distances,
    mutual_knn_alignment,
)

DEFAULT_TEMPORAL_K = 5


@dataclass(frozen=True)
class TemporalProbeResult:
    positive_score: float
    negative_score: float
    drop: float
    k: int
    n: int
    metric: str


@dataclass(frozen=True)
class RelatedGroup:
    """An anchor item plus the indices of its logically related items."""

    anchor: int
    related: tuple[int, ...]

    def __init__(self, anchor: int, related) -> None:
        related = tuple(int(r) for r in related)
        anchor = int(anchor)
        if not related:
            raise ParameterError("related list must be non-empty")
        if anchor in related:
            raise ParameterError(f"anchor {anchor} appears in its own related list")
        if len(set(related)) != len(related):
            raise ParameterError("related list contains duplicates")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "related", related)


@dataclass(frozen=True)
class RelatedRankingResult:
    """Per-group distance orderings plus a first-place histogram over slots.

    ``orderings[g]`` is group g's related indices sorted by ascending distance
    to the anchor (ties by ascending index); ``first_slot_counts[s]`` counts
    the groups whose s-th related entry ranked first.
    """

    orderings: tuple[tuple[int, ...], ...]
    first_slot_counts: tuple[int, ...]
    metric: str


def negative_alignment(
    video: np.ndarray,
    pos_text: np.ndarray,
    neg_text: np.ndarray,
    k: int = DEFAULT_TEMPORAL_K,
    metric: str = "cosine",
) -> TemporalProbeResult:
    """Alignment drop when text neighborhoods are searched from negatives.

    positive_score is the standard mutual k-NN alignment between the video
    matrix and pos_text. For the negative score the video graph is kept and
    the text side is replaced: item i's neighbor set becomes the k nearest
    pos_text rows (excluding row i) to the query neg_text[i]. Identical
    neg_text and pos_text therefore give drop = 0 exactly.
    """
    video = np.asarray(video)
    pos = np.asarray(pos_text)
    neg = np.asarray(neg_text)
    if pos.shape != neg.shape:
        raise DimensionError(f"pos_text shape {pos.shape} != neg_text shape {neg.shape}")
    if video.ndim != 2 or pos.ndim != 2:
        raise DimensionError("video and text matrices must be 2-D [N, D]")
    n = video.shape[0]
    if pos.shape[0] != n:
        raise DimensionError(f"video has N={n} rows but text has N={pos.shape[0]}")

    graph_video = build_neighbor_graph(video, k, metric)
    graph_pos = build_neighbor_graph(pos, k, metric)
    positive = mutual_knn_alignment(graph_video, graph_pos).score

    dist = cross_distances(neg, pos, metric)
    np.fill_diagonal(dist, np.inf)
    neighbors = _order_by_distance(dist)[:, :k]
    graph_neg = NeighborGraph(neighbors=neighbors, k=int(k), metric=metric)
    negative = mutual_knn_alignment(graph_video, graph_neg).score

    return TemporalProbeResult(
        positive_score=positive,
        negative_score=negative,
        drop=positive - negative,
        k=int(k),
        n=n,
        metric=metric,
    )


def related_ranking(
    text: np.ndarray, groups: list[RelatedGroup], metric: str = "cosine"
) -> RelatedRankingResult:
    """Order each group's related items by distance to its anchor."""
    text = np.asarray(text)
    if text.ndim != 2:
        raise DimensionError(f"text must be 2-D [N, D], got shape {text.shape}")
    n = text.shape[0]
    for group in groups:
        for index in (group.anchor, *group.related):
            if not 0 <= index < n:
                raise ParameterError(f"group index {index} out of range [0, {n})")

    orderings = []
    width = max((len(g.related) for g in groups), default=0)
    first_slot_counts = [0] * width
    for group in groups:
        rows = np.array(group.related, dtype=np.int64)
        dist = cross_distances(text[group.anchor : group.anchor + 1], text[rows], metric)[0]
        ordering = tuple(int(idx) for _, idx in sorted(zip(dist.tolist(), group.related)))
        orderings.append(ordering)
        first_slot_counts[group.related.index(ordering[0])] += 1

    return RelatedRankingResult(
        orderings=tuple(orderings),
        first_slot_counts=tuple(first_slot_counts),
        metric=metric,
    )
