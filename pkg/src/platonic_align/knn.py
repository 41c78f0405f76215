"""Nearest-neighbor graphs, mutual k-NN alignment, and weighted k-NN retrieval.

The alignment score between two paired embedding spaces is the mean overlap
of their k-nearest-neighbor sets:

    score = (1 / (k * N)) * sum_i |knn_X(i) ∩ knn_Y(i)|

Everything here is deterministic: neighbor ordering is ascending distance
with ties broken by ascending index, so identical inputs produce identical
graphs and scores regardless of thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from platonic_align.errors import DataError, DimensionError, ParameterError

METRICS = ("cosine", "euclidean")

DEFAULT_K = 10
DEFAULT_RETRIEVAL_K = 8
DEFAULT_TAU = 0.07


@dataclass(frozen=True)
class NeighborGraph:
    """k-nearest-neighbor index sets for one embedding matrix.

    ``neighbors`` has shape [N, k]; row i lists the k indices j != i in
    ascending distance order, ties broken by ascending index. The row is an
    ordered list, but alignment only ever uses it as a set.
    """

    neighbors: np.ndarray
    k: int
    metric: str

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]


@dataclass(frozen=True)
class AlignmentReport:
    """Mutual k-NN alignment score plus the context needed to interpret it."""

    score: float
    k: int
    n: int
    metric: str
    layer_x: int = 0
    layer_y: int = 0


def _validate_matrix(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError(f"{name} must be 2-D [N, D], got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise DataError(f"{name} contains non-finite values")
    return matrix


def _normalize_rows(matrix: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        row = int(np.argmin(norms))
        raise DataError(f"{name} row {row} is a zero vector; cosine is undefined")
    return matrix / norms


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ParameterError(f"metric must be one of {METRICS}, got {metric!r}")


def _distance_matrix(matrix: np.ndarray, metric: str, name: str = "matrix") -> np.ndarray:
    """Full pairwise distances in float64, diagonal set to +inf.

    Euclidean values are squared; every consumer only ranks by them.
    """
    matrix = _validate_matrix(matrix, name)
    if metric == "cosine":
        unit = _normalize_rows(matrix, name)
        dist = 1.0 - unit @ unit.T
    else:
        sq = np.sum(matrix * matrix, axis=1)
        dist = sq[:, None] + sq[None, :] - 2.0 * (matrix @ matrix.T)
        np.maximum(dist, 0.0, out=dist)
    np.fill_diagonal(dist, np.inf)
    return dist


def _order_by_distance(dist: np.ndarray) -> np.ndarray:
    # Stable sort keeps equal-distance candidates in index order, which is
    # exactly the tie-break rule and what makes results thread-invariant.
    return np.argsort(dist, axis=1, kind="stable")


def cross_distances(queries: np.ndarray, candidates: np.ndarray, metric: str = "cosine") -> np.ndarray:
    """Distances from every query row to every candidate row, shape [Q, C].

    Euclidean values are squared (ordering-equivalent); distances are only
    ever used for ranking, never reported.
    """
    _check_metric(metric)
    q = _validate_matrix(queries, "queries")
    c = _validate_matrix(candidates, "candidates")
    if q.shape[1] != c.shape[1]:
        raise DimensionError(f"queries D={q.shape[1]} but candidates D={c.shape[1]}")
    if metric == "cosine":
        return 1.0 - _normalize_rows(q, "queries") @ _normalize_rows(c, "candidates").T
    sq_q = np.sum(q * q, axis=1)
    sq_c = np.sum(c * c, axis=1)
    dist = sq_q[:, None] + sq_c[None, :] - 2.0 * (q @ c.T)
    np.maximum(dist, 0.0, out=dist)
    return dist


def build_neighbor_graph(matrix: np.ndarray, k: int, metric: str = "cosine") -> NeighborGraph:
    """Exact k-NN over all pairwise distances, self excluded.

    Requires 1 <= k <= N-1. Cosine rejects zero rows; both metrics reject
    non-finite input.
    """
    _check_metric(metric)
    dist = _distance_matrix(matrix, metric)
    n = dist.shape[0]
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ParameterError(f"k must be an integer, got {k!r}")
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    order = _order_by_distance(dist)
    neighbors = np.ascontiguousarray(order[:, :k], dtype=np.int64)
    neighbors.flags.writeable = False
    return NeighborGraph(neighbors=neighbors, k=int(k), metric=metric)


def mutual_knn_alignment(
    gx: NeighborGraph, gy: NeighborGraph, layer_x: int = 0, layer_y: int = 0
) -> AlignmentReport:
    """Mean per-item overlap of the two graphs' neighbor sets, in [0, 1]."""
    if gx.n != gy.n:
        raise ParameterError(f"graphs disagree on N: {gx.n} vs {gy.n}")
    if gx.k != gy.k:
        raise ParameterError(f"graphs disagree on k: {gx.k} vs {gy.k}")
    # Rows hold distinct indices, so pairwise equality over the two rows
    # counts the intersection exactly.
    matches = gx.neighbors[:, :, None] == gy.neighbors[:, None, :]
    score = float(matches.sum()) / (gx.k * gx.n)
    metric = gx.metric if gx.metric == gy.metric else f"{gx.metric}/{gy.metric}"
    return AlignmentReport(
        score=score,
        k=gx.k,
        n=gx.n,
        metric=metric,
        layer_x=int(layer_x),
        layer_y=int(layer_y),
    )


def alignment_curve(
    x: np.ndarray, y: np.ndarray, ks: list[int], metric: str = "cosine"
) -> list[tuple[int, float]]:
    """Alignment score at each requested k; scores need not be monotone."""
    _check_metric(metric)
    dist_x = _distance_matrix(x, metric, "x")
    dist_y = _distance_matrix(y, metric, "y")
    n = dist_x.shape[0]
    if dist_y.shape[0] != n:
        raise ParameterError(f"x and y disagree on N: {n} vs {dist_y.shape[0]}")
    for k in ks:
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or not 1 <= k <= n - 1:
            raise ParameterError(f"every k must satisfy 1 <= k <= N-1 = {n - 1}, got {k!r}")

    # One full sort per side; the k-neighborhood at any k is a prefix.
    order_x = _order_by_distance(dist_x)
    order_y = _order_by_distance(dist_y)
    curve = []
    for k in ks:
        gx = NeighborGraph(neighbors=order_x[:, :k], k=int(k), metric=metric)
        gy = NeighborGraph(neighbors=order_y[:, :k], k=int(k), metric=metric)
        curve.append((int(k), mutual_knn_alignment(gx, gy).score))
    return curve


def weighted_knn_retrieval(
    train: np.ndarray,
    train_labels: list,
    test: np.ndarray,
    test_labels: list,
    k: int = DEFAULT_RETRIEVAL_K,
    tau: float = DEFAULT_TAU,
) -> float:
    """Top-1 accuracy of a temperature-weighted k-NN vote.

    Features are L2-normalized internally; each of the k nearest train items
    (by cosine similarity s_j) votes exp(s_j / tau) for its class, and the
    argmax class wins, ties going to the lowest class-id.
    """
    train = _validate_matrix(train, "train")
    test = _validate_matrix(test, "test")
    m, d = train.shape
    t = test.shape[0]
    if test.shape[1] != d:
        raise DimensionError(f"train D={d} but test D={test.shape[1]}")
    if len(train_labels) != m:
        raise DimensionError(f"train_labels has {len(train_labels)} entries for M={m}")
    if len(test_labels) != t:
        raise DimensionError(f"test_labels has {len(test_labels)} entries for T={t}")
    if t == 0:
        raise ParameterError("test set is empty")
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or not 1 <= k <= m:
        raise ParameterError(f"k must satisfy 1 <= k <= M = {m}, got {k!r}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")

    classes = sorted(set(train_labels) | set(test_labels))
    code = {c: i for i, c in enumerate(classes)}
    train_code = np.array([code[c] for c in train_labels], dtype=np.int64)
    test_code = np.array([code[c] for c in test_labels], dtype=np.int64)

    sims = _normalize_rows(test, "test") @ _normalize_rows(train, "train").T
    # Descending similarity; stable keeps equal sims in ascending train index.
    nearest = np.argsort(-sims, axis=1, kind="stable")[:, :k]
    weights = np.exp(np.take_along_axis(sims, nearest, axis=1) / tau)
    votes = np.zeros((t, len(classes)), dtype=np.float64)
    rows = np.repeat(np.arange(t), k)
    np.add.at(votes, (rows, train_code[nearest].ravel()), weights.ravel())
    # argmax returns the first maximum, i.e. the lowest class-id after the
    # sorted-class encoding above.
    predicted = np.argmax(votes, axis=1)
    return float(np.mean(predicted == test_code))
