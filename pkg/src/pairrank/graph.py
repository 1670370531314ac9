"""Comparison-graph sampling and diagnostics.

Random designs draw each pair's comparison count from Bin(T, p)
independently (mirrored), then outcomes from Bin(t_ij, F(merit_i - merit_j)).
Diagnostics summarize how well the graph supports estimation: connectivity
of the undirected comparison graph, strong connectivity of the win digraph,
per-subject totals, and the minimum number of common opponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .data import ComparisonData
from .errors import DataValidationError
from .links import LinkModel

SeedLike = int | np.random.SeedSequence | np.random.Generator


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator; pass a Generator through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def replication_rng(master_seed: int, replication: int) -> np.random.Generator:
    """Independent child stream for one Monte Carlo replication.

    Derived from (master seed, replication index), so any scheduling of
    replications across workers reproduces the same draws.
    """
    return make_rng(np.random.SeedSequence((master_seed, replication)))


def sample_er_graph(
    n_plus_1: int, comparisons_per_pair: int, p: float, seed: SeedLike
) -> np.ndarray:
    """Symmetric count matrix with iid Bin(T, p) pairs, row-major draw order."""
    if n_plus_1 < 2:
        raise DataValidationError(f"need at least two subjects, got {n_plus_1}")
    if comparisons_per_pair <= 0:
        raise DataValidationError("comparisons_per_pair must be a positive integer")
    if not 0.0 <= p <= 1.0:
        raise DataValidationError(f"pair probability must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    rows, cols = np.triu_indices(n_plus_1, k=1)
    draws = rng.binomial(comparisons_per_pair, p, size=rows.size)
    t = np.zeros((n_plus_1, n_plus_1), dtype=np.int64)
    t[rows, cols] = draws
    t[cols, rows] = draws
    return t


def sample_outcomes(
    t: np.ndarray, merits: np.ndarray, link: LinkModel, seed: SeedLike
) -> ComparisonData:
    """Draw win counts a_ij ~ Bin(t_ij, F(merit_i - merit_j)) per pair."""
    t = np.asarray(t)
    merits = np.asarray(merits, dtype=float)
    if merits.ndim != 1 or merits.shape[0] != t.shape[0]:
        raise DataValidationError(
            f"merit vector length {merits.shape} does not match {t.shape[0]} subjects"
        )
    rng = make_rng(seed)
    rows, cols = np.triu_indices(t.shape[0], k=1)
    probs = np.asarray(link.cdf(merits[rows] - merits[cols]), dtype=float)
    wins = rng.binomial(t[rows, cols].astype(np.int64), probs)
    a = np.zeros_like(t, dtype=np.int64)
    a[rows, cols] = wins
    a[cols, rows] = t[rows, cols] - wins
    return ComparisonData(t=t, a=a)


def is_connected(t: np.ndarray) -> bool:
    """Connectivity of the undirected graph with an edge wherever t_ij > 0."""
    graph = csr_matrix(np.asarray(t) > 0)
    n_components, _ = connected_components(graph, directed=False)
    return bool(n_components == 1)


def is_strongly_connected(a: np.ndarray) -> bool:
    """Strong connectivity of the digraph with edge i -> j whenever a_ij > 0."""
    graph = csr_matrix(np.asarray(a) > 0)
    n_components, _ = connected_components(graph, directed=True, connection="strong")
    return bool(n_components == 1)


@dataclass(frozen=True)
class GraphDiagnostics:
    t_graph_connected: bool
    win_digraph_strongly_connected: bool
    t_min: int
    t_max: int
    min_common_neighbors: int
    tau: float


def graph_diagnostics(data: ComparisonData) -> GraphDiagnostics:
    """Connectivity flags, total extremes, and the common-opponent minimum.

    tau is min_common_neighbors / (number of subjects).
    """
    totals = data.totals
    adjacency = (data.t > 0).astype(np.int64)
    common = adjacency @ adjacency
    rows, cols = np.triu_indices(data.n_plus_1, k=1)
    min_common = int(common[rows, cols].min())
    return GraphDiagnostics(
        t_graph_connected=is_connected(data.t),
        win_digraph_strongly_connected=is_strongly_connected(data.a),
        t_min=int(totals.min()),
        t_max=int(totals.max()),
        min_common_neighbors=min_common,
        tau=min_common / data.n_plus_1,
    )


def linear_merits(n_plus_1: int, c: float) -> np.ndarray:
    """Evenly spaced merits i * c * log(n) / n, baseline at zero."""
    if n_plus_1 < 2:
        raise DataValidationError(f"need at least two subjects, got {n_plus_1}")
    if c < 0:
        raise DataValidationError(f"merit slope c must be nonnegative, got {c}")
    n = n_plus_1 - 1
    return np.arange(n_plus_1, dtype=float) * (c * math.log(n) / n)
