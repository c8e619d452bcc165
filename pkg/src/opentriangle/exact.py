"""Exact percolation quantities on tiny graphs by exhaustive enumeration.

Every configuration quantity is first accumulated as an *integer count table*
indexed by the number of open edges: a configuration with k open edges has
weight p^k (1-p)^(E-k), so

    B(v, w) = sum_k  count[k, v, w] * p^k * (1-p)^(E-k)

with count[k, v, w] = #{configurations with k open edges and v connected to
w}.  Counts are exact integers, are independent of p (one enumeration serves
every p), and the final per-entry sum has only E+1 terms, which math.fsum
rounds correctly.  The connectivity counts and the size-resolved counts are
accumulated through separate reductions so the partition identity
sum_n B_n = B is a genuine cross-check of the labeling, not an algebraic
tautology of one code path.

Enumeration refuses graphs above an edge cap (default 24, overridable via
OPENTRIANGLE_MAX_EDGES) rather than silently truncating.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResourceCapError
from .graphs import TransitiveGraph
from .labeling import batch_min_labels

__all__ = [
    "PercolationModel",
    "SizeResolvedFamily",
    "cluster_functional",
    "cycle_closed_form",
    "cycle_size_resolved_family",
    "cycle_two_point_matrix",
    "enumerate_size_resolved",
    "enumerate_two_point",
]

DEFAULT_EDGE_CAP = 24
EDGE_CAP_ENV = "OPENTRIANGLE_MAX_EDGES"

# Per-chunk element budget for the (configs, V, V) connectivity tensor.
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class PercolationModel:
    """Bond percolation on a fixed graph: each edge open with probability p."""

    graph: TransitiveGraph
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"open probability must lie in [0, 1], got {self.p}")

    def describe(self) -> dict:
        doc = self.graph.describe()
        doc["p"] = self.p
        return doc


@dataclass(frozen=True)
class SizeResolvedFamily:
    """The matrices B_n(v, w) = P(v <-> w and |cluster(v)| = n), n = 1..|V|."""

    matrices: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def matrix(self, n: int) -> np.ndarray:
        """The matrix for cluster size n (1-based)."""
        if not 1 <= n <= len(self.matrices):
            raise ValueError(f"cluster size {n} outside 1..{len(self.matrices)}")
        return self.matrices[n - 1]

    def total(self) -> np.ndarray:
        """Entrywise sum over n; equals the two-point matrix."""
        return np.add.reduce(np.stack(self.matrices), axis=0)


def _edge_cap() -> int:
    return int(os.environ.get(EDGE_CAP_ENV, DEFAULT_EDGE_CAP))


def _check_edge_cap(graph: TransitiveGraph) -> None:
    cap = _edge_cap()
    if graph.edge_count > cap:
        raise ResourceCapError(
            f"exhaustive enumeration refused: {graph.family} graph has "
            f"{graph.edge_count} edges, above the cap {cap} "
            f"(2^{graph.edge_count} configurations; raise {EDGE_CAP_ENV} to override)"
        )


def _config_chunks(graph: TransitiveGraph):
    """Yield (open_masks, popcounts, labels) over all 2^|E| configurations.

    Configurations are visited in increasing mask order; bit j of the mask is
    the state of edge j in the graph's canonical edge list.
    """
    n = graph.vertex_count
    e = graph.edge_count
    edges = np.asarray(graph.edges, dtype=np.int64)
    total = 1 << e
    chunk = max(256, _CHUNK_ELEMENTS // (n * n))
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        open_masks = ((idx[:, None] >> np.arange(e, dtype=np.uint64)) & 1).astype(bool)
        popcounts = open_masks.sum(axis=1).astype(np.int64)
        labels = batch_min_labels(n, edges, open_masks)
        yield open_masks, popcounts, labels


@lru_cache(maxsize=8)
def _count_tables(graph: TransitiveGraph) -> tuple[np.ndarray, np.ndarray]:
    """Integer count tables (conn, size) for all open-edge counts k.

    conn[k, v, w]    = #configurations with k open edges and v <-> w
    size[k, n-1, v, w] = as above, additionally |cluster(v)| = n

    The two tables are reduced independently (see module docstring).
    """
    n = graph.vertex_count
    e = graph.edge_count
    conn_counts = np.zeros((e + 1) * n * n, dtype=np.int64)
    size_counts = np.zeros((e + 1) * n * n * n, dtype=np.int64)
    pair_index = np.arange(n * n, dtype=np.int64).reshape(n, n)
    for _, popcounts, labels in _config_chunks(graph):
        conn = labels[:, :, None] == labels[:, None, :]
        lin_conn = popcounts[:, None, None] * (n * n) + pair_index
        conn_counts += np.bincount(
            lin_conn[conn], minlength=conn_counts.size
        )
        sizes = conn.sum(axis=2)
        lin_size = (
            popcounts[:, None, None] * n + (sizes[:, :, None] - 1)
        ) * (n * n) + pair_index
        size_counts += np.bincount(
            lin_size[conn], minlength=size_counts.size
        )
    return (
        conn_counts.reshape(e + 1, n, n),
        size_counts.reshape(e + 1, n, n, n),
    )


def _weights(edge_count: int, p: float) -> np.ndarray:
    k = np.arange(edge_count + 1)
    return np.asarray(p, dtype=float) ** k * np.asarray(1.0 - p, dtype=float) ** (
        edge_count - k
    )


def _evaluate(counts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Correctly-rounded per-entry sum over the open-edge-count axis."""
    flat = counts.reshape(counts.shape[0], -1)
    out = np.array(
        [math.fsum(flat[k, j] * weights[k] for k in range(flat.shape[0]))
         for j in range(flat.shape[1])]
    )
    return out.reshape(counts.shape[1:])


def enumerate_two_point(model: PercolationModel) -> np.ndarray:
    """The two-point matrix B(v, w) = P(v <-> w), exact over all configurations."""
    _check_edge_cap(model.graph)
    conn_counts, _ = _count_tables(model.graph)
    B = _evaluate(conn_counts, _weights(model.graph.edge_count, model.p))
    np.fill_diagonal(B, 1.0)  # v <-> v in every configuration
    return B


def enumerate_size_resolved(model: PercolationModel) -> SizeResolvedFamily:
    """The family B_n(v, w) = P(v <-> w, |cluster(v)| = n), exact."""
    _check_edge_cap(model.graph)
    _, size_counts = _count_tables(model.graph)
    weights = _weights(model.graph.edge_count, model.p)
    matrices = tuple(
        _evaluate(size_counts[:, n], weights)
        for n in range(model.graph.vertex_count)
    )
    return SizeResolvedFamily(matrices)


def cluster_functional(model: PercolationModel, f: np.ndarray, n: int) -> float:
    """E[ sum over clusters C with |C| = n of (sum_{v in C} f(v))^2 ].

    Computed directly from the cluster decomposition of each configuration,
    with no reference to the size-resolved matrices, so the identity
    cluster_functional(f, n) = <B_n f, f> is an independent check of both.
    """
    _check_edge_cap(model.graph)
    g = model.graph
    if not 1 <= n <= g.vertex_count:
        raise ValueError(f"cluster size {n} outside 1..{g.vertex_count}")
    f = np.asarray(f, dtype=float)
    if f.shape != (g.vertex_count,):
        raise ValueError(f"f must have one entry per vertex, got shape {f.shape}")
    vertex_index = np.arange(g.vertex_count)
    per_count = np.zeros(g.edge_count + 1)
    for _, popcounts, labels in _config_chunks(g):
        conn = labels[:, :, None] == labels[:, None, :]
        cluster_sum = conn @ f
        is_root = labels == vertex_index
        wanted = is_root & (conn.sum(axis=2) == n)
        values = np.where(wanted, cluster_sum**2, 0.0).sum(axis=1)
        per_count += np.bincount(
            popcounts, weights=values, minlength=g.edge_count + 1
        )
    weights = _weights(g.edge_count, model.p)
    return math.fsum(per_count[k] * weights[k] for k in range(g.edge_count + 1))


def cluster_functional_profile(model: PercolationModel, fs: np.ndarray) -> np.ndarray:
    """cluster_functional for every size n and a stack of f in one sweep.

    Returns shape (vertex_count, len(fs)); entry (n-1, j) equals
    cluster_functional(model, fs[j], n).  A single pass over the
    configurations serves every (n, j) pair, which is what makes
    50-function quadratic-form batteries affordable.  The accumulation
    route (gather cluster rows at their min-label roots, square the
    cluster sums, bin by open-edge count and size) stays independent of
    the size-resolved matrices.
    """
    _check_edge_cap(model.graph)
    g = model.graph
    fs = np.atleast_2d(np.asarray(fs, dtype=float))
    if fs.shape[1] != g.vertex_count:
        raise ValueError(
            f"functions must have one entry per vertex, got shape {fs.shape}"
        )
    n_vertices = g.vertex_count
    n_funcs = fs.shape[0]
    fs_cols = np.ascontiguousarray(fs.T)
    vertex_index = np.arange(n_vertices)
    per_count = np.zeros(((g.edge_count + 1) * n_vertices, n_funcs))
    for _, popcounts, labels in _config_chunks(g):
        conn = labels[:, :, None] == labels[:, None, :]
        is_root = labels == vertex_index
        roots_m, roots_v = np.nonzero(is_root)
        root_rows = conn[roots_m, roots_v, :].astype(np.float64)
        sizes = root_rows.sum(axis=1).astype(np.int64)
        key = popcounts[roots_m] * n_vertices + (sizes - 1)
        vals = (root_rows @ fs_cols) ** 2
        for j in range(n_funcs):
            per_count[:, j] += np.bincount(
                key, weights=vals[:, j], minlength=per_count.shape[0]
            )
    weights = _weights(g.edge_count, model.p)
    table = per_count.reshape(g.edge_count + 1, n_vertices, n_funcs)
    out = np.empty((n_vertices, n_funcs))
    for n in range(n_vertices):
        for j in range(n_funcs):
            out[n, j] = math.fsum(
                table[k, n, j] * weights[k] for k in range(g.edge_count + 1)
            )
    return out


# ----------------------------------------------------------------------
# Closed forms on cycles (second, enumeration-free oracle)
# ----------------------------------------------------------------------


def cycle_closed_form(n: int, p: float, k: int) -> float:
    """P(v <-> v+k) on the n-cycle: p^k + p^(n-k) - p^n, and 1 for k = 0.

    The two arcs joining v to w are open with probability p^k and p^(n-k);
    inclusion–exclusion removes the all-open overlap.  k is the cyclic
    difference (w - v) mod n.
    """
    if n < 3:
        raise ValueError(f"cycle needs at least 3 vertices, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"open probability must lie in [0, 1], got {p}")
    if not 0 <= k < n:
        raise ValueError(f"arc difference {k} outside 0..{n - 1}")
    if k == 0:
        return 1.0
    return p**k + p ** (n - k) - p**n


def cycle_two_point_matrix(n: int, p: float) -> np.ndarray:
    """Full two-point matrix on the n-cycle from the closed form."""
    diff = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    B = np.empty((n, n))
    for k in range(n):
        B[diff == k] = cycle_closed_form(n, p, k)
    return B


def cycle_size_resolved_family(n: int, p: float) -> SizeResolvedFamily:
    """Size-resolved family on the n-cycle by arc counting.

    For cluster size m < n the cluster of v is an arc: m - 1 consecutive open
    edges flanked by two closed ones.  Arcs of length m containing both v and
    w = v + k (mod n) number max(0, m - k) + max(0, m - (n - k)), giving

        B_m(v, w) = [max(0, m - k) + max(0, m - (n - k))] p^(m-1) (1-p)^2.

    The full-cycle cluster (m = n) needs at least n - 1 open edges:
    B_n(v, w) = p^n + n p^(n-1) (1-p) for every pair.
    """
    if n < 3:
        raise ValueError(f"cycle needs at least 3 vertices, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"open probability must lie in [0, 1], got {p}")
    diff = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    q = 1.0 - p
    matrices = []
    for m in range(1, n):
        arcs = np.maximum(0, m - diff) + np.maximum(0, m - (n - diff))
        matrices.append(arcs * p ** (m - 1) * q * q)
    matrices.append(np.full((n, n), p**n + n * p ** (n - 1) * q))
    return SizeResolvedFamily(tuple(matrices))
