"""Seeded Monte Carlo estimation of B and B_n with per-entry standard errors.

Sampling is driven by the counter-based Philox generator (4x64), so results
are a pure function of (model, samples, seed, worker_count): worker i draws
from the key seed XOR i, workers are merged in index order, and batching is
fixed, which makes estimates bit-identical across runs and machines sharing
an IEEE-754 numpy.  "Workers" here are independent streams executed
sequentially; running them in parallel would change nothing because each
owns its counts until the deterministic merge.

On a transitive graph one row of the estimate determines the whole matrix,
so by default only the root vertex's row is sampled and the matrix is
completed through translation orbits; ``full_matrix=True`` accumulates all
pairs instead, which costs |V| times more memory but makes each size bucket
an exact sum of cluster-indicator outer products (hence PSD sample by
sample).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import PercolationModel
from .graphs import TransitiveGraph, shift_class_matrix
from .labeling import UnionFind, batch_min_labels, canonical_labels, cluster_sizes

__all__ = [
    "ClusterLabeling",
    "GENERATOR_NAME",
    "MCEstimate",
    "MCSizeResolved",
    "clusters",
    "complete_from_row",
    "mc_size_resolved",
    "mc_two_point",
    "sample_configuration",
    "worker_stream",
]

GENERATOR_NAME = "philox4x64"
CHUNK = 16384
MIN_SAMPLES = 100
_MASK64 = (1 << 64) - 1


def worker_stream(seed: int, worker: int) -> np.random.Generator:
    """The deterministic stream for one worker: Philox keyed by seed XOR worker."""
    return np.random.Generator(np.random.Philox(key=(seed ^ worker) & _MASK64))


def sample_configuration(model: PercolationModel, rng: np.random.Generator) -> np.ndarray:
    """One edge configuration: boolean open-mask indexed like graph.edges."""
    return rng.random(model.graph.edge_count) < model.p


@dataclass(frozen=True)
class ClusterLabeling:
    """Cluster partition of one configuration.

    labels[v] is the smallest vertex index in the open cluster of v, and
    sizes[v] the number of vertices in that cluster.
    """

    labels: np.ndarray
    sizes: np.ndarray


def clusters(g: TransitiveGraph, config: np.ndarray) -> ClusterLabeling:
    """Union-find partition of the open subgraph given by ``config``."""
    config = np.asarray(config, dtype=bool)
    if config.shape != (g.edge_count,):
        raise ValueError(
            f"configuration has shape {config.shape}, expected ({g.edge_count},)"
        )
    uf = UnionFind(g.vertex_count)
    for j in np.flatnonzero(config):
        a, b = g.edges[j]
        uf.union(a, b)
    labels = canonical_labels(uf)
    return ClusterLabeling(labels=labels, sizes=cluster_sizes(labels))


@dataclass(frozen=True)
class MCEstimate:
    """A matrix of sample means with binomial standard errors and provenance."""

    mean: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    worker_count: int
    generator: str
    provenance: dict

    def describe(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "worker_count": self.worker_count,
            "generator": self.generator,
            **self.provenance,
        }


@dataclass(frozen=True)
class MCSizeResolved:
    """Size-resolved estimates: buckets for n = 1..n_max plus an overflow bucket.

    The overflow bucket collects all cluster sizes above n_max, so the
    buckets still partition every sample: their counts sum to the two-point
    counts exactly (this is asserted during accumulation, sample batch by
    sample batch).
    """

    buckets: tuple[MCEstimate, ...]
    overflow: MCEstimate
    n_max: int

    def bucket(self, n: int) -> MCEstimate:
        if not 1 <= n <= self.n_max:
            raise ValueError(f"cluster size {n} outside 1..{self.n_max}")
        return self.buckets[n - 1]

    def total_mean(self) -> np.ndarray:
        total = np.add.reduce([b.mean for b in self.buckets])
        return total + self.overflow.mean


def _split_samples(samples: int, worker_count: int) -> list[int]:
    base, rem = divmod(samples, worker_count)
    return [base + (1 if i < rem else 0) for i in range(worker_count)]


def _binomial_stderr(mean: np.ndarray, samples: int) -> np.ndarray:
    return np.sqrt(np.clip(mean * (1.0 - mean), 0.0, None) / samples)


def complete_from_row(g: TransitiveGraph, row: np.ndarray) -> np.ndarray:
    """Expand a root-row estimate to the full matrix through translation orbits.

    Entry (v, w) averages the two orbit representatives row[C[v, w]] and
    row[C[w, v]] (mapping v resp. w to the root), which symmetrizes the
    sampling noise.
    """
    C = shift_class_matrix(g)
    return (row[C] + row[C.T]) / 2.0


def _validate(model: PercolationModel, samples: int, worker_count: int) -> None:
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if worker_count < 1:
        raise ValueError(f"worker_count must be positive, got {worker_count}")


def _accumulate_counts(
    model: PercolationModel,
    samples: int,
    seed: int,
    worker_count: int,
    full_matrix: bool,
    n_max: int | None,
):
    """Shared sampling loop; returns (conn_counts, bucket_counts or None).

    Counts are integers, so the merge across chunks and workers is exact and
    order-independent; the fixed worker order is still kept for clarity.
    """
    g = model.graph
    n_vertices = g.vertex_count
    edges = np.asarray(g.edges, dtype=np.int64).reshape(g.edge_count, 2)
    if full_matrix:
        conn_counts = np.zeros((n_vertices, n_vertices), dtype=np.int64)
        bucket_shape = (0,) if n_max is None else (n_max + 1, n_vertices, n_vertices)
    else:
        conn_counts = np.zeros(n_vertices, dtype=np.int64)
        bucket_shape = (0,) if n_max is None else (n_max + 1, n_vertices)
    bucket_counts = None if n_max is None else np.zeros(bucket_shape, dtype=np.int64)
    pair_index = np.arange(n_vertices * n_vertices).reshape(n_vertices, n_vertices)
    for worker, share in enumerate(_split_samples(samples, worker_count)):
        rng = worker_stream(seed, worker)
        remaining = share
        while remaining > 0:
            m = min(CHUNK, remaining)
            remaining -= m
            masks = rng.random((m, g.edge_count)) < model.p
            labels = batch_min_labels(n_vertices, edges, masks)
            if full_matrix:
                conn = labels[:, :, None] == labels[:, None, :]
                chunk_conn = conn.sum(axis=0, dtype=np.int64)
                conn_counts += chunk_conn
                if n_max is not None:
                    sizes = conn.sum(axis=2)
                    n_idx = np.where(sizes <= n_max, sizes - 1, n_max)
                    lin = (n_idx[:, :, None] * (n_vertices * n_vertices)) + pair_index
                    chunk_buckets = np.bincount(
                        lin[conn], minlength=bucket_counts.size
                    ).reshape(bucket_shape)
                    if not np.array_equal(chunk_buckets.sum(axis=0), chunk_conn):
                        raise RuntimeError(
                            "size buckets failed to partition a sample batch"
                        )
                    bucket_counts += chunk_buckets
            else:
                conn0 = labels == labels[:, :1]
                chunk_conn = conn0.sum(axis=0, dtype=np.int64)
                conn_counts += chunk_conn
                if n_max is not None:
                    root_sizes = conn0.sum(axis=1)
                    n_idx = np.where(root_sizes <= n_max, root_sizes - 1, n_max)
                    chunk_buckets = np.zeros(bucket_shape, dtype=np.int64)
                    for b in np.unique(n_idx):
                        chunk_buckets[b] = conn0[n_idx == b].sum(axis=0)
                    if not np.array_equal(chunk_buckets.sum(axis=0), chunk_conn):
                        raise RuntimeError(
                            "size buckets failed to partition a sample batch"
                        )
                    bucket_counts += chunk_buckets
    return conn_counts, bucket_counts


def _estimate_from_counts(
    g: TransitiveGraph,
    counts: np.ndarray,
    samples: int,
    full_matrix: bool,
    pin_diagonal: bool,
    meta: dict,
) -> MCEstimate:
    if full_matrix:
        mean = counts / samples
    else:
        mean = complete_from_row(g, counts / samples)
    if pin_diagonal:
        np.fill_diagonal(mean, 1.0)
    return MCEstimate(
        mean=mean,
        stderr=_binomial_stderr(mean, samples),
        **meta,
    )


def mc_two_point(
    model: PercolationModel,
    samples: int,
    seed: int,
    worker_count: int = 1,
    full_matrix: bool = False,
) -> MCEstimate:
    """Estimate B(v, w) = P(v <-> w) from independent configurations."""
    _validate(model, samples, worker_count)
    conn_counts, _ = _accumulate_counts(
        model, samples, seed, worker_count, full_matrix, n_max=None
    )
    meta = {
        "samples": samples,
        "seed": seed,
        "worker_count": worker_count,
        "generator": GENERATOR_NAME,
        "provenance": model.describe(),
    }
    return _estimate_from_counts(
        model.graph, conn_counts, samples, full_matrix, pin_diagonal=True, meta=meta
    )


def mc_size_resolved(
    model: PercolationModel,
    samples: int,
    seed: int,
    n_max: int,
    worker_count: int = 1,
    full_matrix: bool = False,
) -> MCSizeResolved:
    """Estimate B_n for n <= n_max plus the overflow bucket n > n_max."""
    _validate(model, samples, worker_count)
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    _, bucket_counts = _accumulate_counts(
        model, samples, seed, worker_count, full_matrix, n_max=n_max
    )
    meta = {
        "samples": samples,
        "seed": seed,
        "worker_count": worker_count,
        "generator": GENERATOR_NAME,
        "provenance": model.describe(),
    }
    estimates = [
        _estimate_from_counts(
            model.graph, bucket_counts[b], samples, full_matrix,
            pin_diagonal=False, meta=meta,
        )
        for b in range(n_max + 1)
    ]
    return MCSizeResolved(
        buckets=tuple(estimates[:n_max]), overflow=estimates[n_max], n_max=n_max
    )
