"""Connected-component labeling for percolation configurations.

Two routes that must agree:

* :class:`UnionFind` — classic union by size with path compression, used for
  single configurations.
* :func:`batch_min_labels` — vectorized min-label propagation over a whole
  batch of configurations at once; each sweep pushes the smallest vertex
  index of a component along open edges until a fixpoint, so the final label
  of every vertex is the minimum index in its cluster.

Both produce canonical labels (minimum vertex index per cluster), so their
outputs are comparable elementwise.
"""

from __future__ import annotations

import numpy as np

__all__ = ["UnionFind", "batch_min_labels", "canonical_labels", "cluster_sizes"]


class UnionFind:
    """Union-find over vertices 0..n-1 with union by size and path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def canonical_labels(uf: UnionFind) -> np.ndarray:
    """Per-vertex label = minimum vertex index in the vertex's component."""
    n = len(uf.parent)
    roots = np.fromiter((uf.find(v) for v in range(n)), dtype=np.int64, count=n)
    smallest: dict[int, int] = {}
    for v in range(n):
        r = int(roots[v])
        if r not in smallest:
            smallest[r] = v  # first visit in index order is the minimum
    return np.array([smallest[int(r)] for r in roots], dtype=np.int64)


def cluster_sizes(labels: np.ndarray) -> np.ndarray:
    """Per-vertex size of the vertex's cluster, from a canonical labeling."""
    counts = np.bincount(labels, minlength=labels.size)
    return counts[labels]


def batch_min_labels(
    vertex_count: int, edges: np.ndarray, open_masks: np.ndarray
) -> np.ndarray:
    """Component labels for a batch of configurations.

    ``edges`` is an (E, 2) integer array and ``open_masks`` an (M, E) boolean
    array, one row per configuration.  Returns an (M, V) array where entry
    (m, v) is the smallest vertex index in the open cluster of v under
    configuration m.

    In-place sweeps over the edge list are Gauss–Seidel style: a label
    lowered early in a sweep propagates further within the same sweep, so
    the number of sweeps is typically far below the graph diameter.
    """
    m = open_masks.shape[0]
    labels = np.broadcast_to(
        np.arange(vertex_count, dtype=np.int64), (m, vertex_count)
    ).copy()
    while True:
        changed = False
        for j in range(edges.shape[0]):
            a, b = int(edges[j, 0]), int(edges[j, 1])
            mask = open_masks[:, j]
            la = labels[:, a]
            lb = labels[:, b]
            lowered = mask & (la != lb)
            if lowered.any():
                mn = np.minimum(la[lowered], lb[lowered])
                labels[lowered, a] = mn
                labels[lowered, b] = mn
                changed = True
        if not changed:
            return labels
