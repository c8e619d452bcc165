"""Finite vertex-transitive graphs with explicit translation automorphisms.

Four families are provided: cycles, nearest-neighbour tori, complete graphs
and hypercubes.  Each carries a *translation family*: a stored set of
automorphisms rich enough that any vertex can be mapped onto any other
(rotations, coordinate shifts, XOR shifts, or composed transpositions).
Vertices are dense integer indices 0..|V|-1; tori use row-major encoding of
their coordinate tuples and hypercube vertices are their own bitmasks.

Automorphisms are materialised as explicit permutations and cached, which
keeps application O(1) and makes exhaustive verification cheap at desk
scale; builders refuse graphs above a vertex budget (default 4096,
overridable via OPENTRIANGLE_MAX_VERTICES).
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceCapError

__all__ = [
    "Automorphism",
    "TransitiveGraph",
    "apply_isometry",
    "ball",
    "build_complete",
    "build_cycle",
    "build_hypercube",
    "build_torus",
    "distance_matrix",
    "eccentricity",
    "graph_distance",
    "indicator",
    "shift_class_matrix",
    "translation_to",
]

DEFAULT_VERTEX_BUDGET = 4096
VERTEX_BUDGET_ENV = "OPENTRIANGLE_MAX_VERTICES"


def _vertex_budget() -> int:
    return int(os.environ.get(VERTEX_BUDGET_ENV, DEFAULT_VERTEX_BUDGET))


def _check_budget(n: int, what: str) -> None:
    budget = _vertex_budget()
    if n > budget:
        raise ResourceCapError(
            f"{what} would have {n} vertices, above the vertex budget {budget} "
            f"(raise {VERTEX_BUDGET_ENV} to override)"
        )


@dataclass(frozen=True, eq=False)
class Automorphism:
    """A graph automorphism stored as an explicit vertex permutation.

    ``permutation[v]`` is the image of ``v``; the inverse permutation is
    cached so the induced isometry (which reads through the inverse) is a
    single fancy-indexing operation.
    """

    permutation: np.ndarray
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        n = perm.size
        inv = np.empty(n, dtype=np.int64)
        inv[perm] = np.arange(n, dtype=np.int64)
        perm.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "inverse", inv)

    def __call__(self, v: int) -> int:
        return int(self.permutation[v])

    @property
    def size(self) -> int:
        return self.permutation.size

    def compose(self, other: "Automorphism") -> "Automorphism":
        """Return self applied after ``other`` (self ∘ other)."""
        return Automorphism(self.permutation[other.permutation])

    def matrix(self) -> np.ndarray:
        """Dense permutation matrix P with (P f)(v) = f(inverse(v))."""
        return np.eye(self.size)[self.inverse]

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.permutation, np.arange(self.size)))


def indicator(n: int, v: int) -> np.ndarray:
    """Unit vector with a single 1 at vertex ``v``."""
    f = np.zeros(n)
    f[v] = 1.0
    return f


def apply_isometry(phi: Automorphism, f: np.ndarray) -> np.ndarray:
    """Norm-preserving relabelling of ``f`` by ``phi``: out(v) = f(phi^-1(v))."""
    return np.asarray(f, dtype=float)[phi.inverse]


# ----------------------------------------------------------------------
# Translation families
# ----------------------------------------------------------------------


class TranslationFamily:
    """Stored automorphisms that witness vertex-transitivity.

    Concrete families provide ``to(v, w)`` returning an automorphism with
    phi(v) = w, and ``members()`` iterating the stored permutations.
    """

    def to(self, v: int, w: int) -> Automorphism:
        raise NotImplementedError

    def members(self):
        raise NotImplementedError


class _AbelianShifts(TranslationFamily):
    """Shift group indexed by the vertices themselves (cycle/torus/hypercube)."""

    def __init__(self, size: int):
        self.size = size
        self._cache: dict[int, Automorphism] = {}

    def _shift_permutation(self, t: int) -> np.ndarray:
        raise NotImplementedError

    def _difference(self, v: int, w: int) -> int:
        """Group element t with shift(t)(v) = w."""
        raise NotImplementedError

    def shift(self, t: int) -> Automorphism:
        phi = self._cache.get(t)
        if phi is None:
            phi = Automorphism(self._shift_permutation(t))
            self._cache[t] = phi
        return phi

    def to(self, v: int, w: int) -> Automorphism:
        return self.shift(self._difference(v, w))

    def members(self):
        return (self.shift(t) for t in range(self.size))


class _CycleShifts(_AbelianShifts):
    def _shift_permutation(self, t: int) -> np.ndarray:
        return (np.arange(self.size) + t) % self.size

    def _difference(self, v: int, w: int) -> int:
        return (w - v) % self.size


class _TorusShifts(_AbelianShifts):
    def __init__(self, d: int, L: int):
        super().__init__(L**d)
        self.d = d
        self.L = L
        self._coords = np.stack(
            np.unravel_index(np.arange(self.size), (L,) * d), axis=1
        )

    def _shift_permutation(self, t: int) -> np.ndarray:
        tvec = self._coords[t]
        shifted = (self._coords + tvec) % self.L
        return np.ravel_multi_index(shifted.T, (self.L,) * self.d)

    def _difference(self, v: int, w: int) -> int:
        dvec = (self._coords[w] - self._coords[v]) % self.L
        return int(np.ravel_multi_index(dvec, (self.L,) * self.d))


class _XorShifts(_AbelianShifts):
    def _shift_permutation(self, t: int) -> np.ndarray:
        return np.arange(self.size) ^ t

    def _difference(self, v: int, w: int) -> int:
        return v ^ w


class _TranspositionMoves(TranslationFamily):
    """Complete-graph family: transpositions (0 i), composed to move v to w."""

    def __init__(self, size: int):
        self.size = size
        self._cache: dict[int, Automorphism] = {}

    def _swap_with_zero(self, i: int) -> Automorphism:
        phi = self._cache.get(i)
        if phi is None:
            perm = np.arange(self.size)
            perm[0], perm[i] = i, 0
            phi = Automorphism(perm)
            self._cache[i] = phi
        return phi

    def to(self, v: int, w: int) -> Automorphism:
        if v == w:
            return self._swap_with_zero(0)
        # (0 w) after (0 v) maps v -> 0 -> w.
        return self._swap_with_zero(w).compose(self._swap_with_zero(v))

    def members(self):
        return (self._swap_with_zero(i) for i in range(self.size))


# ----------------------------------------------------------------------
# Graph container and builders
# ----------------------------------------------------------------------


@dataclass(eq=False)
class TransitiveGraph:
    """Immutable finite vertex-transitive graph.

    ``edges`` is the canonical (lexicographically sorted) list of unordered
    pairs, indexed 0..|E|-1; percolation configurations address edges by
    this index.  Distance rows are BFS results cached per source vertex.
    """

    family: str
    params: tuple[int, ...]
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    translations: TranslationFamily
    _distance_rows: dict[int, np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "vertices": self.vertex_count,
            "edges": self.edge_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.describe(), sort_keys=True)

    def distance_row(self, v: int) -> np.ndarray:
        row = self._distance_rows.get(v)
        if row is None:
            row = _bfs_distances(self.adjacency, v)
            row.setflags(write=False)
            self._distance_rows[v] = row
        return row


def _bfs_distances(adjacency, source: int) -> np.ndarray:
    n = len(adjacency)
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for x in adjacency[u]:
            if dist[x] < 0:
                dist[x] = du + 1
                queue.append(x)
    return dist


def _assemble(family, params, n, edge_set, translations) -> TransitiveGraph:
    edges = tuple(sorted(edge_set))
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    adjacency = tuple(tuple(sorted(neigh)) for neigh in adj)
    return TransitiveGraph(
        family=family,
        params=tuple(params),
        vertex_count=n,
        edges=edges,
        adjacency=adjacency,
        translations=translations,
    )


def build_cycle(n: int) -> TransitiveGraph:
    """Cycle on n >= 3 vertices; translations are the n rotations."""
    if n < 3:
        raise ValueError(f"cycle needs at least 3 vertices, got {n}")
    _check_budget(n, f"cycle:{n}")
    edges = {(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)}
    return _assemble("cycle", (n,), n, edges, _CycleShifts(n))


def build_torus(d: int, L: int) -> TransitiveGraph:
    """Nearest-neighbour torus (Z/LZ)^d with L >= 3; coordinate-shift translations."""
    if d < 1:
        raise ValueError(f"torus dimension must be >= 1, got {d}")
    if L < 3:
        raise ValueError(f"torus side must be >= 3, got {L}")
    n = L**d
    _check_budget(n, f"torus:{d},{L}")
    shape = (L,) * d
    edges = set()
    coords = np.stack(np.unravel_index(np.arange(n), shape), axis=1)
    for axis in range(d):
        step = coords.copy()
        step[:, axis] = (step[:, axis] + 1) % L
        targets = np.ravel_multi_index(step.T, shape)
        for u, w in enumerate(targets):
            edges.add((min(u, int(w)), max(u, int(w))))
    return _assemble("torus", (d, L), n, edges, _TorusShifts(d, L))


def build_complete(n: int) -> TransitiveGraph:
    """Complete graph on n >= 1 vertices; transposition translations."""
    if n < 1:
        raise ValueError(f"complete graph needs at least 1 vertex, got {n}")
    _check_budget(n, f"complete:{n}")
    edges = {(u, v) for u in range(n) for v in range(u + 1, n)}
    return _assemble("complete", (n,), n, edges, _TranspositionMoves(n))


def build_hypercube(k: int) -> TransitiveGraph:
    """Hypercube {0,1}^k with k >= 1; XOR-shift translations."""
    if k < 1:
        raise ValueError(f"hypercube needs dimension >= 1, got {k}")
    n = 1 << k
    _check_budget(n, f"hypercube:{k}")
    edges = set()
    for i in range(n):
        for b in range(k):
            j = i ^ (1 << b)
            if i < j:
                edges.add((i, j))
    return _assemble("hypercube", (k,), n, edges, _XorShifts(n))


# ----------------------------------------------------------------------
# Queries
# ----------------------------------------------------------------------


def graph_distance(g: TransitiveGraph, v: int, w: int) -> int:
    """BFS shortest-path distance."""
    return int(g.distance_row(v)[w])


def distance_matrix(g: TransitiveGraph) -> np.ndarray:
    return np.stack([g.distance_row(v) for v in range(g.vertex_count)])


def eccentricity(g: TransitiveGraph, v: int) -> int:
    return int(g.distance_row(v).max())


def ball(g: TransitiveGraph, v: int, radius: int) -> np.ndarray:
    """Sorted vertex indices at distance <= radius from v."""
    return np.flatnonzero(g.distance_row(v) <= radius)


def translation_to(g: TransitiveGraph, v: int, w: int) -> Automorphism:
    """An automorphism from the stored translation family with phi(v) = w."""
    phi = g.translations.to(v, w)
    if phi(v) != w:
        raise AssertionError(
            f"translation family of {g.family} failed to map {v} to {w}"
        )
    return phi


def shift_class_matrix(g: TransitiveGraph) -> np.ndarray:
    """Orbit labels for ordered pairs: C[v, w] = phi(w) for phi mapping v to 0.

    Two pairs in the same translation orbit get the same label, so any
    translation-invariant pair function (such as connection probabilities)
    is constant on each label; row 0 then determines the whole matrix.
    """
    n = g.vertex_count
    out = np.empty((n, n), dtype=np.int64)
    for v in range(n):
        out[v] = translation_to(g, v, 0).permutation
    return out
