"""Weighted-graph data model: ingestion, degrees, Laplacian, components, summaries.

The graph is undirected with symmetric nonnegative weights and no self-loops.
Weights are held densely; at the few-hundred-vertex scale this package targets,
dense storage keeps every downstream eigensolve and kernel loop simple.
"""

from __future__ import annotations

import os
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterator, Mapping

import numpy as np

from .errors import ParseError

__all__ = [
    "WeightedGraph",
    "Partition",
    "SummaryNode",
    "SummaryEdge",
    "ClusterSummaryGraph",
    "load_edge_list",
    "summary_graph",
]


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph: unique vertex labels plus a symmetric weight matrix.

    ``weights[i, j]`` is the nonnegative weight of the edge between vertices
    ``i`` and ``j`` (0 means no edge), with an exactly symmetric matrix and a
    zero diagonal. Instances are immutable; the weight matrix is marked
    read-only at construction.
    """

    labels: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        w = np.array(self.weights, dtype=np.float64)
        n = len(self.labels)
        if w.ndim != 2 or w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} labels")
        if n == 0:
            raise ValueError("graph must have at least one vertex")
        if len(set(self.labels)) != n:
            raise ValueError("vertex labels must be distinct")
        if not np.isfinite(w).all():
            raise ValueError("edge weights must be finite")
        if (w < 0).any():
            raise ValueError("edge weights must be nonnegative")
        if (w != w.T).any():
            raise ValueError("weight matrix must be symmetric")
        if np.diagonal(w).any():
            raise ValueError("diagonal must be zero (no self-loops)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    @cached_property
    def num_edges(self) -> int:
        """Number of vertex pairs with positive weight."""
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    @cached_property
    def total_weight(self) -> float:
        """Sum of edge weights, each unordered pair counted once."""
        return float(np.triu(self.weights, 1).sum())

    @cached_property
    def degrees(self) -> np.ndarray:
        d = self.weights.sum(axis=1)
        d.setflags(write=False)
        return d

    def degree(self, i: int) -> float:
        """Weighted degree of vertex ``i`` (0 for an isolated vertex)."""
        if not 0 <= i < self.num_vertices:
            raise IndexError(f"vertex index {i} out of range 0..{self.num_vertices - 1}")
        return float(self.degrees[i])

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def laplacian(self) -> np.ndarray:
        """Graph Laplacian: degrees on the diagonal, negated weights elsewhere."""
        lap = -self.weights.copy()
        np.fill_diagonal(lap, self.degrees)
        lap.setflags(write=False)
        return lap

    @cached_property
    def neighbor_lists(self) -> tuple[np.ndarray, ...]:
        """Per-vertex arrays of neighbor indices (positive-weight edges only)."""
        lists = []
        for i in range(self.num_vertices):
            nb = np.flatnonzero(self.weights[i] > 0)
            nb.setflags(write=False)
            lists.append(nb)
        return tuple(lists)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(i, j, weight)`` with ``i < j`` for every positive-weight edge."""
        idx_i, idx_j = np.nonzero(np.triu(self.weights, 1))
        for i, j in zip(idx_i.tolist(), idx_j.tolist()):
            yield i, j, float(self.weights[i, j])

    def connected_components(self) -> "Partition":
        """Label vertices by connected component.

        Components are numbered by their smallest contained vertex index, so
        vertex 0 is always in component 0.
        """
        n = self.num_vertices
        comp = np.full(n, -1, dtype=np.int64)
        next_id = 0
        for start in range(n):
            if comp[start] >= 0:
                continue
            comp[start] = next_id
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for u in self.neighbor_lists[v]:
                    if comp[u] < 0:
                        comp[u] = next_id
                        queue.append(int(u))
            next_id += 1
        return Partition(comp, next_id, method_tag="components")


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every vertex to exactly one cluster id in ``0..k-1``."""

    assignment: np.ndarray
    k: int
    method_tag: str = ""
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a nonempty 1-D sequence")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if a.min() < 0 or a.max() >= self.k:
            raise ValueError(f"cluster ids must lie in 0..{self.k - 1}")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def num_vertices(self) -> int:
        return int(self.assignment.size)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster)

    def compact(self) -> "Partition":
        """Drop empty clusters and renumber survivors to ``0..k'-1``.

        Surviving ids are renumbered in increasing order of their old id, so
        the relative order of clusters is preserved.
        """
        sizes = self.sizes()
        occupied = np.flatnonzero(sizes)
        if occupied.size == self.k:
            return self
        remap = np.full(self.k, -1, dtype=np.int64)
        remap[occupied] = np.arange(occupied.size)
        return Partition(remap[self.assignment], int(occupied.size),
                         self.method_tag, self.params)


def load_edge_list(source: str | os.PathLike | IO, *,
                   on_self_loop: str = "drop") -> WeightedGraph:
    """Read a tab-separated edge list into a :class:`WeightedGraph`.

    Each non-comment line is ``src<TAB>dst<TAB>weight`` with a positive real
    weight; the weight column may be omitted and defaults to 1. Lines starting
    with ``#`` and blank lines are skipped. Repeated pairs, in either order,
    have their weights summed. Vertices are indexed by first appearance.

    Args:
        source: path, or an open text/binary stream of UTF-8 content.
        on_self_loop: ``"drop"`` discards self-loop lines with a warning;
            ``"error"`` raises instead.
    """
    if on_self_loop not in ("drop", "error"):
        raise ValueError(f"on_self_loop must be 'drop' or 'error', got {on_self_loop!r}")
    if hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    else:
        with open(source, "rb") as fh:
            text = fh.read().decode("utf-8")

    index: dict[str, int] = {}
    pair_weights: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.rstrip("\r\n").split("\t")
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 2 or 3 tab-separated fields, got {len(parts)}",
                             lineno)
        src, dst = parts[0], parts[1]
        if not src or not dst:
            raise ParseError("empty vertex label", lineno)
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(f"unparseable weight {parts[2]!r}", lineno) from None
            if not np.isfinite(weight):
                raise ParseError(f"weight must be finite, got {parts[2]!r}", lineno)
            if weight < 0:
                raise ParseError(f"negative weight {weight!r}", lineno)
            if weight == 0:
                raise ParseError("weight must be positive", lineno)
        else:
            weight = 1.0
        if src == dst:
            if on_self_loop == "error":
                raise ParseError(f"self-loop on {src!r}", lineno)
            warnings.warn(f"dropping self-loop on {src!r} (line {lineno})",
                          stacklevel=2)
            # the vertex itself is still registered
            if src not in index:
                index[src] = len(index)
            continue
        for lab in (src, dst):
            if lab not in index:
                index[lab] = len(index)
        i, j = index[src], index[dst]
        key = (i, j) if i < j else (j, i)
        pair_weights[key] = pair_weights.get(key, 0.0) + weight

    if not index:
        raise ParseError("empty input: no edges or vertices found")
    n = len(index)
    w = np.zeros((n, n), dtype=np.float64)
    for (i, j), weight in pair_weights.items():
        w[i, j] = weight
        w[j, i] = weight
    labels = tuple(sorted(index, key=index.__getitem__))
    return WeightedGraph(labels, w)


@dataclass(frozen=True)
class SummaryNode:
    """One cluster glyph: its id, vertex count, and internal edge weight."""

    cluster: int
    vertex_count: int
    intra_weight: float


@dataclass(frozen=True)
class SummaryEdge:
    """Total weight between two clusters, stored once with ``a < b``."""

    a: int
    b: int
    weight: float


@dataclass(frozen=True, eq=False)
class ClusterSummaryGraph:
    """One node per cluster, one edge per connected cluster pair."""

    nodes: tuple[SummaryNode, ...]
    edges: tuple[SummaryEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.nodes:
            raise ValueError("summary graph must have at least one node")
        ids = [node.cluster for node in self.nodes]
        if ids != list(range(len(ids))):
            raise ValueError("summary nodes must be ordered by cluster id 0..k-1")
        seen = set()
        for e in self.edges:
            if e.a == e.b:
                raise ValueError("summary graph admits no self-edges")
            if not (0 <= e.a < len(ids) and 0 <= e.b < len(ids)):
                raise ValueError(f"edge ({e.a}, {e.b}) references unknown cluster")
            if e.a > e.b:
                raise ValueError("summary edges must be stored with a < b")
            if e.weight <= 0:
                raise ValueError("summary edge weights must be positive")
            if (e.a, e.b) in seen:
                raise ValueError(f"duplicate summary edge ({e.a}, {e.b})")
            seen.add((e.a, e.b))

    @property
    def num_clusters(self) -> int:
        return len(self.nodes)

    @property
    def num_vertices(self) -> int:
        return sum(node.vertex_count for node in self.nodes)


def summary_graph(g: WeightedGraph, p: Partition) -> ClusterSummaryGraph:
    """Collapse a partitioned graph to one node per cluster.

    Node ``c`` carries the vertex count and intra-cluster weight of cluster
    ``c``; an edge joins clusters ``c != c'`` with the summed weight of all
    crossing edges, omitted when that sum is zero.
    """
    if p.num_vertices != g.num_vertices:
        raise ValueError(f"partition covers {p.num_vertices} vertices, "
                         f"graph has {g.num_vertices}")
    k = p.k
    onehot = np.zeros((g.num_vertices, k), dtype=np.float64)
    onehot[np.arange(g.num_vertices), p.assignment] = 1.0
    block = onehot.T @ g.weights @ onehot  # block[c, c'] sums w[i, j] over i in c, j in c'
    sizes = p.sizes()
    nodes = tuple(SummaryNode(c, int(sizes[c]), float(block[c, c]) / 2.0)
                  for c in range(k))
    edges = []
    for a in range(k):
        for b in range(a + 1, k):
            if block[a, b] > 0:
                edges.append(SummaryEdge(a, b, float(block[a, b])))
    return ClusterSummaryGraph(nodes, tuple(edges))
