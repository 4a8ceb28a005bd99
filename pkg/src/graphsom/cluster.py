"""Lloyd k-means, spectral clustering, kernel k-means, q-modularity, stats.

The explicit and kernel k-means variants are deliberately twinned: same
seeding draws, same tie rules, same empty-cluster repair, same restart
schedule. Feeding kernel_kmeans the Gram matrix X X^T of explicit points must
reproduce kmeans(X) exactly, partition for partition; the tests lean on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Partition, WeightedGraph
from .linalg import KernelMatrix, spectral_embedding

__all__ = [
    "KMeansResult",
    "PartitionStats",
    "kmeans",
    "kernel_kmeans",
    "spectral_clustering",
    "kernel_distance_sq",
    "q_modularity",
    "partition_stats",
]

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True, eq=False)
class KMeansResult:
    """Best-of-restarts clustering outcome.

    ``centers`` is None for the kernel variant, where cluster means exist only
    implicitly as uniform convex combinations of member feature vectors.
    ``energy_trace`` holds the winning restart's within-cluster energy after
    each Lloyd iteration; ``within_energy`` is its final entry.
    """

    partition: Partition
    centers: np.ndarray | None
    within_energy: float
    energy_trace: np.ndarray
    restarts_used: int
    iterations: int

    def __post_init__(self):
        trace = np.array(self.energy_trace, dtype=np.float64)
        trace.setflags(write=False)
        object.__setattr__(self, "energy_trace", trace)
        if self.centers is not None:
            c = np.array(self.centers, dtype=np.float64)
            c.setflags(write=False)
            object.__setattr__(self, "centers", c)


@dataclass(frozen=True)
class PartitionStats:
    """Size distribution and quality score of a partition.

    Only nonempty clusters are counted. ``q_modularity`` is NaN when the graph
    has no edges (the score is undefined there).
    """

    q_modularity: float
    num_clusters: int
    num_singletons: int
    max_size: int
    median_size: float
    third_quartile_size: float


def _spawned_rngs(seed: int, restarts: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.default_rng(c) for c in children]


def _choose_weighted(rng: np.random.Generator, d2_min: np.ndarray) -> int:
    """Pick an index with probability proportional to d2_min.

    Consumes exactly one uniform draw regardless of branch, so the explicit
    and kernel variants stay on identical RNG streams.
    """
    n = d2_min.size
    u = float(rng.random())
    total = float(d2_min.sum())
    if total > 0.0:
        cum = np.cumsum(d2_min)
        idx = int(np.searchsorted(cum, u * total, side="right"))
        return min(idx, n - 1)
    return min(int(u * n), n - 1)


def _repair_empty(assign: np.ndarray, dist2: np.ndarray, k: int) -> np.ndarray:
    """Give each empty cluster the worst-placed point from a donor of size >= 2.

    Empty clusters are filled in ascending id order; the seized point is the
    eligible one farthest from its current center (ties to lowest index).
    """
    counts = np.bincount(assign, minlength=k)
    empties = np.flatnonzero(counts == 0)
    if empties.size == 0:
        return assign
    assign = assign.copy()
    own = dist2[np.arange(assign.size), assign].copy()
    for c in empties:
        eligible = counts[assign] >= 2
        scores = np.where(eligible, own, -np.inf)
        i = int(np.argmax(scores))
        counts[assign[i]] -= 1
        assign[i] = c
        counts[c] = 1
        own[i] = -np.inf
    return assign


def _onehot(assign: np.ndarray, k: int) -> np.ndarray:
    z = np.zeros((assign.size, k), dtype=np.float64)
    z[np.arange(assign.size), assign] = 1.0
    return z


def _kmeans_single(points: np.ndarray, k: int, rng: np.random.Generator):
    n = points.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2_min = ((points - points[first]) ** 2).sum(axis=1)
    for _ in range(1, k):
        c = _choose_weighted(rng, d2_min)
        chosen.append(c)
        d2_min = np.minimum(d2_min, ((points - points[c]) ** 2).sum(axis=1))

    centers = points[chosen].copy()
    assign = None
    trace = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        diff = points[:, None, :] - centers[None, :, :]
        dist2 = np.einsum("ncp,ncp->nc", diff, diff)
        new_assign = _repair_empty(np.argmin(dist2, axis=1), dist2, k)
        if assign is not None and (new_assign == assign).all():
            break
        assign = new_assign
        counts = np.bincount(assign, minlength=k).astype(np.float64)
        centers = (_onehot(assign, k).T @ points) / counts[:, None]
        trace.append(float(((points - centers[assign]) ** 2).sum()))
    return assign, centers, np.array(trace)


def _kernel_kmeans_single(kmat: np.ndarray, k: int, rng: np.random.Generator):
    n = kmat.shape[0]
    diag = np.diagonal(kmat)
    first = int(rng.integers(n))
    chosen = [first]
    d2_min = np.maximum(diag - 2.0 * kmat[:, first] + diag[first], 0.0)
    for _ in range(1, k):
        c = _choose_weighted(rng, d2_min)
        chosen.append(c)
        d2_min = np.minimum(d2_min,
                            np.maximum(diag - 2.0 * kmat[:, c] + diag[c], 0.0))

    # distances to the seed points stand in for the first center distances
    dist2 = diag[:, None] - 2.0 * kmat[:, chosen] + diag[np.asarray(chosen)][None, :]
    np.maximum(dist2, 0.0, out=dist2)
    assign = None
    trace = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        new_assign = _repair_empty(np.argmin(dist2, axis=1), dist2, k)
        if assign is not None and (new_assign == assign).all():
            break
        assign = new_assign
        counts = np.bincount(assign, minlength=k).astype(np.float64)
        member_mean = kmat @ (_onehot(assign, k) / counts[None, :])
        center_sq = (_onehot(assign, k) * member_mean).sum(axis=0) / counts
        dist2 = diag[:, None] - 2.0 * member_mean + center_sq[None, :]
        np.maximum(dist2, 0.0, out=dist2)
        trace.append(float(dist2[np.arange(n), assign].sum()))
    return assign, np.array(trace)


def _validate_k(k: int, n: int, restarts: int):
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")


def kmeans(points, k: int, seed: int, restarts: int = 10) -> KMeansResult:
    """Best-of-restarts Lloyd k-means with probabilistic far-point seeding.

    Each restart seeds centers k-means++ style, then alternates assignment
    (ties to the lowest center index, empty clusters repaired by seizing the
    farthest point from a donor of size >= 2) and mean updates until the
    assignment stops changing or 300 iterations pass. The minimum-energy
    restart wins; earlier restarts win ties.
    """
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError(f"points must be a nonempty n x p array, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    _validate_k(k, pts.shape[0], restarts)

    best = None
    for rng in _spawned_rngs(seed, restarts):
        assign, centers, trace = _kmeans_single(pts, k, rng)
        if best is None or trace[-1] < best[2][-1]:
            best = (assign, centers, trace)
    assign, centers, trace = best
    partition = Partition(assign, k, "kmeans",
                          {"k": k, "seed": seed, "restarts": restarts})
    return KMeansResult(partition, centers, float(trace[-1]), trace,
                        restarts, int(trace.size))


def kernel_kmeans(kernel, k: int, seed: int, restarts: int = 10) -> KMeansResult:
    """Lloyd k-means carried out entirely through a kernel matrix.

    Cluster means are implicit (uniform coefficients over members); squared
    distances come from the kernel expansion and are clamped at 0. Seeding,
    tie-breaking, repair, caps, and restart policy are identical to
    :func:`kmeans`, draw for draw.
    """
    kern = kernel if isinstance(kernel, KernelMatrix) else KernelMatrix(kernel)
    kmat = kern.matrix
    _validate_k(k, kmat.shape[0], restarts)

    best = None
    for rng in _spawned_rngs(seed, restarts):
        assign, trace = _kernel_kmeans_single(kmat, k, rng)
        if best is None or trace[-1] < best[1][-1]:
            best = (assign, trace)
    assign, trace = best
    params = {"k": k, "seed": seed, "restarts": restarts}
    if kern.beta is not None:
        params["beta"] = kern.beta
    partition = Partition(assign, k, "kernel-kmeans", params)
    return KMeansResult(partition, None, float(trace[-1]), trace,
                        restarts, int(trace.size))


def spectral_clustering(g: WeightedGraph, p: int, k: int, seed: int,
                        restarts: int = 10) -> KMeansResult:
    """k-means on the rows of the p lowest-eigenvalue Laplacian eigenvectors."""
    coords = spectral_embedding(g.laplacian(), p)
    result = kmeans(coords, k, seed, restarts)
    partition = Partition(result.partition.assignment, k, "spectral",
                          {"p": p, "k": k, "seed": seed, "restarts": restarts})
    return KMeansResult(partition, result.centers, result.within_energy,
                        result.energy_trace, result.restarts_used,
                        result.iterations)


def kernel_distance_sq(kernel, j: int, coeffs: Sequence[float]) -> float:
    """Squared feature-space distance from point j to a convex combination.

    The combination sum_i coeffs_i phi(x_i) is never materialized; the
    distance expands through kernel entries alone:
    K_jj - 2 sum_i coeffs_i K_ij + sum_{i,i'} coeffs_i coeffs_i' K_ii'.
    """
    kmat = kernel.matrix if isinstance(kernel, KernelMatrix) else np.asarray(kernel)
    n = kmat.shape[0]
    if not 0 <= j < n:
        raise ValueError(f"vertex index {j} out of range 0..{n - 1}")
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (n,):
        raise ValueError(f"coeffs must have length {n}, got shape {c.shape}")
    if (c < 0).any():
        raise ValueError("coeffs must be nonnegative")
    if abs(float(c.sum()) - 1.0) > 1e-12:
        raise ValueError(f"coeffs must sum to 1, got {float(c.sum())!r}")
    d2 = float(kmat[j, j] - 2.0 * (c @ kmat[:, j]) + c @ kmat @ c)
    return max(d2, 0.0)


def _cluster_weight_blocks(g: WeightedGraph, p: Partition,
                           weighted: bool) -> np.ndarray:
    w = g.weights if weighted else (g.weights > 0).astype(np.float64)
    z = _onehot(p.assignment, p.k)
    return z.T @ w @ z


def q_modularity(g: WeightedGraph, p: Partition, *, weighted: bool = True) -> float:
    """Partition quality: observed within-cluster weight minus the random expectation.

    For each cluster, take the fraction of total weight that falls inside it
    and subtract the squared fraction of weight touching it; sum over
    clusters. 0 for the trivial one-cluster partition, at most 1, negative
    when clusters cut more weight than they keep. With ``weighted=False``
    every edge counts 1 regardless of weight.
    """
    if p.num_vertices != g.num_vertices:
        raise ValueError(f"partition covers {p.num_vertices} vertices, "
                         f"graph has {g.num_vertices}")
    block = _cluster_weight_blocks(g, p, weighted)
    double_total = float(block.sum())  # every edge counted twice
    if double_total <= 0.0:
        raise ValueError("q-modularity is undefined for an edgeless graph")
    within = np.diagonal(block) / double_total
    touching = block.sum(axis=1) / double_total
    return float((within - touching ** 2).sum())


def partition_stats(g: WeightedGraph, p: Partition) -> PartitionStats:
    """Size distribution over nonempty clusters, plus the q-modularity score.

    Median and third quartile use linear interpolation on the sorted sizes.
    An edgeless graph gets NaN for q-modularity instead of an error.
    """
    if p.num_vertices != g.num_vertices:
        raise ValueError(f"partition covers {p.num_vertices} vertices, "
                         f"graph has {g.num_vertices}")
    sizes = p.sizes()
    sizes = sizes[sizes > 0]
    if g.total_weight > 0:
        q = q_modularity(g, p)
    else:
        q = float("nan")
    return PartitionStats(
        q_modularity=q,
        num_clusters=int(sizes.size),
        num_singletons=int((sizes == 1).sum()),
        max_size=int(sizes.max()),
        median_size=float(np.percentile(sizes, 50)),
        third_quartile_size=float(np.percentile(sizes, 75)),
    )
