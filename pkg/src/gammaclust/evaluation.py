"""Clustering quality indices and the K-means comparator.

BHI averages, over clusters, the fraction of same-category pairs inside each
cluster; singleton clusters contribute 0 to the average but still count in
K. CH is the between/within dispersion ratio normalized by degrees of
freedom. The gap statistic compares log within-dispersion against its
average under uniform draws from the data's per-feature bounding box, and
the selection rule is a plain argmax.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DataSet, DegenerateK, Partition

__all__ = [
    "LabeledPartition",
    "bhi",
    "ch_index",
    "within_ss",
    "gap_statistic",
    "kmeans",
    "kmeans_select_ch",
    "kmeans_select_gap",
]


@dataclass(frozen=True, eq=False)
class LabeledPartition:
    """A predicted partition paired with ground-truth category identifiers."""

    predicted: Partition
    truth: tuple

    def __post_init__(self) -> None:
        truth = tuple(self.truth)
        if len(truth) != self.predicted.n:
            raise ValueError("one truth category per observation is required")
        object.__setattr__(self, "truth", truth)


def bhi(lp: LabeledPartition) -> float:
    """Homogeneity index in [0, 1]; 1 means every cluster is category-pure.

    (1/K) sum_k [1 / (n_k (n_k - 1))] sum_{i != j in C_k} 1(B_i = B_j).
    Invariant under relabeling of clusters and of categories.
    """
    labels = lp.predicted.labels
    k = lp.predicted.k
    categories = {c: i for i, c in enumerate(dict.fromkeys(lp.truth))}
    truth_idx = np.array([categories[c] for c in lp.truth])
    total = 0.0
    for j in range(k):
        members = truth_idx[labels == j]
        n_k = members.size
        if n_k <= 1:
            continue
        same = sum(int(c * (c - 1)) for c in np.bincount(members))
        total += same / (n_k * (n_k - 1))
    return total / k


def _centroid_ss(x: np.ndarray, labels: np.ndarray, k: int) -> tuple[float, float]:
    """Within- and between-cluster sums of squares about centroids."""
    grand = x.mean(axis=0)
    within = 0.0
    between = 0.0
    for j in range(k):
        members = x[labels == j]
        if members.size == 0:
            continue
        centroid = members.mean(axis=0)
        within += float(((members - centroid) ** 2).sum())
        between += members.shape[0] * float(((centroid - grand) ** 2).sum())
    return within, between


def within_ss(data: DataSet, partition: Partition) -> float:
    """Within-cluster sum of squares about cluster centroids."""
    w, _ = _centroid_ss(data.x, partition.labels, partition.k)
    return w


def ch_index(data: DataSet, partition: Partition) -> float:
    """Dispersion ratio (B/(k-1)) / (W/(n-k)).

    Requires 2 <= k <= n-1. A zero within-scatter (perfect separation)
    returns +inf; report writers render it as the PerfectSeparation sentinel.
    """
    k, n = partition.k, data.n
    if k < 2 or k >= n:
        raise DegenerateK(f"CH needs 2 <= k <= n-1, got k={k}, n={n}")
    w, b = _centroid_ss(data.x, partition.labels, k)
    if w == 0.0:
        return float("inf")
    return (b / (k - 1)) / (w / (n - k))


def kmeans(
    data: DataSet, k: int, restarts: int = 4, seed: int = 0
) -> tuple[np.ndarray, Partition]:
    """Lloyd iterations to a local optimum of the within-cluster SS.

    Each restart seeds greedily: a random data row first, then repeatedly
    the row farthest from the chosen centers. Empty clusters are repaired by
    reseeding to the point farthest from its assigned center. Returns the
    best centers and labels over ``restarts`` runs; deterministic given seed.
    """
    if not 1 <= k <= data.n:
        raise ValueError(f"k must lie in [1, n], got k={k}, n={data.n}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    x = data.x
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        centers = _farthest_first_seed(x, k, rng)
        centers, labels, trace = _lloyd(x, centers, k)
        if best is None or trace[-1] < best[0]:
            best = (trace[-1], centers, labels)
    assert best is not None
    return best[1], Partition(best[2], k)


def _lloyd(
    x: np.ndarray, centers: np.ndarray, k: int, max_iter: int = 300
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Assign/update iterations from the given centers until labels settle.

    Returns the final centers and labels plus the within-SS after each full
    iteration; the trace is non-increasing (reseeding an empty cluster to a
    costly point also lowers the objective).
    """
    labels: np.ndarray | None = None
    trace: list[float] = []
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        new_labels = _repair_empty(new_labels, d2, k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = x[labels == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)
        trace.append(float(((x - centers[labels]) ** 2).sum()))
    assert labels is not None
    return centers, labels, trace


def _repair_empty(labels: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    """Reseed each empty cluster with the costliest point of a non-singleton one."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        costs = d2[np.arange(labels.size), labels]
        costs = np.where(counts[labels] >= 2, costs, -np.inf)
        far = int(np.argmax(costs))
        if not np.isfinite(costs[far]):
            break
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] += 1
    return labels


def _farthest_first_seed(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy farthest-first seeding with a random first pick."""
    chosen = [int(rng.integers(x.shape[0]))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _gap_curve(
    data: DataSet, ks: list[int], b_refs: int, seed: int, restarts: int
) -> tuple[dict[int, float], dict[int, float]]:
    """Gap values and their reference standard errors per candidate k."""
    rng = np.random.default_rng(seed)
    log_w_data = {}
    for k in ks:
        _, part = kmeans(data, k, restarts=restarts, seed=int(rng.integers(2**31)))
        log_w_data[k] = np.log(within_ss(data, part))
    lo = data.x.min(axis=0)
    hi = data.x.max(axis=0)
    ref_log_w: dict[int, list[float]] = {k: [] for k in ks}
    for _ in range(b_refs):
        ref = DataSet(lo + rng.random((data.n, data.p)) * (hi - lo))
        for k in ks:
            _, part = kmeans(ref, k, restarts=restarts, seed=int(rng.integers(2**31)))
            ref_log_w[k].append(np.log(within_ss(ref, part)))
    gaps = {k: float(np.mean(ref_log_w[k]) - log_w_data[k]) for k in ks}
    # s_k = sd_b(log W_ref) * sqrt(1 + 1/B): reference noise inflated for the
    # Monte Carlo error of the mean, as in the published selection rule.
    ses = {
        k: float(np.std(ref_log_w[k]) * np.sqrt(1.0 + 1.0 / b_refs)) for k in ks
    }
    return gaps, ses


def gap_statistic(
    data: DataSet,
    k_range: Sequence[int],
    b_refs: int = 20,
    seed: int = 0,
    restarts: int = 4,
) -> dict[int, float]:
    """Gap(k) = mean_b log W_k(reference_b) - log W_k(data) per k.

    References are uniform draws over the per-feature bounding box of the
    data, clustered by the same K-means routine. Deterministic given seed.
    """
    ks = [int(k) for k in k_range]
    if not ks or min(ks) < 1 or max(ks) >= data.n:
        raise ValueError("k_range must lie within [1, n-1]")
    if b_refs < 1:
        raise ValueError("b_refs must be at least 1")
    gaps, _ = _gap_curve(data, ks, b_refs, seed, restarts)
    return gaps


def kmeans_select_ch(
    data: DataSet, k_range: Sequence[int], restarts: int = 4, seed: int = 0
) -> tuple[int, Partition, dict[int, float]]:
    """Pick the k maximizing CH; returns the winning k, its labels, the curve."""
    ks = [k for k in k_range if k >= 2]
    if not ks:
        raise DegenerateK("CH selection needs candidate k >= 2")
    scores: dict[int, float] = {}
    partitions: dict[int, Partition] = {}
    for k in ks:
        _, part = kmeans(data, k, restarts=restarts, seed=seed)
        partitions[k] = part
        scores[k] = ch_index(data, part)
    best = max(ks, key=lambda k: scores[k])
    return best, partitions[best], scores


def kmeans_select_gap(
    data: DataSet,
    k_range: Sequence[int],
    b_refs: int = 20,
    restarts: int = 4,
    seed: int = 0,
    rule: str = "one_se",
) -> tuple[int, Partition, dict[int, float]]:
    """Pick a k from the gap curve; returns k, its labels, and the curve.

    The default rule is the published one-standard-error criterion: the
    smallest k with Gap(k) >= Gap(k+1) - s(k+1), where s is the reference
    Monte-Carlo error. ``rule="argmax"`` takes the global maximizer instead.
    """
    ks = sorted(int(k) for k in k_range)
    if not ks or min(ks) < 1 or max(ks) >= data.n:
        raise ValueError("k_range must lie within [1, n-1]")
    gaps, ses = _gap_curve(data, ks, b_refs, seed, restarts)
    if rule == "argmax":
        best = max(ks, key=lambda k: gaps[k])
    elif rule == "one_se":
        best = ks[-1]
        for a, b in zip(ks, ks[1:]):
            if gaps[a] >= gaps[b] - ses[b]:
                best = a
                break
    else:
        raise ValueError(f"unknown selection rule {rule!r}")
    _, part = kmeans(data, best, restarts=restarts, seed=seed)
    return best, part, gaps
