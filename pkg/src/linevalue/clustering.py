"""Standardization, k-means, cluster-count selection, and silhouettes.

k-means is Lloyd's algorithm with D^2-weighted seeding and restarts. Seeding
draws from a canonically sorted copy of the data, so the same seed yields the
same geometric solution no matter how input rows are ordered; permuting rows
therefore permutes the assignments identically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardization:
    """Per-attribute (mean, sample sd) used to z-score the feature matrix."""

    names: tuple[str, ...]
    means: np.ndarray
    sds: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.sds


def standardize(X: np.ndarray, names: tuple[str, ...] | None = None) -> tuple[np.ndarray, Standardization]:
    """Center and scale each column to mean 0, sample sd 1 (n-1 denominator)."""
    X = np.asarray(X, dtype=float)
    if names is None:
        names = tuple(f"x{j}" for j in range(X.shape[1]))
    means = X.mean(axis=0)
    sds = X.std(axis=0, ddof=1)
    zero = np.where(sds == 0)[0]
    if zero.size:
        bad = ", ".join(names[j] for j in zero)
        raise ValueError(f"constant column(s) cannot be standardized: {bad}")
    Z = (X - means) / sds
    return Z, Standardization(names=tuple(names), means=means, sds=sds)


@dataclass(frozen=True)
class ClusterSolution:
    k: int
    assignments: np.ndarray  # row -> cluster index
    centroids: np.ndarray  # k x m, standardized space
    within_ss: float
    seed: int
    restarts: int
    iterations: int
    objective_history: tuple[float, ...]  # winning restart, one entry per Lloyd iteration


def _canonical_min(points: np.ndarray, candidates: np.ndarray) -> int:
    """Index (among candidates) of the lexicographically smallest point."""
    best = candidates[0]
    for idx in candidates[1:]:
        for a, b in zip(points[idx], points[best]):
            if a < b:
                best = idx
                break
            if a > b:
                break
    return int(best)


def _init_plusplus(P: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding over canonically sorted points P."""
    n = P.shape[0]
    centroids = np.empty((k, P.shape[1]))
    centroids[0] = P[rng.integers(n)]
    d2 = ((P - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:  # duplicates exhausted the distinct points
            centroids[j] = P[rng.integers(n)]
            continue
        idx = rng.choice(n, p=d2 / total)
        centroids[j] = P[idx]
        d2 = np.minimum(d2, ((P - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(Z: np.ndarray, centroids: np.ndarray, max_iter: int = 300) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    n, _ = Z.shape
    k = centroids.shape[0]
    assignments = np.full(n, -1, dtype=int)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = ((Z[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)

        # Repair empty clusters: move the worst-fit point into each vacancy.
        counts = np.bincount(new_assign, minlength=k)
        for empty in np.where(counts == 0)[0]:
            dist_own = d2[np.arange(n), new_assign]
            worst = dist_own.max()
            candidates = np.where(dist_own == worst)[0]
            mover = _canonical_min(Z, candidates)
            new_assign[mover] = empty
            d2[mover, :] = np.inf  # keep a later vacancy from stealing the same point
            d2[mover, empty] = 0.0
            counts = np.bincount(new_assign, minlength=k)

        for j in range(k):
            members = Z[new_assign == j]
            centroids[j] = members.mean(axis=0)

        within = float(((Z - centroids[new_assign]) ** 2).sum())
        history.append(within)
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
    within_ss = float(((Z - centroids[assignments]) ** 2).sum())
    return assignments, centroids, within_ss, history


def kmeans(Z: np.ndarray, k: int, seed: int = 0, restarts: int = 50) -> ClusterSolution:
    """Best-of-restarts k-means on standardized data.

    Deterministic given (seed, restarts): restarts run off independent spawned
    substreams and the lowest within-cluster SS wins, first restart breaking
    ties. Raises for k outside [1, n].
    """
    Z = np.ascontiguousarray(Z, dtype=float)
    n = Z.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")

    order = np.lexsort(Z.T[::-1])
    P = Z[order]

    best: tuple[np.ndarray, np.ndarray, float, list[float]] | None = None
    children = np.random.SeedSequence(seed).spawn(restarts)
    for child in children:
        rng = np.random.default_rng(child)
        centroids = _init_plusplus(P, k, rng)
        result = _lloyd(Z, centroids)
        if best is None or result[2] < best[2]:
            best = result
    assert best is not None
    assignments, centroids, within_ss, history = best
    return ClusterSolution(
        k=k,
        assignments=assignments,
        centroids=centroids,
        within_ss=within_ss,
        seed=seed,
        restarts=restarts,
        iterations=len(history),
        objective_history=tuple(history),
    )


def within_ss_sweep(Z: np.ndarray, k_values, seed: int = 0, restarts: int = 50) -> dict[int, float]:
    return {k: kmeans(Z, k, seed=seed, restarts=restarts).within_ss for k in k_values}


@dataclass(frozen=True)
class KLCurve:
    """Cluster-count selection curve built from within-cluster sums of squares."""

    m: int
    within_ss_by_k: dict[int, float]
    diff_by_k: dict[int, float]
    c_by_k: dict[int, float]


def kl_curve(within_ss_by_k: dict[int, float], m: int) -> KLCurve:
    """DIFF(k) = (k-1)^(2/m) * WSS(k-1) - k^(2/m) * WSS(k); C_k = |DIFF(k)/DIFF(k+1)|.

    DIFF starts at k = 2; C_k is recorded only where DIFF(k+1) is defined and
    nonzero (never as an infinity).
    """
    if m <= 0:
        raise ValueError("attribute count m must be positive")
    wss = {int(k): float(v) for k, v in within_ss_by_k.items()}
    exponent = 2.0 / m
    diff: dict[int, float] = {}
    for k in sorted(wss):
        if k >= 2 and (k - 1) in wss:
            diff[k] = (k - 1) ** exponent * wss[k - 1] - k**exponent * wss[k]
    c: dict[int, float] = {}
    for k in sorted(diff):
        nxt = diff.get(k + 1)
        if nxt is not None and nxt != 0.0:
            c[k] = abs(diff[k] / nxt)
    return KLCurve(m=m, within_ss_by_k=wss, diff_by_k=diff, c_by_k=c)


@dataclass(frozen=True)
class KSelection:
    k_star: int
    candidates: tuple[int, ...]
    fallback: bool  # True when no interior local maximum existed


def select_k(curve: KLCurve, rho: float = 0.8) -> KSelection:
    """Pick the cluster count from the curve's local maxima.

    Candidates are interior local maxima of C_k; the chosen k* is the smallest
    candidate whose C value is within factor rho of the best candidate's.
    Without any local maximum the global argmax is returned with a warning.
    """
    c = curve.c_by_k
    ks = sorted(c)
    if len(ks) < 3:
        raise ValueError("need C_k defined for at least three consecutive k values")
    candidates = [
        k
        for k in ks[1:-1]
        if (k - 1) in c and (k + 1) in c and c[k] > c[k - 1] and c[k] > c[k + 1]
    ]
    if not candidates:
        k_star = min(ks, key=lambda k: (-c[k], k))
        warnings.warn("no interior local maximum in the cluster-count curve; using global argmax", stacklevel=2)
        return KSelection(k_star=k_star, candidates=(), fallback=True)
    best_c = max(c[k] for k in candidates)
    k_star = min(k for k in candidates if c[k] >= rho * best_c)
    return KSelection(k_star=k_star, candidates=tuple(candidates), fallback=False)


@dataclass(frozen=True)
class SilhouetteSet:
    s: np.ndarray  # per-row silhouette in [-1, 1]
    sample_mean: float


def silhouettes(Z: np.ndarray, assignments: np.ndarray) -> SilhouetteSet:
    """Silhouette value per row: (b - a) / max(a, b).

    a is the mean distance to own-cluster co-members, b the smallest mean
    distance to another cluster. Singleton-cluster points score 0 by
    convention. Requires at least two clusters.
    """
    Z = np.asarray(Z, dtype=float)
    assignments = np.asarray(assignments, dtype=int)
    labels = np.unique(assignments)
    if labels.size < 2:
        raise ValueError("silhouettes require at least two clusters")
    n = Z.shape[0]
    dist = np.sqrt(np.maximum(((Z[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2), 0.0))

    s = np.zeros(n)
    members = {lab: np.where(assignments == lab)[0] for lab in labels}
    for i in range(n):
        own = members[assignments[i]]
        if own.size == 1:
            s[i] = 0.0
            continue
        a = dist[i, own].sum() / (own.size - 1)
        b = min(dist[i, members[lab]].mean() for lab in labels if lab != assignments[i])
        denom = max(a, b)
        s[i] = 0.0 if denom == 0 else (b - a) / denom
    return SilhouetteSet(s=s, sample_mean=float(s.mean()))
