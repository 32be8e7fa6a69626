"""Cluster characterization: per-predictor t-tests and test-direction calls.

Each cluster is compared against the rest of the sample on every model
predictor. Significant deviations, read against the salary model's
coefficient signs, decide whether the cluster is hunted for undervalued
players, overvalued players, or both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

TEST_UNDERVALUED = "TEST_UNDERVALUED"
TEST_OVERVALUED = "TEST_OVERVALUED"
TEST_BOTH = "TEST_BOTH"


@dataclass(frozen=True)
class TTestResult:
    t_value: float
    p_value: float
    dof: float
    degenerate: bool = False


def welch_t_test(x, y) -> TTestResult:
    """Two-sample Welch t-test with Satterthwaite degrees of freedom.

    Zero variance in both samples degenerates to p = 1 for equal means and a
    flagged p = 0 for unequal means.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = x.size, y.size
    if n1 < 2 or n2 < 2:
        raise ValueError("both samples need at least two observations")
    m1, m2 = x.mean(), y.mean()
    v1, v2 = x.var(ddof=1), y.var(ddof=1)
    q1, q2 = v1 / n1, v2 / n2
    if q1 + q2 == 0.0:
        if m1 == m2:
            return TTestResult(t_value=0.0, p_value=1.0, dof=float(n1 + n2 - 2))
        return TTestResult(
            t_value=math.copysign(math.inf, m1 - m2), p_value=0.0, dof=float(n1 + n2 - 2), degenerate=True
        )
    t = (m1 - m2) / math.sqrt(q1 + q2)
    dof = (q1 + q2) ** 2 / (q1**2 / (n1 - 1) + q2**2 / (n2 - 1))
    p = 2.0 * float(stats.t.sf(abs(t), dof))
    return TTestResult(t_value=float(t), p_value=p, dof=float(dof))


def one_sample_t_test(x, mu: float) -> TTestResult:
    """One-sample t-test of a cluster's values against a fixed population mean."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("sample needs at least two observations")
    m = x.mean()
    sd = x.std(ddof=1)
    if sd == 0.0:
        if m == mu:
            return TTestResult(t_value=0.0, p_value=1.0, dof=float(n - 1))
        return TTestResult(t_value=math.copysign(math.inf, m - mu), p_value=0.0, dof=float(n - 1), degenerate=True)
    t = (m - mu) / (sd / math.sqrt(n))
    p = 2.0 * float(stats.t.sf(abs(t), n - 1))
    return TTestResult(t_value=float(t), p_value=p, dof=float(n - 1))


@dataclass(frozen=True)
class PredictorStat:
    name: str
    cluster_mean: float
    overall_mean: float
    t_value: float
    p_value: float
    significant: bool
    degenerate: bool = False


@dataclass(frozen=True)
class ClusterProfile:
    cluster: int
    size: int
    stats: tuple[PredictorStat, ...]
    direction: str
    narrative: str


def cluster_t_tests(
    X: np.ndarray,
    names: tuple[str, ...] | list[str],
    assignments: np.ndarray,
    *,
    mode: str = "two_sample",
    significance: float = 0.01,
) -> dict[int, list[PredictorStat]]:
    """Per-cluster, per-predictor deviation tests against the rest of the sample.

    "two_sample" runs Welch cluster-vs-complement; "one_sample" tests the
    cluster against the full-sample mean. Reported means are always the
    cluster mean and the full-sample mean.
    """
    X = np.asarray(X, dtype=float)
    assignments = np.asarray(assignments, dtype=int)
    if mode not in ("two_sample", "one_sample"):
        raise ValueError(f"unknown t-test mode {mode!r}")
    names = tuple(names)
    overall_means = X.mean(axis=0)
    out: dict[int, list[PredictorStat]] = {}
    for cluster in sorted(np.unique(assignments)):
        mask = assignments == cluster
        if mask.sum() < 2 or (~mask).sum() < 2:
            raise ValueError(f"cluster {cluster} or its complement has fewer than two members")
        rows = []
        for j, name in enumerate(names):
            inside = X[mask, j]
            if mode == "two_sample":
                res = welch_t_test(inside, X[~mask, j])
            else:
                res = one_sample_t_test(inside, float(overall_means[j]))
            rows.append(
                PredictorStat(
                    name=name,
                    cluster_mean=float(inside.mean()),
                    overall_mean=float(overall_means[j]),
                    t_value=res.t_value,
                    p_value=res.p_value,
                    significant=res.p_value < significance,
                    degenerate=res.degenerate,
                )
            )
        out[int(cluster)] = rows
    return out


def assign_direction(stats_rows: list[PredictorStat], coefficients: dict[str, float]) -> str:
    """Decide which salary tail to test for a cluster.

    For each significant predictor, d = sign(coefficient) * sign(cluster mean
    minus overall mean). All d = +1 means the cluster merits high pay, so the
    lower tail is hunted (undervalued); all d = -1 the reverse; anything mixed
    or nothing significant tests both tails.
    """
    directions = set()
    for row in stats_rows:
        if not row.significant:
            continue
        if row.name not in coefficients:
            raise KeyError(f"significant predictor {row.name!r} missing from the pricing model")
        d = math.copysign(1.0, coefficients[row.name]) * math.copysign(1.0, row.cluster_mean - row.overall_mean)
        if row.cluster_mean == row.overall_mean or coefficients[row.name] == 0.0:
            d = 0.0
        directions.add(d)
    if directions == {1.0}:
        return TEST_UNDERVALUED
    if directions == {-1.0}:
        return TEST_OVERVALUED
    return TEST_BOTH


# (phrase when below the sample mean, phrase when above it)
_PHRASES: dict[str, tuple[str, str]] = {
    "age": ("are younger than average", "are older than average"),
    "experience": ("have less experience", "have more experience"),
    "draft_round": ("were early draft selections", "were late draft selections"),
    "draft_pick": ("were early draft selections", "were late draft selections"),
    "pro_bowls": ("have fewer Pro Bowl selections", "have more Pro Bowl selections"),
    "ap_all_pro_1st": ("have fewer AP first-team All-Pro selections", "have more AP first-team All-Pro selections"),
    "ap_all_pro_2nd": ("have fewer AP second-team All-Pro selections", "have more AP second-team All-Pro selections"),
    "pfw_all_pro": ("have fewer PFW All-Pro selections", "have more PFW All-Pro selections"),
    "pff_prior_avg": (
        "had below average film grades prior to their contract being signed",
        "had above average film grades prior to their contract being signed",
    ),
    "pff_current": ("had below average film grades this season", "had above average film grades this season"),
    "stuff_pct_diff": ("have above average run blocking abilities", "have below average run blocking abilities"),
    "yds_per_attempt_diff": ("have below average run blocking abilities", "have above average run blocking abilities"),
    "yac_per_attempt_diff": (
        "gave their backs below average room after contact",
        "gave their backs above average room after contact",
    ),
    "ybc_per_attempt_diff": (
        "opened below average room before contact",
        "opened above average room before contact",
    ),
    "successful_run_pct_diff": (
        "have below average success-rate blocking",
        "have above average success-rate blocking",
    ),
    "rush_td_per_attempt_diff": (
        "cleared below average touchdown lanes",
        "cleared above average touchdown lanes",
    ),
    "pressure_allowed_diff": ("allowed fewer pressures than average", "allowed more pressures than average"),
    "pressure_pct": ("allowed a below average share of pressures", "allowed an above average share of pressures"),
    "sack_pct": ("allowed a below average share of sacks", "allowed an above average share of sacks"),
    "att_per_dropback": (
        "played behind below average pass volume",
        "played behind above average pass volume",
    ),
}


def narrative_for(stats_rows: list[PredictorStat]) -> str:
    """Template sentence describing a cluster's significant deviations."""
    parts = []
    for row in stats_rows:
        if not row.significant:
            continue
        low, high = _PHRASES.get(
            row.name, (f"have below average {row.name}", f"have above average {row.name}")
        )
        parts.append(high if row.cluster_mean > row.overall_mean else low)
    if not parts:
        return "Players without significant deviations from the sample averages"
    if len(parts) == 1:
        body = parts[0]
    else:
        body = ", ".join(parts[:-1]) + (", and " if len(parts) > 2 else " and ") + parts[-1]
    return f"Players who {body}"


def profile_clusters(
    X: np.ndarray,
    names: tuple[str, ...] | list[str],
    assignments: np.ndarray,
    coefficients: dict[str, float],
    *,
    mode: str = "two_sample",
    significance: float = 0.01,
) -> list[ClusterProfile]:
    """Full characterization of every cluster: stats, direction, narrative."""
    assignments = np.asarray(assignments, dtype=int)
    tests = cluster_t_tests(X, names, assignments, mode=mode, significance=significance)
    profiles = []
    for cluster, rows in sorted(tests.items()):
        profiles.append(
            ClusterProfile(
                cluster=cluster,
                size=int((assignments == cluster).sum()),
                stats=tuple(rows),
                direction=assign_direction(rows, coefficients),
                narrative=narrative_for(rows),
            )
        )
    return profiles
