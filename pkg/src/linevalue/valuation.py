"""Tail-probability identification of mispriced players, with silhouette gate.

Cluster members whose adjusted salary falls in the tested tail of the
cluster's fitted salary distribution become candidates; only candidates at
least as well-clustered as the sample average silhouette survive the gate.
A rank-comparison validator cross-checks findings against film-grade and
salary orderings within position groups.
"""

from __future__ import annotations

from dataclasses import dataclass

from .profiling import TEST_BOTH, TEST_OVERVALUED, TEST_UNDERVALUED
from .salary_dist import FittedSalaryDistribution

UPPER = "UPPER"
LOWER = "LOWER"
OVERVALUED = "OVERVALUED"
UNDERVALUED = "UNDERVALUED"

POSITION_GROUPS = {"LT": "T", "RT": "T", "LG": "G", "RG": "G", "C": "C"}


def tail_probability(dist: FittedSalaryDistribution, salary: float, tail: str) -> float:
    """P(X >= salary) for the UPPER tail, P(X <= salary) for the LOWER tail."""
    if tail not in (UPPER, LOWER):
        raise ValueError(f"tail must be UPPER or LOWER, got {tail!r}")
    if salary < dist.lower:
        raise ValueError(f"salary {salary!r} is below the distribution's lower bound {dist.lower!r}")
    f = float(dist.cdf(salary))
    return 1.0 - f if tail == UPPER else f


@dataclass(frozen=True)
class ClusterMember:
    player_id: str
    season_year: int
    team: str
    position: str
    cap_value_nominal: float
    cap_value_adjusted: float
    silhouette: float


@dataclass(frozen=True)
class ValuationFinding:
    player_id: str
    season_year: int
    team: str
    position: str
    cap_value_nominal: float
    cluster: int
    verdict: str
    tail_probability: float
    silhouette: float
    gate_passed: bool


@dataclass(frozen=True)
class IdentificationResult:
    cluster: int
    candidates: tuple[ValuationFinding, ...]  # pre-gate
    findings: tuple[ValuationFinding, ...]  # gate-passed subset


def identify(
    members: list[ClusterMember],
    dist: FittedSalaryDistribution,
    direction: str,
    mean_silhouette: float,
    alpha: float = 0.05,
    cluster: int = -1,
) -> IdentificationResult:
    """Flag members in the tested salary tail(s) and apply the silhouette gate.

    One-sided directions test their single tail at alpha; TEST_BOTH splits
    alpha across both tails. The tail test uses cap-inflation-adjusted values
    (the fitted variable); nominal values ride along for reporting. Pre-gate
    candidates are always retained next to the gated findings.
    """
    if direction not in (TEST_OVERVALUED, TEST_UNDERVALUED, TEST_BOTH):
        raise ValueError(f"unknown direction {direction!r}")
    candidates = []
    for m in members:
        upper = tail_probability(dist, m.cap_value_adjusted, UPPER)
        lower = tail_probability(dist, m.cap_value_adjusted, LOWER)
        verdict = None
        tail_p = None
        if direction == TEST_OVERVALUED:
            if upper <= alpha:
                verdict, tail_p = OVERVALUED, upper
        elif direction == TEST_UNDERVALUED:
            if lower <= alpha:
                verdict, tail_p = UNDERVALUED, lower
        else:
            if upper <= alpha / 2.0:
                verdict, tail_p = OVERVALUED, upper
            elif lower <= alpha / 2.0:
                verdict, tail_p = UNDERVALUED, lower
        if verdict is None:
            continue
        candidates.append(
            ValuationFinding(
                player_id=m.player_id,
                season_year=m.season_year,
                team=m.team,
                position=m.position,
                cap_value_nominal=m.cap_value_nominal,
                cluster=cluster,
                verdict=verdict,
                tail_probability=tail_p,
                silhouette=m.silhouette,
                gate_passed=m.silhouette >= mean_silhouette,
            )
        )
    candidates.sort(key=lambda f: (f.player_id, f.season_year))
    findings = tuple(f for f in candidates if f.gate_passed)
    return IdentificationResult(cluster=cluster, candidates=tuple(candidates), findings=findings)


def corroborates(verdict: str, performance_rank: int, salary_rank: int, min_gap: int = 0) -> bool:
    """Rank-comparison rule: does the performance/salary ordering support the verdict?

    Ranks ascend from 1 = best performance and 1 = highest salary. An
    undervalued call is supported when the player ranks strictly better on
    performance than on pay; an overvalued call when strictly worse, with an
    optional minimum rank gap.
    """
    if verdict == UNDERVALUED:
        return performance_rank + min_gap < salary_rank
    if verdict == OVERVALUED:
        return performance_rank > salary_rank + min_gap
    raise ValueError(f"unknown verdict {verdict!r}")


@dataclass(frozen=True)
class RankRow:
    player_id: str
    season_year: int
    position_group: str
    verdict: str
    performance_rank: int | None
    salary_rank: int | None
    corroborated: bool | None  # None = not comparable (missing rating)


def rank_validation(
    findings: list[ValuationFinding],
    sample: list[dict],
    min_gap: int = 0,
) -> list[RankRow]:
    """Compare each finding's film-grade rank with its salary rank.

    `sample` rows need player_id, season_year, position, cap_value, and a
    season rating (None when unavailable). Ranks are competition-style within
    the position groups C, G (both guards), and T (both tackles), rank 1
    being the best rating / highest salary. Findings whose rating is missing
    come back marked not-comparable.
    """
    pools: dict[str, list[dict]] = {}
    for row in sample:
        if row.get("rating") is None:
            continue
        group = POSITION_GROUPS[row["position"]]
        pools.setdefault(group, []).append(row)

    def ranks_for(group: str, player_id: str, season_year: int) -> tuple[int, int] | None:
        pool = pools.get(group, [])
        me = [r for r in pool if r["player_id"] == player_id and r["season_year"] == season_year]
        if not me:
            return None
        rating = me[0]["rating"]
        salary = me[0]["cap_value"]
        perf_rank = 1 + sum(1 for r in pool if r["rating"] > rating)
        salary_rank = 1 + sum(1 for r in pool if r["cap_value"] > salary)
        return perf_rank, salary_rank

    rows = []
    for f in findings:
        group = POSITION_GROUPS[f.position]
        ranks = ranks_for(group, f.player_id, f.season_year)
        if ranks is None:
            rows.append(
                RankRow(
                    player_id=f.player_id,
                    season_year=f.season_year,
                    position_group=group,
                    verdict=f.verdict,
                    performance_rank=None,
                    salary_rank=None,
                    corroborated=None,
                )
            )
            continue
        perf_rank, salary_rank = ranks
        rows.append(
            RankRow(
                player_id=f.player_id,
                season_year=f.season_year,
                position_group=group,
                verdict=f.verdict,
                performance_rank=perf_rank,
                salary_rank=salary_rank,
                corroborated=corroborates(f.verdict, perf_rank, salary_rank, min_gap),
            )
        )
    return rows
