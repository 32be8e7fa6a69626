"""Synthetic league generator with known pricing, clusters, and anomalies.

Builds a fully deterministic league: rosters with complete five-man lines,
game logs whose season aggregates land on planted archetype feature vectors,
salaries priced by a known linear function of the achieved features, and a
chosen set of contracts whose salaries are planted deep in their archetype's
salary tails. Emits the exact input files the ingestion stage consumes plus
a ground-truth sidecar, so the whole pipeline can be scored end to end.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from datetime import date as Date
from datetime import timedelta
from pathlib import Path

import numpy as np
from scipy import stats as sstats

from . import dataset
from .dataset import (
    GAME_CSV_HEADER,
    POSITIONS,
    GameRecord,
    PassProtectStats,
    RushSideStats,
    SeasonFeatureVector,
    feature_value,
)
from .profiling import TEST_BOTH, TEST_OVERVALUED, TEST_UNDERVALUED
from .util import fmt_cell, stream_rng, write_json

OVER = "over"
UNDER = "under"


@dataclass(frozen=True)
class Archetype:
    """One planted ability tier: centroid in feature space plus spread scale."""

    centroid: dict[str, float]
    weight: float = 1.0
    tightness: float = 1.0  # multiplies per-feature noise sd for members


@dataclass(frozen=True)
class AnomalySpec:
    direction: str  # "over" | "under"
    quantile: float  # target quantile of the archetype salary law
    count: int = 1
    archetype: int | None = None  # None = assign to any compatible archetype


@dataclass(frozen=True)
class SalaryNoise:
    """Within-archetype salary noise around the priced value.

    "band": symmetric two-band noise, |eps| uniform on [(1-width)*scale, scale].
    Its support is compact and pulls mass toward the edges, so smooth fitted
    families put their alpha-tails beyond the body and planted tail values
    stand out. "uniform" is uniform on [-scale, scale]; "lognormal" is a
    centered lognormal (heavy upper tail, correctly specified for the fits);
    "none" disables noise.
    """

    kind: str = "band"
    scale: float = 450_000.0
    band_width: float = 0.35

    def variance(self) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "uniform":
            return self.scale**2 / 3.0
        if self.kind == "band":
            h = self.band_width
            return self.scale**2 * (1.0 - h + h * h / 3.0)
        if self.kind == "lognormal":
            return self.scale**2 * (math.e**2 - math.e)
        raise ValueError(f"unknown noise kind {self.kind!r}")

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "none":
            return 0.0
        if self.kind == "uniform":
            return float(rng.uniform(-self.scale, self.scale))
        if self.kind == "band":
            mag = self.scale * (1.0 - self.band_width * rng.random())
            return float(mag if rng.random() < 0.5 else -mag)
        if self.kind == "lognormal":
            return float(self.scale * (math.exp(rng.standard_normal()) - math.sqrt(math.e)))
        raise ValueError(f"unknown noise kind {self.kind!r}")


@dataclass(frozen=True)
class ExclusionPlan:
    """Single-season contracts to mark ineligible, exercising the sample rules."""

    rookie: int = 0
    pre_cutoff: int = 0
    non_ufa: int = 0

    @property
    def total(self) -> int:
        return self.rookie + self.pre_cutoff + self.non_ufa


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    teams: int
    archetypes: tuple[Archetype, ...]
    intercept: float
    coefficients: dict[str, float]
    feature_noise_sd: dict[str, float]
    seasons: int = 2
    first_season: int = 2013
    games_per_season: int = 16
    playoff_game: bool = True
    two_season_slots: int | None = None  # default: half the roster slots
    archetype_season_counts: tuple[int, ...] | None = None  # exact sizes, else weights
    team_archetypes: tuple[int, ...] | None = None  # assortative rosters: tier per team
    anomalies: tuple[AnomalySpec, ...] = ()
    salary_noise: SalaryNoise = field(default_factory=SalaryNoise)
    exclusions: ExclusionPlan = field(default_factory=ExclusionPlan)
    cap_table: dict[int, float] = field(
        default_factory=lambda: {2010: 120.0e6, 2011: 120.4e6, 2012: 120.6e6, 2013: 123.0e6, 2014: 133.0e6}
    )
    reference_year: int = 2014
    salary_floor: float = 420_000.0  # league minimum; recommended fit lower bound

    def validate(self) -> None:
        if self.seasons < 1 or self.teams < 1:
            raise ValueError("need at least one season and one team")
        if not self.archetypes:
            raise ValueError("need at least one archetype")
        if self.archetype_season_counts is not None and len(self.archetype_season_counts) != len(self.archetypes):
            raise ValueError("archetype_season_counts length must match archetypes")
        if self.team_archetypes is not None:
            if len(self.team_archetypes) != self.teams:
                raise ValueError("team_archetypes length must match teams")
            if any(not 0 <= a < len(self.archetypes) for a in self.team_archetypes):
                raise ValueError("team_archetypes entries must index archetypes")
        weights = [a.weight for a in self.archetypes]
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("archetype weights must be nonnegative and sum positive")
        for spec in self.anomalies:
            if spec.direction not in (OVER, UNDER):
                raise ValueError(f"anomaly direction must be over/under, got {spec.direction!r}")
            if not (0.0 < spec.quantile <= 0.05 or 0.95 <= spec.quantile < 1.0):
                raise ValueError(f"anomaly quantile {spec.quantile} outside (0, 0.05] or [0.95, 1)")
            if spec.direction == OVER and spec.quantile < 0.5:
                raise ValueError("over anomalies need an upper-tail quantile")
            if spec.direction == UNDER and spec.quantile > 0.5:
                raise ValueError("under anomalies need a lower-tail quantile")
        for year in (self.first_season, self.reference_year, 2010):
            if year not in self.cap_table:
                raise ValueError(f"cap table missing year {year}")


@dataclass
class _Player:
    player_id: str
    team: str
    position: str
    seasons: tuple[int, ...]
    signing_year: int
    rookie_contract: bool
    ufa: bool
    excluded: str | None  # reason, or None when eligible
    archetype: int
    birthday: Date
    rookie_year: int
    draft_round: int
    draft_pick: int


@dataclass
class GeneratedLeague:
    config: SynthConfig
    records: list[GameRecord]
    awards: list[dict]
    pff: list[dict]
    contracts: list[dict]
    seasons: list[SeasonFeatureVector]  # achieved values, enriched with final salaries
    truth: dict


# League-average play profile the per-player targets perturb.
_PROFILE = {
    "rush_att_ts_pg": 9.0,
    "rush_att_nts_pg": 13.0,
    "stuff_rate": 0.18,
    "ypc": 4.1,
    "yac_share": 0.45,
    "success_rate": 0.45,
    "td_rate": 0.025,
    "dropbacks_pg": 34.0,
    "att_per_dropback": 0.93,
    "completion_rate": 0.63,
    "pressure_per_dropback_nts": 0.20,
    "sack_per_dropback_nts": 0.045,
}


def _distribute(total: int, caps: list[int]) -> list[int]:
    """Split an integer total across slots proportionally, respecting caps."""
    room = sum(caps)
    if total > room:
        raise ValueError(f"cannot distribute {total} across capacity {room}")
    if total <= 0:
        return [0] * len(caps)
    quotas = [total * c / room for c in caps]
    parts = [min(int(q), c) for q, c in zip(quotas, caps)]
    remainder = total - sum(parts)
    order = sorted(range(len(caps)), key=lambda i: (-(quotas[i] - int(quotas[i])), i))
    idx = 0
    while remainder > 0:
        i = order[idx % len(order)]
        if parts[i] < caps[i]:
            parts[i] += 1
            remainder -= 1
        idx += 1
    return parts


def _season_dates(season_year: int, games: int, playoff: bool) -> list[tuple[Date, bool]]:
    start = Date(season_year, 9, 7)
    out = [(start + timedelta(days=7 * w), False) for w in range(games)]
    if playoff:
        out.append((Date(season_year + 1, 1, 10), True))
    return out


def _make_games(
    rng: np.random.Generator,
    player: _Player,
    season_year: int,
    targets: dict[str, float],
    cfg: SynthConfig,
    opponents: list[str],
) -> list[GameRecord]:
    """Game log for one player-season whose aggregates land on `targets`."""
    dates = _season_dates(season_year, cfg.games_per_season, cfg.playoff_game)
    g = len(dates)
    att_ts = [max(3, int(round(rng.normal(_PROFILE["rush_att_ts_pg"], 1.0)))) for _ in range(g)]
    att_nts = [max(4, int(round(rng.normal(_PROFILE["rush_att_nts_pg"], 1.2)))) for _ in range(g)]
    dropbacks = [max(12, int(round(rng.normal(_PROFILE["dropbacks_pg"], 3.0)))) for _ in range(g)]
    tot_ts, tot_nts, tot_db = sum(att_ts), sum(att_nts), sum(dropbacks)

    half_stuff = targets.get("stuff_pct_diff", 0.0) / 200.0
    stuff_ts = min(max(_PROFILE["stuff_rate"] + half_stuff, 0.005), 0.9)
    stuff_nts = min(max(_PROFILE["stuff_rate"] - half_stuff, 0.005), 0.9)
    half_ypc = targets.get("yds_per_attempt_diff", 0.0) / 2.0
    ypc_ts = min(max(_PROFILE["ypc"] + half_ypc, 0.6), 9.0)
    ypc_nts = min(max(_PROFILE["ypc"] - half_ypc, 0.6), 9.0)
    half_succ = targets.get("successful_run_pct_diff", 0.0) / 200.0
    succ_ts = min(max(_PROFILE["success_rate"] + half_succ, 0.02), 0.95)
    succ_nts = min(max(_PROFILE["success_rate"] - half_succ, 0.02), 0.95)

    def spread(total: int, caps: list[int]) -> list[int]:
        return _distribute(int(total), caps)

    stuffs_ts = spread(round(stuff_ts * tot_ts), att_ts)
    stuffs_nts = spread(round(stuff_nts * tot_nts), att_nts)
    succs_ts = spread(round(succ_ts * tot_ts), att_ts)
    succs_nts = spread(round(succ_nts * tot_nts), att_nts)
    yards_ts = spread(round(ypc_ts * tot_ts), [a * 15 for a in att_ts])
    yards_nts = spread(round(ypc_nts * tot_nts), [a * 15 for a in att_nts])
    yac_ts = spread(round(_PROFILE["yac_share"] * ypc_ts * tot_ts), yards_ts)
    yac_nts = spread(round(_PROFILE["yac_share"] * ypc_nts * tot_nts), yards_nts)
    tds_ts = spread(round(_PROFILE["td_rate"] * tot_ts), att_ts)
    tds_nts = spread(round(_PROFILE["td_rate"] * tot_nts), att_nts)

    pass_atts = spread(round(targets.get("att_per_dropback", _PROFILE["att_per_dropback"]) * tot_db), dropbacks)
    completions = spread(round(_PROFILE["completion_rate"] * sum(pass_atts)), pass_atts)
    pass_yards = spread(round(7.1 * sum(pass_atts)), [a * 20 for a in pass_atts])

    p_nts_total = round(_PROFILE["pressure_per_dropback_nts"] * tot_db)
    p_ts_total = round(max(targets.get("pressure_pct", 1.0), 0.0) * p_nts_total)
    pressures_nts = spread(p_nts_total, dropbacks)
    pressures_ts = spread(p_ts_total, dropbacks)
    s_nts_total = max(4, round(_PROFILE["sack_per_dropback_nts"] * tot_db))
    s_ts_total = round(max(targets.get("sack_pct", 1.0), 0.0) * s_nts_total)
    sacks_nts = spread(s_nts_total, dropbacks)
    sacks_ts = spread(s_ts_total, dropbacks)
    sack_yds_ts = spread(round(6.5 * s_ts_total), [max(s * 12, 0) for s in sacks_ts])
    sack_yds_nts = spread(round(6.5 * s_nts_total), [max(s * 12, 0) for s in sacks_nts])
    hurries_ts = spread(round(0.5 * p_ts_total), dropbacks)
    hurries_nts = spread(round(0.5 * p_nts_total), dropbacks)
    knocks_ts = spread(round(0.25 * p_ts_total), dropbacks)
    knocks_nts = spread(round(0.25 * p_nts_total), dropbacks)
    holds_rush = spread(int(rng.integers(0, 4)), [2] * g)
    holds_pass = spread(int(rng.integers(0, 5)), [2] * g)

    records = []
    for i, (when, playoff) in enumerate(dates):
        snaps = att_ts[i] + att_nts[i] + dropbacks[i]
        release = round(2.35 + 0.3 * rng.random(), 2)
        release_up = round(release - 0.25, 2)
        rel_att = max(1, int(round(dropbacks[i] * 0.95)))
        rel_att_up = max(1, pressures_ts[i] + pressures_nts[i])
        records.append(
            GameRecord(
                game_id=f"{season_year}-{player.team}-{i + 1:02d}",
                date=when,
                playoff=playoff,
                player_id=player.player_id,
                team=player.team,
                opponent=opponents[i % len(opponents)],
                position=player.position,
                rookie_year=player.rookie_year,
                draft_round=player.draft_round,
                draft_pick=player.draft_pick,
                birthday=player.birthday,
                base_salary=0.0,
                signing_bonus=0.0,
                incentives=0.0,
                cap_value=0.0,
                snaps=snaps,
                holding_penalties_rush=holds_rush[i],
                holding_penalties_pass=holds_pass[i],
                rush_ts=RushSideStats(
                    attempts=att_ts[i],
                    stuffs=stuffs_ts[i],
                    yards=float(yards_ts[i]),
                    yards_after_contact=float(yac_ts[i]),
                    touchdowns=tds_ts[i],
                    successful=succs_ts[i],
                ),
                rush_nts=RushSideStats(
                    attempts=att_nts[i],
                    stuffs=stuffs_nts[i],
                    yards=float(yards_nts[i]),
                    yards_after_contact=float(yac_nts[i]),
                    touchdowns=tds_nts[i],
                    successful=succs_nts[i],
                ),
                passing_yards=float(pass_yards[i]),
                dropbacks=dropbacks[i],
                pass_attempts=pass_atts[i],
                pass_completions=completions[i],
                prot_ts=PassProtectStats(
                    sacks=sacks_ts[i],
                    sack_yards=float(sack_yds_ts[i]),
                    pressures=pressures_ts[i],
                    hurries=hurries_ts[i],
                    knockdowns=knocks_ts[i],
                ),
                prot_nts=PassProtectStats(
                    sacks=sacks_nts[i],
                    sack_yards=float(sack_yds_nts[i]),
                    pressures=pressures_nts[i],
                    hurries=hurries_nts[i],
                    knockdowns=knocks_nts[i],
                ),
                qb_release_time=release,
                release_attempts=rel_att,
                release_time_under_pressure=release_up,
                release_attempts_under_pressure=rel_att_up,
            )
        )
    return records


def _allocate_exact(
    counts: tuple[int, ...], pair_players: list[_Player], single_players: list[_Player], rng: np.random.Generator
) -> None:
    """Assign archetypes so per-archetype season totals hit `counts` exactly."""
    k = len(counts)
    n_pairs, n_singles = len(pair_players), len(single_players)
    if sum(counts) != 2 * n_pairs + n_singles:
        raise ValueError(
            f"archetype season counts sum to {sum(counts)} but roster provides {2 * n_pairs + n_singles}"
        )
    singles_per = [c % 2 for c in counts]
    deficit = n_singles - sum(singles_per)
    if deficit < 0 or deficit % 2:
        raise ValueError("archetype season counts are parity-infeasible for this roster")
    pairs_per = [(c - s) // 2 for c, s in zip(counts, singles_per)]
    a = 0
    while deficit > 0:
        if pairs_per[a] > 0:
            pairs_per[a] -= 1
            singles_per[a] += 2
            deficit -= 2
        a = (a + 1) % k
        if a == 0 and all(p == 0 for p in pairs_per) and deficit > 0:
            raise ValueError("archetype season counts are infeasible for this roster")

    pair_order = list(rng.permutation(len(pair_players)))
    single_order = list(rng.permutation(len(single_players)))
    i = 0
    for arch, n in enumerate(pairs_per):
        for _ in range(n):
            pair_players[pair_order[i]].archetype = arch
            i += 1
    i = 0
    for arch, n in enumerate(singles_per):
        for _ in range(n):
            single_players[single_order[i]].archetype = arch
            i += 1


def expected_direction(
    archetype: Archetype, coefficients: dict[str, float], league_means: dict[str, float]
) -> str:
    """Direction the profiling sign rule should assign to this archetype."""
    signs = set()
    for name, coef in coefficients.items():
        dev = archetype.centroid.get(name, league_means.get(name, 0.0)) - league_means.get(name, 0.0)
        if dev == 0.0 or coef == 0.0:
            continue
        signs.add(math.copysign(1.0, coef) * math.copysign(1.0, dev))
    if signs == {1.0}:
        return TEST_UNDERVALUED
    if signs == {-1.0}:
        return TEST_OVERVALUED
    return TEST_BOTH


def _league_centroid_means(cfg: SynthConfig) -> dict[str, float]:
    weights = np.array([a.weight for a in cfg.archetypes], dtype=float)
    weights = weights / weights.sum()
    names = set()
    for a in cfg.archetypes:
        names.update(a.centroid)
    return {
        n: float(sum(w * a.centroid.get(n, 0.0) for w, a in zip(weights, cfg.archetypes)))
        for n in sorted(names)
    }


def _compatible(direction: str, expected: str) -> bool:
    if expected == TEST_BOTH:
        return True
    return (direction == OVER) == (expected == TEST_OVERVALUED)


def generate_league(cfg: SynthConfig) -> GeneratedLeague:
    """Deterministically generate the league described by `cfg`."""
    cfg.validate()
    rng = stream_rng(cfg.seed, "synthgen")
    k = len(cfg.archetypes)
    team_names = [f"T{t + 1:02d}" for t in range(cfg.teams)]
    season_years = [cfg.first_season + s for s in range(cfg.seasons)]

    # Roster: each (team, position) slot is one two-season contract or a chain
    # of single-season contracts held by distinct players. Two-season slots
    # spread evenly over teams so every team keeps single-season contracts.
    slots = [(team, pos) for team in team_names for pos in POSITIONS]
    n_two = cfg.two_season_slots if cfg.two_season_slots is not None else len(slots) // 2
    if cfg.seasons == 1:
        n_two = 0
    if n_two > len(slots):
        raise ValueError("two_season_slots exceeds roster slots")
    base_pairs, extra = divmod(n_two, cfg.teams)
    team_order = list(rng.permutation(cfg.teams))
    pairs_per_team = {team_names[t]: base_pairs + (1 if i < extra else 0) for i, t in enumerate(team_order)}

    players: list[_Player] = []
    pair_players: list[_Player] = []
    single_players: list[_Player] = []
    pid = 0

    def new_player(team: str, pos: str, seasons: tuple[int, ...]) -> _Player:
        nonlocal pid
        pid += 1
        age = int(rng.integers(25, 31))
        exp = int(rng.integers(3, 8))
        draft_round = int(rng.integers(1, 8))
        p = _Player(
            player_id=f"P{pid:04d}",
            team=team,
            position=pos,
            seasons=seasons,
            signing_year=min(seasons),
            rookie_contract=False,
            ufa=True,
            excluded=None,
            archetype=0,
            birthday=Date(min(seasons) - age, 3, 15),
            rookie_year=min(seasons) - exp,
            draft_round=draft_round,
            draft_pick=min(259, (draft_round - 1) * 32 + int(rng.integers(1, 33))),
        )
        players.append(p)
        return p

    for team in team_names:
        pair_positions = set(rng.choice(len(POSITIONS), size=pairs_per_team[team], replace=False).tolist())
        for j, pos in enumerate(POSITIONS):
            if j in pair_positions:
                pair_players.append(new_player(team, pos, tuple(season_years)))
            else:
                for year in season_years:
                    single_players.append(new_player(team, pos, (year,)))

    def mark_excluded(p: _Player, reason: str) -> None:
        p.excluded = reason
        if reason == "rookie":
            p.rookie_contract = True
            p.rookie_year = p.seasons[0] - int(rng.integers(0, 3))
        elif reason == "pre_cutoff":
            p.signing_year = 2010
        else:
            p.ufa = False

    plan = cfg.exclusions
    if plan.total > len(single_players):
        raise ValueError("exclusion plan exceeds available single-season contracts")
    reasons = [r for r, n in (("rookie", plan.rookie), ("pre_cutoff", plan.pre_cutoff), ("non_ufa", plan.non_ufa)) for _ in range(n)]

    weights = np.array([a.weight for a in cfg.archetypes], dtype=float)
    weights = weights / weights.sum()
    if cfg.team_archetypes is not None:
        # Assortative rosters: every player inherits the team's ability tier,
        # so linemate (neighbor) metrics stay cluster-structured as well.
        tier = {team_names[t]: cfg.team_archetypes[t] for t in range(cfg.teams)}
        for p in players:
            p.archetype = tier[p.team]
        if cfg.archetype_season_counts is not None:
            # Exclusions are targeted so eligible season counts land exactly.
            quota = [0] * k
            for p in players:
                quota[p.archetype] += len(p.seasons)
            deficits = [q - c for q, c in zip(quota, cfg.archetype_season_counts)]
            if any(d < 0 for d in deficits) or sum(deficits) != plan.total:
                raise ValueError(
                    f"team quotas {quota} cannot reach archetype_season_counts "
                    f"{cfg.archetype_season_counts} with {plan.total} exclusions"
                )
            reason_order = list(rng.permutation(len(reasons)))
            cursor = 0
            for arch, deficit in enumerate(deficits):
                pool = [p for p in single_players if p.archetype == arch and p.excluded is None]
                if deficit > len(pool):
                    raise ValueError(f"not enough single-season contracts in archetype {arch} to exclude")
                for idx in rng.permutation(len(pool))[:deficit]:
                    mark_excluded(pool[int(idx)], reasons[reason_order[cursor]])
                    cursor += 1
        else:
            for idx in rng.permutation(len(single_players))[: plan.total]:
                mark_excluded(single_players[int(idx)], reasons.pop())
    else:
        excl_order = list(rng.permutation(len(single_players)))
        for cursor, reason in enumerate(reasons):
            mark_excluded(single_players[excl_order[cursor]], reason)
        eligible_singles = [p for p in single_players if p.excluded is None]
        if cfg.archetype_season_counts is not None:
            _allocate_exact(cfg.archetype_season_counts, pair_players, eligible_singles, rng)
            for p in single_players:
                if p.excluded is not None:
                    p.archetype = int(rng.choice(k, p=weights))
        else:
            for p in players:
                p.archetype = int(rng.choice(k, p=weights))

    # Planted anomalies go on eligible contracts compatible with the tail the
    # archetype's profile will be tested against.
    league_means = _league_centroid_means(cfg)
    directions = [expected_direction(a, cfg.coefficients, league_means) for a in cfg.archetypes]
    anomaly_of: dict[str, AnomalySpec] = {}
    anomalies_in_arch: dict[int, int] = {}
    for spec in cfg.anomalies:
        for _ in range(spec.count):
            pool = [
                p
                for p in players
                if p.excluded is None
                and p.player_id not in anomaly_of
                and (spec.archetype is None or p.archetype == spec.archetype)
                and _compatible(spec.direction, directions[p.archetype])
            ]
            if not pool:
                raise ValueError(
                    f"infeasible anomaly plan: no free compatible contract for {spec.direction!r}"
                    f" (archetype {spec.archetype})"
                )
            # Spread plants across archetypes (limits contamination of any one
            # cluster's salary fit) and prefer the tightest hosts so planted
            # rows survive the silhouette gate.
            best = min(
                (anomalies_in_arch.get(p.archetype, 0), cfg.archetypes[p.archetype].tightness) for p in pool
            )
            pool = [
                p
                for p in pool
                if (anomalies_in_arch.get(p.archetype, 0), cfg.archetypes[p.archetype].tightness) == best
            ]
            pick = pool[int(rng.integers(len(pool)))]
            anomaly_of[pick.player_id] = spec
            anomalies_in_arch[pick.archetype] = anomalies_in_arch.get(pick.archetype, 0) + 1

    # Per-season feature targets and game logs. Demographics carried by the
    # game rows (draft slot) are pinned to the first season's targets so the
    # archetype structure survives into every candidate predictor.
    integer_targets = {"draft_round", "pro_bowls", "ap_all_pro_1st", "ap_all_pro_2nd", "pfw_all_pro"}
    records: list[GameRecord] = []
    targets_by_ps: dict[tuple[str, int], dict[str, float]] = {}
    for p in sorted(players, key=lambda q: q.player_id):
        arche = cfg.archetypes[p.archetype]
        for year in p.seasons:
            targets = dict(league_means)
            for name, sd in cfg.feature_noise_sd.items():
                base = arche.centroid.get(name, league_means.get(name, 0.0))
                targets[name] = base + rng.normal(0.0, sd * arche.tightness)
            for name in list(targets):
                if name in integer_targets:
                    targets[name] = max(0.0, round(targets[name]))
            targets_by_ps[(p.player_id, year)] = targets
        t0 = targets_by_ps[(p.player_id, p.seasons[0])]
        if "draft_round" in t0:
            p.draft_round = min(7, max(1, int(t0["draft_round"])))
            p.draft_pick = min(259, (p.draft_round - 1) * 32 + int(rng.integers(1, 33)))
        if "age" in t0:
            p.birthday = Date(p.seasons[0] - max(21, int(round(t0["age"]))), 3, 15)
        if "experience" in t0 and p.excluded != "rookie":
            p.rookie_year = p.seasons[0] - max(0, int(round(t0["experience"])))
        for year in p.seasons:
            records.extend(_make_games(rng, p, year, targets_by_ps[(p.player_id, year)], cfg, [t for t in team_names if t != p.team]))

    # Honors and film-grade history hit their targets exactly: award rows sit in
    # pre-league seasons, prior ratings are two identical pre-signing seasons.
    awards: list[dict] = []
    pff: list[dict] = []
    for p in sorted(players, key=lambda q: q.player_id):
        t0 = targets_by_ps[(p.player_id, p.seasons[0])]
        for kind, col in (("pro_bowls", "pro_bowl"), ("ap_all_pro_1st", "ap1"), ("ap_all_pro_2nd", "ap2"), ("pfw_all_pro", "pfw")):
            n_awards = int(t0.get(kind, 0))
            for j in range(n_awards):
                year = cfg.first_season - 1 - j
                row = next((r for r in awards if r["player_id"] == p.player_id and r["season_year"] == year), None)
                if row is None:
                    row = {"player_id": p.player_id, "season_year": year, "pro_bowl": 0, "ap1": 0, "ap2": 0, "pfw": 0}
                    awards.append(row)
                row[col] = 1
        prior = t0.get("pff_prior_avg", 0.0)
        for year in (cfg.first_season - 2, cfg.first_season - 1):
            pff.append({"player_id": p.player_id, "season_year": year, "rating": round(float(prior), 3)})

    # First aggregation pass on zero-salary contracts yields achieved features.
    draft_contracts = [
        {
            "player_id": p.player_id,
            "signing_year": p.signing_year,
            "rookie_contract": p.rookie_contract,
            "ufa": p.ufa,
            "cap_value": 1.0,
        }
        for p in sorted(players, key=lambda q: q.player_id)
    ]
    grouped = dataset.group_player_seasons(records)
    totals = [dataset.aggregate_season(g, pidy[0], pidy[1]) for pidy, g in sorted(grouped.items())]

    # Current-season ratings track achieved run-blocking performance.
    diff_by_ps = {(t.player_id, t.season_year): dataset.compute_differentials(t) for t in totals}
    perf_keys = [n for n in ("stuff_pct_diff", "yds_per_attempt_diff", "successful_run_pct_diff") if n in cfg.coefficients]
    if perf_keys:
        # Weak echo of realized blocking performance: enough signal for the
        # rank-comparison benchmark, too noisy to displace the priced features.
        vals = {n: np.array([getattr(d, n) for d in diff_by_ps.values()]) for n in perf_keys}
        for t in totals:
            d = diff_by_ps[(t.player_id, t.season_year)]
            z = 0.0
            for n in perf_keys:
                sd = float(vals[n].std()) or 1.0
                z += math.copysign(1.0, cfg.coefficients[n]) * (getattr(d, n) - float(vals[n].mean())) / sd
            rating = 0.8 * z / len(perf_keys) + rng.normal(0.0, 7.0)
            pff.append({"player_id": t.player_id, "season_year": t.season_year, "rating": round(float(rating), 3)})
    else:
        for t in totals:
            pff.append(
                {"player_id": t.player_id, "season_year": t.season_year, "rating": round(float(rng.normal(0, 5)), 3)}
            )

    achieved = dataset.merge_external(totals, awards, pff, draft_contracts, cfg.cap_table, cfg.reference_year)
    achieved_by_ps = {(s.player_id, s.season_year): s for s in achieved}

    # Salary assignment in reference-year dollars, per contract.
    feat_names = sorted(cfg.coefficients)
    arch_var_feat = [
        sum((cfg.coefficients[n] * cfg.feature_noise_sd.get(n, 0.0) * a.tightness) ** 2 for n in feat_names)
        for a in cfg.archetypes
    ]
    noise_var = cfg.salary_noise.variance()
    arch_mean = [
        cfg.intercept + sum(cfg.coefficients[n] * a.centroid.get(n, league_means.get(n, 0.0)) for n in feat_names)
        for a in cfg.archetypes
    ]

    contracts: list[dict] = []
    truth_seasons: list[dict] = []
    salary_ref_of: dict[str, float] = {}
    for p in sorted(players, key=lambda q: q.player_id):
        rows = [achieved_by_ps[(p.player_id, y)] for y in p.seasons]
        xbar = {n: sum(feature_value(r, n) for r in rows) / len(rows) for n in feat_names}
        merit = cfg.intercept + sum(cfg.coefficients[n] * xbar[n] for n in feat_names)
        spec = anomaly_of.get(p.player_id)
        if spec is not None:
            sigma_total = math.sqrt(arch_var_feat[p.archetype] + noise_var)
            salary_ref = arch_mean[p.archetype] + float(sstats.norm.ppf(spec.quantile)) * sigma_total
        else:
            salary_ref = merit + cfg.salary_noise.draw(rng)
        if salary_ref <= cfg.salary_floor:
            raise ValueError(
                f"generated salary {salary_ref:.0f} for {p.player_id} does not clear the floor "
                f"{cfg.salary_floor:.0f}; adjust intercept/steps/noise"
            )
        salary_ref_of[p.player_id] = salary_ref
        nominal = round(salary_ref * cfg.cap_table[p.signing_year] / cfg.cap_table[cfg.reference_year], 2)
        contracts.append(
            {
                "player_id": p.player_id,
                "signing_year": p.signing_year,
                "rookie_contract": p.rookie_contract,
                "ufa": p.ufa,
                "cap_value": nominal,
            }
        )
        for year in p.seasons:
            truth_seasons.append(
                {
                    "player_id": p.player_id,
                    "season_year": year,
                    "team": p.team,
                    "position": p.position,
                    "archetype": p.archetype,
                    "excluded": p.excluded,
                    "anomaly": None
                    if spec is None
                    else {"direction": spec.direction, "quantile": spec.quantile},
                    "salary_ref": salary_ref,
                    "cap_value_nominal": nominal,
                    "features": {n: feature_value(achieved_by_ps[(p.player_id, year)], n) for n in feat_names},
                }
            )

    # Final pass: game rows carry the contract money fields.
    final_records = []
    nominal_of = {c["player_id"]: c["cap_value"] for c in contracts}
    for r in records:
        cap = nominal_of[r.player_id]
        final_records.append(
            replace(
                r,
                cap_value=cap,
                base_salary=round(0.62 * cap, 2),
                signing_bonus=round(0.25 * cap, 2),
                incentives=round(0.13 * cap, 2),
            )
        )
    seasons = dataset.merge_external(totals, awards, pff, contracts, cfg.cap_table, cfg.reference_year)

    truth = {
        "seed": cfg.seed,
        "n_archetypes": k,
        "intercept": cfg.intercept,
        "coefficients": dict(cfg.coefficients),
        "archetypes": [
            {
                "centroid": dict(a.centroid),
                "tightness": a.tightness,
                "expected_direction": directions[i],
                "mean_salary_ref": arch_mean[i],
                "sigma_salary_ref": math.sqrt(arch_var_feat[i] + noise_var),
            }
            for i, a in enumerate(cfg.archetypes)
        ],
        "salary_noise": {"kind": cfg.salary_noise.kind, "scale": cfg.salary_noise.scale},
        "recommended_lower": cfg.salary_floor,
        "cap_table": {str(y): v for y, v in cfg.cap_table.items()},
        "reference_year": cfg.reference_year,
        "seasons": sorted(truth_seasons, key=lambda r: (r["player_id"], r["season_year"])),
    }
    awards_rows = sorted(awards, key=lambda r: (r["player_id"], r["season_year"]))
    pff_rows = sorted(pff, key=lambda r: (r["player_id"], r["season_year"]))
    return GeneratedLeague(
        config=cfg,
        records=sorted(final_records, key=lambda r: (r.date, r.game_id, r.player_id)),
        awards=awards_rows,
        pff=pff_rows,
        contracts=contracts,
        seasons=seasons,
        truth=truth,
    )


def _game_row(r: GameRecord) -> list:
    return [
        r.game_id,
        r.date.isoformat(),
        int(r.playoff),
        r.player_id,
        r.team,
        r.opponent,
        r.position,
        r.rookie_year,
        r.draft_round,
        r.draft_pick,
        r.birthday.isoformat(),
        r.base_salary,
        r.signing_bonus,
        r.incentives,
        r.cap_value,
        r.snaps,
        r.holding_penalties_rush,
        r.holding_penalties_pass,
        r.rush_ts.attempts,
        r.rush_nts.attempts,
        r.rush_ts.stuffs,
        r.rush_nts.stuffs,
        r.rush_ts.yards,
        r.rush_nts.yards,
        r.rush_ts.yards_after_contact,
        r.rush_nts.yards_after_contact,
        r.rush_ts.touchdowns,
        r.rush_nts.touchdowns,
        r.rush_ts.successful,
        r.rush_nts.successful,
        r.passing_yards,
        r.dropbacks,
        r.pass_attempts,
        r.pass_completions,
        r.prot_ts.sacks,
        r.prot_nts.sacks,
        r.prot_ts.sack_yards,
        r.prot_nts.sack_yards,
        r.prot_ts.pressures,
        r.prot_nts.pressures,
        r.prot_ts.hurries,
        r.prot_nts.hurries,
        r.prot_ts.knockdowns,
        r.prot_nts.knockdowns,
        r.qb_release_time,
        r.release_attempts,
        r.release_time_under_pressure,
        r.release_attempts_under_pressure,
    ]


def write_league(league: GeneratedLeague, out_dir: str | Path) -> dict[str, Path]:
    """Write the four pipeline input files plus the ground-truth sidecar."""
    from .util import write_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "games": out / "games.csv",
        "awards": out / "awards.csv",
        "pff": out / "pff.csv",
        "contracts": out / "contracts.csv",
        "truth": out / "truth.json",
    }
    write_csv(paths["games"], GAME_CSV_HEADER, (_game_row(r) for r in league.records))
    write_csv(
        paths["awards"],
        ["player_id", "season_year", "pro_bowl", "ap1", "ap2", "pfw"],
        ([r["player_id"], r["season_year"], r["pro_bowl"], r["ap1"], r["ap2"], r["pfw"]] for r in league.awards),
    )
    write_csv(
        paths["pff"],
        ["player_id", "season_year", "rating"],
        ([r["player_id"], r["season_year"], r["rating"]] for r in league.pff),
    )
    write_csv(
        paths["contracts"],
        ["player_id", "signing_year", "rookie_contract", "ufa", "cap_value"],
        (
            [r["player_id"], r["signing_year"], int(r["rookie_contract"]), int(r["ufa"]), r["cap_value"]]
            for r in league.contracts
        ),
    )
    write_json(paths["truth"], league.truth)
    return paths


# ---------------------------------------------------------------------------
# Scenario presets


def _ladder_archetypes(
    rng: np.random.Generator,
    k: int,
    bases: dict[str, float],
    steps: dict[str, float],
    coefficients: dict[str, float],
    tight: float,
    loose: float,
    n_tight: int,
) -> tuple[Archetype, ...]:
    """Centroids on per-feature level ladders with mixed-sign salary deviations.

    Every feature's levels start as a permutation of 0..k-1 across archetypes,
    so distinct archetypes differ in every feature by at least one step. An
    archetype whose nonzero deviations all merit the same pay direction gets
    its weakest level mirrored (only where that keeps the feature's levels
    distinct), so the profiling stage tests both tails. Draws whose merit
    spread collapses through cross-feature cancellation are rejected.
    """
    names = sorted(steps)
    merit_sd_floor = 0.45 * math.sqrt(
        sum((coefficients.get(n, 0.0) * steps[n]) ** 2 for n in names) * (k * k - 1) / 12.0
    )
    centered: dict[str, list[float]] = {}
    best: tuple[float, dict[str, list[float]]] | None = None
    for _ in range(64):
        levels = {n: list(rng.permutation(k)) for n in names}
        centered = {n: [lv - (k - 1) / 2.0 for lv in levels[n]] for n in names}

        def d_sign(n: str, a: int) -> float:
            if centered[n][a] == 0.0 or coefficients.get(n, 0.0) == 0.0:
                return 0.0
            return math.copysign(1.0, coefficients[n]) * math.copysign(1.0, centered[n][a])

        def signs(a: int) -> set[float]:
            return {d_sign(n, a) for n in names if d_sign(n, a) != 0.0}

        for a in range(k):
            flippable = sorted(
                (n for n in names if centered[n][a] != 0.0), key=lambda n: abs(centered[n][a])
            )
            for flip in flippable:
                if len(signs(a)) != 1:
                    break
                if any(centered[flip][b] == -centered[flip][a] for b in range(k) if b != a):
                    continue  # mirroring would collide with another archetype's level
                centered[flip][a] = -centered[flip][a]
                if len(signs(a)) == 1:  # flip produced no second sign; undo
                    centered[flip][a] = -centered[flip][a]

        merits = [
            sum(coefficients.get(n, 0.0) * steps[n] * centered[n][a] for n in names) for a in range(k)
        ]
        merit_sd = float(np.std(merits))
        mixed = all(len(signs(a)) == 2 for a in range(k))
        score = (1.0 if mixed else 0.0, merit_sd)
        if best is None or score > best[0]:
            best = (score, {n: list(v) for n, v in centered.items()})
        if mixed and merit_sd >= merit_sd_floor:
            break
    centered = best[1]
    archetypes = []
    for a in range(k):
        centroid = {n: bases[n] + steps[n] * centered[n][a] for n in names}
        archetypes.append(Archetype(centroid=centroid, tightness=tight if a < n_tight else loose))
    return tuple(archetypes)


_PRESET_COEFFS = {
    "pff_prior_avg": 60_000.0,
    "experience": -150_000.0,
    "draft_round": -200_000.0,
    "pro_bowls": 250_000.0,
    "stuff_pct_diff": -50_000.0,
    "yds_per_attempt_diff": 300_000.0,
}
_PRESET_BASES = {
    "pff_prior_avg": 4.0,
    "experience": 6.0,
    "draft_round": 4.0,
    "pro_bowls": 2.0,
    "stuff_pct_diff": 0.0,
    "yds_per_attempt_diff": 0.0,
}
_PRESET_NOISE_SD = {
    "pff_prior_avg": 0.15,
    "experience": 0.1,
    "draft_round": 0.1,
    "pro_bowls": 0.1,
    "stuff_pct_diff": 0.25,
    "yds_per_attempt_diff": 0.05,
}


def _adaptive_intercept(
    base: float,
    archetypes: tuple[Archetype, ...],
    coefficients: dict[str, float],
    noise: SalaryNoise,
    floor: float,
) -> float:
    """Raise the intercept until the poorest archetype's deep lower tail clears the floor."""
    devs = []
    sigmas = []
    for a in archetypes:
        devs.append(sum(c * a.centroid.get(n, 0.0) for n, c in coefficients.items()))
        feat_var = sum((coefficients[n] * _PRESET_NOISE_SD.get(n, 0.0) * a.tightness) ** 2 for n in coefficients)
        sigmas.append(math.sqrt(feat_var + noise.variance()))
    needed = floor + 4.2 * max(sigmas) - min(devs) + 250_000.0
    return max(base, needed)


def separable_config(seed: int = 0, n_archetypes: int = 5) -> SynthConfig:
    """Easy scenario: far-apart tight archetypes, deep planted anomalies."""
    if not 2 <= n_archetypes <= 7:
        raise ValueError("separable scenarios support 2..7 archetypes")
    rng = stream_rng(seed, "synthgen-preset")
    steps = {
        "pff_prior_avg": 6.0,
        "experience": 2.0,
        "draft_round": 1.0,
        "pro_bowls": 1.0,
        "stuff_pct_diff": 9.0,
        "yds_per_attempt_diff": 1.5,
    }
    n_tight = max(2, (n_archetypes + 1) // 2)
    archetypes = _ladder_archetypes(
        rng, n_archetypes, _PRESET_BASES, steps, _PRESET_COEFFS, tight=0.6, loose=1.8, n_tight=n_tight
    )
    teams = max(10, 2 * n_archetypes)
    anomalies = (
        AnomalySpec(direction=OVER, quantile=0.9995, count=2),
        AnomalySpec(direction=UNDER, quantile=0.0005, count=2),
    )
    noise = SalaryNoise(kind="band", scale=450_000.0)
    floor = 420_000.0
    return SynthConfig(
        seed=seed,
        teams=teams,
        archetypes=archetypes,
        team_archetypes=tuple(t % n_archetypes for t in range(teams)),
        intercept=_adaptive_intercept(4_600_000.0, archetypes, _PRESET_COEFFS, noise, floor),
        coefficients=dict(_PRESET_COEFFS),
        feature_noise_sd=dict(_PRESET_NOISE_SD),
        anomalies=anomalies,
        salary_noise=noise,
        salary_floor=floor,
    )


def paperlike_config(seed: int = 0) -> SynthConfig:
    """Seven assortative archetypes; eligible season counts 25/17/18/23/24/8/18."""
    rng = stream_rng(seed, "synthgen-preset")
    steps = {
        "pff_prior_avg": 4.5,
        "experience": 1.5,
        "draft_round": 1.0,
        "pro_bowls": 1.0,
        "stuff_pct_diff": 7.0,
        "yds_per_attempt_diff": 1.2,
    }
    archetypes = _ladder_archetypes(
        rng, 7, _PRESET_BASES, steps, _PRESET_COEFFS, tight=0.8, loose=1.6, n_tight=4
    )
    anomalies = (
        AnomalySpec(direction=OVER, quantile=0.9995, count=2),
        AnomalySpec(direction=UNDER, quantile=0.0005, count=2),
    )
    noise = SalaryNoise(kind="band", scale=420_000.0)
    floor = 420_000.0
    # 16 teams in tiers (3,2,2,3,3,1,2); 27 targeted exclusions carve the
    # 160 raw seasons down to the exact per-archetype counts.
    team_archetypes = (0, 0, 0, 1, 1, 2, 2, 3, 3, 3, 4, 4, 4, 5, 6, 6)
    return SynthConfig(
        seed=seed,
        teams=16,
        two_season_slots=40,
        archetypes=archetypes,
        archetype_season_counts=(25, 17, 18, 23, 24, 8, 18),
        team_archetypes=team_archetypes,
        intercept=_adaptive_intercept(4_400_000.0, archetypes, _PRESET_COEFFS, noise, floor),
        coefficients=dict(_PRESET_COEFFS),
        feature_noise_sd=dict(_PRESET_NOISE_SD),
        anomalies=anomalies,
        salary_noise=noise,
        exclusions=ExclusionPlan(rookie=9, pre_cutoff=9, non_ufa=9),
        salary_floor=floor,
    )


def hard_config(seed: int = 0) -> SynthConfig:
    """Overlapping archetypes with heavy-tailed salary noise; no guarantees."""
    rng = stream_rng(seed, "synthgen-preset")
    steps = {
        "pff_prior_avg": 1.0,
        "experience": 1.0,
        "draft_round": 1.0,
        "pro_bowls": 1.0,
        "stuff_pct_diff": 1.2,
        "yds_per_attempt_diff": 0.25,
    }
    noise_sd = {
        "pff_prior_avg": 0.4,
        "experience": 0.5,
        "draft_round": 0.5,
        "pro_bowls": 0.5,
        "stuff_pct_diff": 0.5,
        "yds_per_attempt_diff": 0.1,
    }
    archetypes = _ladder_archetypes(
        rng, 5, _PRESET_BASES, steps, _PRESET_COEFFS, tight=1.0, loose=1.0, n_tight=5
    )
    return SynthConfig(
        seed=seed,
        teams=10,
        archetypes=archetypes,
        intercept=4_600_000.0,
        coefficients=dict(_PRESET_COEFFS),
        feature_noise_sd=noise_sd,
        anomalies=(AnomalySpec(direction=OVER, quantile=0.99, count=2),),
        salary_noise=SalaryNoise(kind="lognormal", scale=160_000.0),
    )


PRESETS = {
    "separable": separable_config,
    "paperlike": paperlike_config,
    "hard": hard_config,
}


def preset_config(name: str, seed: int = 0, **kwargs) -> SynthConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[name](seed=seed, **kwargs)
