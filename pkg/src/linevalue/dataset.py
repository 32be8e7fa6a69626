"""Game-record ingestion and player-season feature derivation.

Turns per-game lineman records into season aggregates, derives the
to-side/not-to-side differential statistics, merges awards / film-grade /
contract data, and applies the sample-exclusion rules used by the pricing
regression and the clustering stages.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from datetime import date as Date
from pathlib import Path

from .errors import InvariantError, ParseError, SchemaError

POSITIONS = ("LT", "LG", "C", "RG", "RT")
LINE_SPLITS = ("LS", "L", "M", "R", "RS")

# Which line splits count as "to side" for each position.
TO_SIDE_SPLITS: dict[str, frozenset[str]] = {
    "LT": frozenset({"LS", "L"}),
    "LG": frozenset({"LS", "L", "M"}),
    "C": frozenset({"L", "M", "R"}),
    "RG": frozenset({"M", "R", "RS"}),
    "RT": frozenset({"R", "RS"}),
}

# Sentinels for undrafted players: one beyond the worst historical slot, so
# "later is worse" ordering survives into the regression features.
UNDRAFTED_ROUND = 8
UNDRAFTED_PICK = 260


def to_side_splits(position: str) -> frozenset[str]:
    """Return the set of line splits attributed to a position as "to side"."""
    try:
        return TO_SIDE_SPLITS[position]
    except KeyError:
        raise ValueError(f"unknown position {position!r}; expected one of {POSITIONS}") from None


@dataclass(frozen=True)
class RushSideStats:
    """Rushing outcomes attributed to one side (to-side or not-to-side)."""

    attempts: int = 0
    stuffs: int = 0
    yards: float = 0.0
    yards_after_contact: float = 0.0
    touchdowns: int = 0
    successful: int = 0


@dataclass(frozen=True)
class PassProtectStats:
    """Pass-protection outcomes attributed to one side."""

    sacks: int = 0
    sack_yards: float = 0.0
    pressures: int = 0
    hurries: int = 0
    knockdowns: int = 0


@dataclass(frozen=True)
class GameRecord:
    """One player-game observation with stats split by responsible side."""

    game_id: str
    date: Date
    playoff: bool
    player_id: str
    team: str
    opponent: str
    position: str
    rookie_year: int
    draft_round: int  # 0 = undrafted
    draft_pick: int  # 0 = undrafted
    birthday: Date
    base_salary: float
    signing_bonus: float
    incentives: float
    cap_value: float
    snaps: int
    holding_penalties_rush: int
    holding_penalties_pass: int
    rush_ts: RushSideStats
    rush_nts: RushSideStats
    passing_yards: float
    dropbacks: int
    pass_attempts: int
    pass_completions: int
    prot_ts: PassProtectStats
    prot_nts: PassProtectStats
    qb_release_time: float
    release_attempts: int
    release_time_under_pressure: float
    release_attempts_under_pressure: int

    def validate(self) -> None:
        if self.position not in POSITIONS:
            raise InvariantError(f"position {self.position!r} not one of {POSITIONS}")
        counts = {
            "snaps": self.snaps,
            "holding_penalties_rush": self.holding_penalties_rush,
            "holding_penalties_pass": self.holding_penalties_pass,
            "dropbacks": self.dropbacks,
            "pass_attempts": self.pass_attempts,
            "pass_completions": self.pass_completions,
            "release_attempts": self.release_attempts,
            "release_attempts_under_pressure": self.release_attempts_under_pressure,
            "draft_round": self.draft_round,
            "draft_pick": self.draft_pick,
        }
        for suffix, side in (("ts", self.rush_ts), ("nts", self.rush_nts)):
            counts[f"rush_attempts_{suffix}"] = side.attempts
            counts[f"stuffs_{suffix}"] = side.stuffs
            counts[f"rush_touchdowns_{suffix}"] = side.touchdowns
            counts[f"successful_rushes_{suffix}"] = side.successful
        for suffix, side in (("ts", self.prot_ts), ("nts", self.prot_nts)):
            counts[f"sacks_{suffix}"] = side.sacks
            counts[f"pressures_{suffix}"] = side.pressures
            counts[f"hurries_{suffix}"] = side.hurries
            counts[f"knockdowns_{suffix}"] = side.knockdowns
        for name, value in counts.items():
            if value < 0:
                raise InvariantError(f"count {name} is negative ({value})")
        for suffix, side in (("ts", self.rush_ts), ("nts", self.rush_nts)):
            if side.stuffs > side.attempts:
                raise InvariantError(
                    f"stuffs_{suffix} ({side.stuffs}) exceeds rush_attempts_{suffix} ({side.attempts})"
                )
            if side.successful > side.attempts:
                raise InvariantError(
                    f"successful_rushes_{suffix} ({side.successful}) exceeds "
                    f"rush_attempts_{suffix} ({side.attempts})"
                )
        if not (self.pass_completions <= self.pass_attempts <= self.dropbacks):
            raise InvariantError(
                f"expected completions <= attempts <= dropbacks, got "
                f"{self.pass_completions} / {self.pass_attempts} / {self.dropbacks}"
            )


# games.csv schema: (column, parser kind). Side-split variants carry _ts/_nts.
_GAME_COLUMNS: tuple[tuple[str, str], ...] = (
    ("game_id", "str"),
    ("date", "date"),
    ("playoff", "int"),
    ("player_id", "str"),
    ("team", "str"),
    ("opponent", "str"),
    ("position", "str"),
    ("rookie_year", "int"),
    ("draft_round", "int"),
    ("draft_pick", "int"),
    ("birthday", "date"),
    ("base_salary", "float"),
    ("signing_bonus", "float"),
    ("incentives", "float"),
    ("cap_value", "float"),
    ("snaps", "int"),
    ("holding_penalties_rush", "int"),
    ("holding_penalties_pass", "int"),
    ("rush_attempts_ts", "int"),
    ("rush_attempts_nts", "int"),
    ("stuffs_ts", "int"),
    ("stuffs_nts", "int"),
    ("rush_yards_ts", "float"),
    ("rush_yards_nts", "float"),
    ("yards_after_contact_ts", "float"),
    ("yards_after_contact_nts", "float"),
    ("rush_touchdowns_ts", "int"),
    ("rush_touchdowns_nts", "int"),
    ("successful_rushes_ts", "int"),
    ("successful_rushes_nts", "int"),
    ("passing_yards", "float"),
    ("dropbacks", "int"),
    ("pass_attempts", "int"),
    ("pass_completions", "int"),
    ("sacks_ts", "int"),
    ("sacks_nts", "int"),
    ("sack_yards_ts", "float"),
    ("sack_yards_nts", "float"),
    ("pressures_ts", "int"),
    ("pressures_nts", "int"),
    ("hurries_ts", "int"),
    ("hurries_nts", "int"),
    ("knockdowns_ts", "int"),
    ("knockdowns_nts", "int"),
    ("qb_release_time", "float"),
    ("release_attempts", "int"),
    ("release_time_under_pressure", "float"),
    ("release_attempts_under_pressure", "int"),
)

GAME_CSV_HEADER = [name for name, _ in _GAME_COLUMNS]


def _parse_cell(raw: str, kind: str, line_no: int, column: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "date":
            return Date.fromisoformat(raw)
        return raw
    except (ValueError, TypeError):
        raise ParseError(f"line {line_no}, column {column!r}: cannot parse {raw!r} as {kind}") from None


def parse_game_records(path: str | Path) -> list[GameRecord]:
    """Parse games.csv into validated GameRecord values.

    Raises SchemaError when required columns are missing, ParseError for
    unparseable cells, and InvariantError for rows violating domain rules;
    all messages carry file line numbers.
    """
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected games.csv header")
        missing = [c for c in GAME_CSV_HEADER if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing required column(s): {', '.join(missing)}")
        records = []
        for i, row in enumerate(reader):
            line_no = i + 2  # header is line 1
            vals = {name: _parse_cell(row[name], kind, line_no, name) for name, kind in _GAME_COLUMNS}
            record = GameRecord(
                game_id=vals["game_id"],
                date=vals["date"],
                playoff=bool(vals["playoff"]),
                player_id=vals["player_id"],
                team=vals["team"],
                opponent=vals["opponent"],
                position=vals["position"],
                rookie_year=vals["rookie_year"],
                draft_round=vals["draft_round"],
                draft_pick=vals["draft_pick"],
                birthday=vals["birthday"],
                base_salary=vals["base_salary"],
                signing_bonus=vals["signing_bonus"],
                incentives=vals["incentives"],
                cap_value=vals["cap_value"],
                snaps=vals["snaps"],
                holding_penalties_rush=vals["holding_penalties_rush"],
                holding_penalties_pass=vals["holding_penalties_pass"],
                rush_ts=RushSideStats(
                    attempts=vals["rush_attempts_ts"],
                    stuffs=vals["stuffs_ts"],
                    yards=vals["rush_yards_ts"],
                    yards_after_contact=vals["yards_after_contact_ts"],
                    touchdowns=vals["rush_touchdowns_ts"],
                    successful=vals["successful_rushes_ts"],
                ),
                rush_nts=RushSideStats(
                    attempts=vals["rush_attempts_nts"],
                    stuffs=vals["stuffs_nts"],
                    yards=vals["rush_yards_nts"],
                    yards_after_contact=vals["yards_after_contact_nts"],
                    touchdowns=vals["rush_touchdowns_nts"],
                    successful=vals["successful_rushes_nts"],
                ),
                passing_yards=vals["passing_yards"],
                dropbacks=vals["dropbacks"],
                pass_attempts=vals["pass_attempts"],
                pass_completions=vals["pass_completions"],
                prot_ts=PassProtectStats(
                    sacks=vals["sacks_ts"],
                    sack_yards=vals["sack_yards_ts"],
                    pressures=vals["pressures_ts"],
                    hurries=vals["hurries_ts"],
                    knockdowns=vals["knockdowns_ts"],
                ),
                prot_nts=PassProtectStats(
                    sacks=vals["sacks_nts"],
                    sack_yards=vals["sack_yards_nts"],
                    pressures=vals["pressures_nts"],
                    hurries=vals["hurries_nts"],
                    knockdowns=vals["knockdowns_nts"],
                ),
                qb_release_time=vals["qb_release_time"],
                release_attempts=vals["release_attempts"],
                release_time_under_pressure=vals["release_time_under_pressure"],
                release_attempts_under_pressure=vals["release_attempts_under_pressure"],
            )
            try:
                record.validate()
            except InvariantError as exc:
                raise InvariantError(f"line {line_no}: {exc}") from None
            records.append(record)
    return records


def season_year_of(game_date: Date) -> int:
    """League-calendar season of a game: Jan/Feb games belong to the prior year's season."""
    return game_date.year - 1 if game_date.month <= 2 else game_date.year


@dataclass(frozen=True)
class SeasonTotals:
    """Additive season aggregates for one player-season, still split by side."""

    player_id: str
    season_year: int
    team: str
    position: str
    games: int
    snaps: int
    holding_penalties_rush: int
    holding_penalties_pass: int
    rush_ts: RushSideStats
    rush_nts: RushSideStats
    passing_yards: float
    dropbacks: int
    pass_attempts: int
    pass_completions: int
    prot_ts: PassProtectStats
    prot_nts: PassProtectStats
    qb_release_time: float  # weighted by release attempts
    release_attempts: int
    release_time_under_pressure: float
    release_attempts_under_pressure: int
    base_salary: float  # per-game mean
    signing_bonus: float
    incentives: float
    cap_value: float
    rookie_year: int
    draft_round: int
    draft_pick: int
    birthday: Date


def _sum_rush(sides: list[RushSideStats]) -> RushSideStats:
    return RushSideStats(
        attempts=sum(s.attempts for s in sides),
        stuffs=sum(s.stuffs for s in sides),
        yards=sum(s.yards for s in sides),
        yards_after_contact=sum(s.yards_after_contact for s in sides),
        touchdowns=sum(s.touchdowns for s in sides),
        successful=sum(s.successful for s in sides),
    )


def _sum_prot(sides: list[PassProtectStats]) -> PassProtectStats:
    return PassProtectStats(
        sacks=sum(s.sacks for s in sides),
        sack_yards=sum(s.sack_yards for s in sides),
        pressures=sum(s.pressures for s in sides),
        hurries=sum(s.hurries for s in sides),
        knockdowns=sum(s.knockdowns for s in sides),
    )


def _weighted_time(pairs: list[tuple[float, int]]) -> float:
    total = sum(w for _, w in pairs)
    if total == 0:
        return 0.0
    return sum(t * w for t, w in pairs) / total


def aggregate_season(records: list[GameRecord], player_id: str, season_year: int) -> SeasonTotals:
    """Sum one player's games for a season; release times are attempt-weighted means.

    Order-invariant: sums and weighted means do not depend on input ordering,
    and per-season identity fields are resolved deterministically.
    """
    games = sorted(
        (r for r in records if r.player_id == player_id and season_year_of(r.date) == season_year),
        key=lambda r: (r.date, r.game_id),
    )
    if not games:
        raise ValueError(f"no games for player {player_id!r} in season {season_year}")

    snaps_by_position: dict[str, int] = {}
    snaps_by_team: dict[str, int] = {}
    for g in games:
        snaps_by_position[g.position] = snaps_by_position.get(g.position, 0) + g.snaps
        snaps_by_team[g.team] = snaps_by_team.get(g.team, 0) + g.snaps
    position = max(sorted(snaps_by_position), key=lambda p: snaps_by_position[p])
    team = max(sorted(snaps_by_team), key=lambda t: snaps_by_team[t])

    n = len(games)
    return SeasonTotals(
        player_id=player_id,
        season_year=season_year,
        team=team,
        position=position,
        games=n,
        snaps=sum(g.snaps for g in games),
        holding_penalties_rush=sum(g.holding_penalties_rush for g in games),
        holding_penalties_pass=sum(g.holding_penalties_pass for g in games),
        rush_ts=_sum_rush([g.rush_ts for g in games]),
        rush_nts=_sum_rush([g.rush_nts for g in games]),
        passing_yards=sum(g.passing_yards for g in games),
        dropbacks=sum(g.dropbacks for g in games),
        pass_attempts=sum(g.pass_attempts for g in games),
        pass_completions=sum(g.pass_completions for g in games),
        prot_ts=_sum_prot([g.prot_ts for g in games]),
        prot_nts=_sum_prot([g.prot_nts for g in games]),
        qb_release_time=_weighted_time([(g.qb_release_time, g.release_attempts) for g in games]),
        release_attempts=sum(g.release_attempts for g in games),
        release_time_under_pressure=_weighted_time(
            [(g.release_time_under_pressure, g.release_attempts_under_pressure) for g in games]
        ),
        release_attempts_under_pressure=sum(g.release_attempts_under_pressure for g in games),
        base_salary=sum(g.base_salary for g in games) / n,
        signing_bonus=sum(g.signing_bonus for g in games) / n,
        incentives=sum(g.incentives for g in games) / n,
        cap_value=sum(g.cap_value for g in games) / n,
        rookie_year=games[0].rookie_year,
        draft_round=games[0].draft_round,
        draft_pick=games[0].draft_pick,
        birthday=games[0].birthday,
    )


@dataclass(frozen=True)
class Differentials:
    """To-side minus (or divided by) not-to-side season statistics."""

    stuff_pct_diff: float
    yds_per_attempt_diff: float
    yac_per_attempt_diff: float
    ybc_per_attempt_diff: float
    successful_run_pct_diff: float
    rush_td_per_attempt_diff: float
    pressure_allowed_diff: float
    pressure_pct: float
    sack_pct: float
    att_per_dropback: float
    flags: tuple[str, ...] = ()


DIFFERENTIAL_NAMES = (
    "stuff_pct_diff",
    "yds_per_attempt_diff",
    "yac_per_attempt_diff",
    "ybc_per_attempt_diff",
    "successful_run_pct_diff",
    "rush_td_per_attempt_diff",
    "pressure_allowed_diff",
    "pressure_pct",
    "sack_pct",
    "att_per_dropback",
)


def compute_differentials(totals: SeasonTotals) -> Differentials:
    """Derive the differential statistics block from per-side season totals.

    Zero denominators yield a 0.0 rate plus a flag; a zero not-to-side count
    under a positive to-side count in the pressure/sack ratios is floored at
    half a count so the ratio stays finite while preserving the signal.
    """
    flags: list[str] = []

    ts, nts = totals.rush_ts, totals.rush_nts
    if ts.attempts == 0:
        flags.append("zero_rush_attempts_ts")
    if nts.attempts == 0:
        flags.append("zero_rush_attempts_nts")

    def side_rate(numer: float, attempts: int) -> float:
        return numer / attempts if attempts else 0.0

    stuff_pct_diff = 100.0 * (side_rate(ts.stuffs, ts.attempts) - side_rate(nts.stuffs, nts.attempts))
    yds_diff = side_rate(ts.yards, ts.attempts) - side_rate(nts.yards, nts.attempts)
    yac_diff = side_rate(ts.yards_after_contact, ts.attempts) - side_rate(nts.yards_after_contact, nts.attempts)
    ybc_ts = ts.yards - ts.yards_after_contact
    ybc_nts = nts.yards - nts.yards_after_contact
    ybc_diff = side_rate(ybc_ts, ts.attempts) - side_rate(ybc_nts, nts.attempts)
    successful_diff = 100.0 * (side_rate(ts.successful, ts.attempts) - side_rate(nts.successful, nts.attempts))
    td_diff = side_rate(ts.touchdowns, ts.attempts) - side_rate(nts.touchdowns, nts.attempts)

    def side_ratio(ts_count: int, nts_count: int, name: str) -> float:
        if nts_count == 0:
            if ts_count == 0:
                return 0.0
            flags.append(f"{name}_floor")
            return ts_count / 0.5
        return ts_count / nts_count

    pressure_pct = side_ratio(totals.prot_ts.pressures, totals.prot_nts.pressures, "pressure_pct")
    sack_pct = side_ratio(totals.prot_ts.sacks, totals.prot_nts.sacks, "sack_pct")

    if totals.dropbacks == 0:
        flags.append("zero_dropbacks")
        pressure_allowed_diff = 0.0
        att_per_dropback = 0.0
    else:
        pressure_allowed_diff = (totals.prot_ts.pressures - totals.prot_nts.pressures) / totals.dropbacks
        att_per_dropback = totals.pass_attempts / totals.dropbacks

    return Differentials(
        stuff_pct_diff=stuff_pct_diff,
        yds_per_attempt_diff=yds_diff,
        yac_per_attempt_diff=yac_diff,
        ybc_per_attempt_diff=ybc_diff,
        successful_run_pct_diff=successful_diff,
        rush_td_per_attempt_diff=td_diff,
        pressure_allowed_diff=pressure_allowed_diff,
        pressure_pct=pressure_pct,
        sack_pct=sack_pct,
        att_per_dropback=att_per_dropback,
        flags=tuple(sorted(set(flags))),
    )


@dataclass(frozen=True)
class SeasonFeatureVector:
    """Player-season aggregate used by the pricing and clustering stages."""

    player_id: str
    season_year: int
    team: str
    position: str
    snaps: float
    age: float
    experience: float
    draft_round: int
    draft_pick: int
    pro_bowls: float
    ap_all_pro_1st: float
    ap_all_pro_2nd: float
    pfw_all_pro: float
    pff_prior_avg: float
    pff_current: float
    differentials: Differentials
    cap_value_nominal: float
    cap_value_adjusted: float
    signing_year: int
    rookie_contract: bool
    unrestricted_fa_at_signing: bool
    flags: tuple[str, ...] = ()
    seasons_included: tuple[int, ...] = ()  # >1 entry only for averaged regression rows


# Feature names addressable in models; E = experience-type, P = performance-type.
EXPERIENCE_FEATURES = (
    "age",
    "experience",
    "draft_round",
    "draft_pick",
    "pro_bowls",
    "ap_all_pro_1st",
    "ap_all_pro_2nd",
    "pfw_all_pro",
    "pff_prior_avg",
)
PERFORMANCE_FEATURES = DIFFERENTIAL_NAMES + ("pff_current",)
FEATURE_NAMES = EXPERIENCE_FEATURES + PERFORMANCE_FEATURES


def feature_value(season: SeasonFeatureVector, name: str) -> float:
    """Look up a model feature on a season vector by its canonical name."""
    if name in DIFFERENTIAL_NAMES:
        return float(getattr(season.differentials, name))
    if name in FEATURE_NAMES:
        return float(getattr(season, name))
    raise KeyError(f"unknown feature {name!r}")


def age_at_season_start(birthday: Date, season_year: int) -> int:
    """Full years of age on Sep 1 of the season year."""
    age = season_year - birthday.year
    if (birthday.month, birthday.day) > (9, 1):
        age -= 1
    return age


def _load_keyed_csv(path: str | Path, required: list[str], key_cols: list[str]) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing required column(s): {', '.join(missing)}")
        rows = list(reader)
    seen: set[tuple[str, ...]] = set()
    for row in rows:
        key = tuple(row[c].strip() for c in key_cols)
        if key in seen:
            raise SchemaError(f"{path}: duplicate key {key}")
        seen.add(key)
    return rows


def load_awards(path: str | Path) -> list[dict]:
    rows = _load_keyed_csv(
        path, ["player_id", "season_year", "pro_bowl", "ap1", "ap2", "pfw"], ["player_id", "season_year"]
    )
    return [
        {
            "player_id": r["player_id"].strip(),
            "season_year": int(r["season_year"]),
            "pro_bowl": int(r["pro_bowl"]),
            "ap1": int(r["ap1"]),
            "ap2": int(r["ap2"]),
            "pfw": int(r["pfw"]),
        }
        for r in rows
    ]


def load_pff(path: str | Path) -> list[dict]:
    rows = _load_keyed_csv(path, ["player_id", "season_year", "rating"], ["player_id", "season_year"])
    return [
        {"player_id": r["player_id"].strip(), "season_year": int(r["season_year"]), "rating": float(r["rating"])}
        for r in rows
    ]


def load_contracts(path: str | Path) -> list[dict]:
    rows = _load_keyed_csv(
        path,
        ["player_id", "signing_year", "rookie_contract", "ufa", "cap_value"],
        ["player_id", "signing_year"],
    )
    return [
        {
            "player_id": r["player_id"].strip(),
            "signing_year": int(r["signing_year"]),
            "rookie_contract": bool(int(r["rookie_contract"])),
            "ufa": bool(int(r["ufa"])),
            "cap_value": float(r["cap_value"]),
        }
        for r in rows
    ]


def merge_external(
    seasons: list[SeasonTotals],
    awards: list[dict],
    pff: list[dict],
    contracts: list[dict],
    cap_table: dict[int, float],
    reference_year: int,
) -> list[SeasonFeatureVector]:
    """Attach awards, film grades, and contract metadata to season totals.

    Award counts are selections in seasons strictly before the season in
    question; the prior film-grade average covers seasons strictly before the
    governing contract's signing year. Missing grades impute to 0.0 (the
    league-expected grade) with a flag. Every season must resolve to a
    contract signed in or before its year.
    """
    awards_by_player: dict[str, list[dict]] = {}
    for row in awards:
        awards_by_player.setdefault(row["player_id"], []).append(row)
    pff_by_player: dict[str, dict[int, float]] = {}
    for row in pff:
        pff_by_player.setdefault(row["player_id"], {})[row["season_year"]] = row["rating"]
    contracts_by_player: dict[str, list[dict]] = {}
    for row in contracts:
        contracts_by_player.setdefault(row["player_id"], []).append(row)

    out = []
    for season in seasons:
        pid, year = season.player_id, season.season_year
        flags = list(compute_differentials(season).flags)

        candidates = [c for c in contracts_by_player.get(pid, []) if c["signing_year"] <= year]
        if not candidates:
            raise SchemaError(f"no contract covering player {pid!r} season {year}")
        contract = max(candidates, key=lambda c: c["signing_year"])

        prior = [r for r in awards_by_player.get(pid, []) if r["season_year"] < year]
        pro_bowls = sum(r["pro_bowl"] for r in prior)
        ap1 = sum(r["ap1"] for r in prior)
        ap2 = sum(r["ap2"] for r in prior)
        pfw = sum(r["pfw"] for r in prior)

        ratings = pff_by_player.get(pid, {})
        before_signing = [v for y, v in ratings.items() if y < contract["signing_year"]]
        if before_signing:
            pff_prior_avg = sum(before_signing) / len(before_signing)
        else:
            pff_prior_avg = 0.0
            flags.append("missing_pff_prior")
        if year in ratings:
            pff_current = ratings[year]
        else:
            pff_current = 0.0
            flags.append("missing_pff_current")

        diffs = compute_differentials(season)
        draft_round = season.draft_round if season.draft_round > 0 else UNDRAFTED_ROUND
        draft_pick = season.draft_pick if season.draft_pick > 0 else UNDRAFTED_PICK
        nominal = contract["cap_value"]
        adjusted = adjust_cap_inflation(nominal, contract["signing_year"], cap_table, reference_year)
        out.append(
            SeasonFeatureVector(
                player_id=pid,
                season_year=year,
                team=season.team,
                position=season.position,
                snaps=season.snaps,
                age=age_at_season_start(season.birthday, year),
                experience=year - season.rookie_year,
                draft_round=draft_round,
                draft_pick=draft_pick,
                pro_bowls=pro_bowls,
                ap_all_pro_1st=ap1,
                ap_all_pro_2nd=ap2,
                pfw_all_pro=pfw,
                pff_prior_avg=pff_prior_avg,
                pff_current=pff_current,
                differentials=diffs,
                cap_value_nominal=nominal,
                cap_value_adjusted=adjusted,
                signing_year=contract["signing_year"],
                rookie_contract=contract["rookie_contract"],
                unrestricted_fa_at_signing=contract["ufa"],
                flags=tuple(sorted(set(flags))),
                seasons_included=(year,),
            )
        )
    return out


def adjust_cap_inflation(
    salary: float, contract_year: int, cap_table: dict[int, float], reference_year: int
) -> float:
    """Rescale a salary from its contract year to reference-year cap dollars."""
    for year in (contract_year, reference_year):
        if year not in cap_table:
            raise KeyError(f"cap table has no entry for year {year}")
    return salary * cap_table[reference_year] / cap_table[contract_year]


def _average_rows(rows: list[SeasonFeatureVector]) -> SeasonFeatureVector:
    """Collapse the seasons of one contract into a single regression row."""
    rows = sorted(rows, key=lambda s: s.season_year)
    n = len(rows)
    if n == 1:
        return rows[0]

    def mean(get) -> float:
        return sum(get(s) for s in rows) / n

    diffs = Differentials(
        **{name: mean(lambda s, _n=name: getattr(s.differentials, _n)) for name in DIFFERENTIAL_NAMES},
        flags=tuple(sorted({f for s in rows for f in s.differentials.flags})),
    )
    base = rows[0]
    return replace(
        base,
        snaps=mean(lambda s: s.snaps),
        age=mean(lambda s: s.age),
        experience=mean(lambda s: s.experience),
        pro_bowls=mean(lambda s: s.pro_bowls),
        ap_all_pro_1st=mean(lambda s: s.ap_all_pro_1st),
        ap_all_pro_2nd=mean(lambda s: s.ap_all_pro_2nd),
        pfw_all_pro=mean(lambda s: s.pfw_all_pro),
        pff_prior_avg=mean(lambda s: s.pff_prior_avg),
        pff_current=mean(lambda s: s.pff_current),
        differentials=diffs,
        cap_value_nominal=mean(lambda s: s.cap_value_nominal),
        cap_value_adjusted=mean(lambda s: s.cap_value_adjusted),
        flags=tuple(sorted({f for s in rows for f in s.flags})),
        seasons_included=tuple(s.season_year for s in rows),
    )


def apply_exclusions(
    seasons: list[SeasonFeatureVector],
    *,
    min_signing_year: int = 2011,
    exclude_rookie_contracts: bool = True,
    require_ufa: bool = True,
) -> tuple[list[SeasonFeatureVector], list[SeasonFeatureVector]]:
    """Split enriched seasons into (regression_sample, clustering_sample).

    Both samples drop rookie-contract seasons, non-UFA signings, and contracts
    signed before the cutoff year. Seasons sharing one contract are averaged
    into a single regression observation but stay separate clustering rows.
    """
    eligible = []
    for s in seasons:
        if exclude_rookie_contracts and s.rookie_contract:
            continue
        if require_ufa and not s.unrestricted_fa_at_signing:
            continue
        if s.signing_year < min_signing_year:
            continue
        eligible.append(s)

    clustering = sorted(eligible, key=lambda s: (s.player_id, s.season_year))
    by_contract: dict[tuple[str, int], list[SeasonFeatureVector]] = {}
    for s in eligible:
        by_contract.setdefault((s.player_id, s.signing_year), []).append(s)
    regression = [_average_rows(rows) for _, rows in sorted(by_contract.items())]
    return regression, clustering


def group_player_seasons(records: list[GameRecord]) -> dict[tuple[str, int], list[GameRecord]]:
    """Group game records by (player_id, league-calendar season year)."""
    grouped: dict[tuple[str, int], list[GameRecord]] = {}
    for r in records:
        grouped.setdefault((r.player_id, season_year_of(r.date)), []).append(r)
    return grouped


def build_season_features(
    games_path: str | Path,
    awards_path: str | Path,
    pff_path: str | Path,
    contracts_path: str | Path,
    cap_table: dict[int, float],
    reference_year: int,
) -> list[SeasonFeatureVector]:
    """End-to-end ingestion: parse the four input files into enriched seasons."""
    records = parse_game_records(games_path)
    totals = [
        aggregate_season(group, pid, year)
        for (pid, year), group in sorted(group_player_seasons(records).items())
    ]
    return merge_external(
        totals,
        load_awards(awards_path),
        load_pff(pff_path),
        load_contracts(contracts_path),
        cap_table,
        reference_year,
    )
