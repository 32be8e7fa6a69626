"""Pipeline stages: each reads upstream flat files, writes its reports + manifest.

Stages are deterministic functions of (config, input files). Every stage
writes a machine-readable manifest recording the config hash, the seed, and
content hashes of the files it read and wrote, so reruns are verifiable.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import clustering, pricing, profiling, salary_dist, synthgen, valuation
from .config import RunConfig, config_hash, dump_config
from .dataset import (
    DIFFERENTIAL_NAMES,
    Differentials,
    SeasonFeatureVector,
    apply_exclusions,
    build_season_features,
    feature_value,
)
from .errors import DependencyError
from .util import read_json, sha256_file, write_csv, write_json

STAGE_ORDER = ("ingest", "price", "cluster", "profile", "fit-dist", "identify", "validate")

# Primary artifact per stage; downstream stages require their dependencies'.
_PRIMARY = {
    "ingest": "clustering_sample.csv",
    "price": "pricing_model.json",
    "cluster": "cluster_model.json",
    "profile": "directions.json",
    "fit-dist": "distribution_fits.json",
    "identify": "findings.csv",
    "validate": "validation.csv",
}
_DEPS = {
    "ingest": (),
    "price": ("ingest",),
    "cluster": ("ingest", "price"),
    "profile": ("ingest", "price", "cluster"),
    "fit-dist": ("ingest", "cluster"),
    "identify": ("ingest", "cluster", "profile", "fit-dist"),
    "validate": ("ingest", "identify"),
}

FINDINGS_HEADER = [
    "Player",
    "Year",
    "Team",
    "Position",
    "Cap Value",
    "Cluster",
    "Verdict",
    "Tail Probability",
    "Silhouette",
    "Gate Passed",
]
VALIDATION_HEADER = [
    "Player",
    "Year",
    "Position",
    "Relative Performance Rank",
    "Relative Salary Rank",
    "Verdict",
    "Corroborated",
]

_SAMPLE_META = ["player_id", "season_year", "team", "position", "snaps"]
_SAMPLE_FEATURES = [
    "age",
    "experience",
    "draft_round",
    "draft_pick",
    "pro_bowls",
    "ap_all_pro_1st",
    "ap_all_pro_2nd",
    "pfw_all_pro",
    "pff_prior_avg",
    "pff_current",
    *DIFFERENTIAL_NAMES,
]
_SAMPLE_TAIL = [
    "cap_value_nominal",
    "cap_value_adjusted",
    "signing_year",
    "rookie_contract",
    "unrestricted_fa_at_signing",
    "seasons_included",
    "flags",
]
SAMPLE_HEADER = _SAMPLE_META + _SAMPLE_FEATURES + _SAMPLE_TAIL


def stage_seed(seed: int, stage: str) -> int:
    """Per-stage integer seed; adding stages never shifts existing streams."""
    return (int(seed) << 32) ^ zlib.crc32(stage.encode("utf-8"))


def _season_row(s: SeasonFeatureVector) -> list:
    row = [s.player_id, s.season_year, s.team, s.position, s.snaps]
    row += [feature_value(s, name) for name in _SAMPLE_FEATURES]
    row += [
        s.cap_value_nominal,
        s.cap_value_adjusted,
        s.signing_year,
        int(s.rookie_contract),
        int(s.unrestricted_fa_at_signing),
        ";".join(str(y) for y in s.seasons_included),
        ";".join(s.flags),
    ]
    return row


def write_sample(path: Path, rows: list[SeasonFeatureVector]) -> None:
    write_csv(path, SAMPLE_HEADER, (_season_row(s) for s in rows))


def read_sample(path: Path) -> list[SeasonFeatureVector]:
    out = []
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            diffs = Differentials(**{n: float(row[n]) for n in DIFFERENTIAL_NAMES})
            out.append(
                SeasonFeatureVector(
                    player_id=row["player_id"],
                    season_year=int(row["season_year"]),
                    team=row["team"],
                    position=row["position"],
                    snaps=float(row["snaps"]),
                    age=float(row["age"]),
                    experience=float(row["experience"]),
                    draft_round=int(float(row["draft_round"])),
                    draft_pick=int(float(row["draft_pick"])),
                    pro_bowls=float(row["pro_bowls"]),
                    ap_all_pro_1st=float(row["ap_all_pro_1st"]),
                    ap_all_pro_2nd=float(row["ap_all_pro_2nd"]),
                    pfw_all_pro=float(row["pfw_all_pro"]),
                    pff_prior_avg=float(row["pff_prior_avg"]),
                    pff_current=float(row["pff_current"]),
                    differentials=diffs,
                    cap_value_nominal=float(row["cap_value_nominal"]),
                    cap_value_adjusted=float(row["cap_value_adjusted"]),
                    signing_year=int(row["signing_year"]),
                    rookie_contract=row["rookie_contract"] == "1",
                    unrestricted_fa_at_signing=row["unrestricted_fa_at_signing"] == "1",
                    flags=tuple(x for x in row["flags"].split(";") if x),
                    seasons_included=tuple(int(y) for y in row["seasons_included"].split(";") if y),
                )
            )
    return out


def _require(cfg: RunConfig, stage: str) -> None:
    for dep in _DEPS[stage]:
        artifact = Path(cfg.out_dir) / _PRIMARY[dep]
        if not artifact.exists():
            raise DependencyError(
                f"stage {stage!r} needs {artifact.name} from stage {dep!r}; run `linevalue {dep}` first"
            )


def _manifest(cfg: RunConfig, stage: str, inputs: list[Path], outputs: list[Path]) -> Path:
    payload = {
        "stage": stage,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "inputs": {p.name: sha256_file(p) for p in sorted(inputs)},
        "outputs": {p.name: sha256_file(p) for p in sorted(outputs)},
    }
    path = Path(cfg.out_dir) / f"manifest_{stage.replace('-', '_')}.json"
    write_json(path, payload)
    return path


# ---------------------------------------------------------------------------
# Feature resolution shared by clustering/profiling stages


def _metric_map(out_dir: Path) -> dict[tuple[str, int], dict[str, float]]:
    out: dict[tuple[str, int], dict[str, float]] = {}
    with open(out_dir / "player_metrics.csv", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            key = (row["player_id"], int(row["season_year"]))
            tp = float(row["team_performance_metric"]) if row["team_performance_metric"] else 0.0
            te = float(row["team_experience_metric"]) if row["team_experience_metric"] else 0.0
            out[key] = {
                "team_performance_metric": tp,
                "team_experience_metric": te,
                "team_performance_metric_sq": tp * tp,
                "team_experience_metric_sq": te * te,
            }
    return out


def _row_value(s: SeasonFeatureVector, name: str, metrics: dict[tuple[str, int], dict[str, float]]) -> float:
    if name in pricing.TEAM_METRIC_NAMES:
        return metrics[(s.player_id, s.season_year)][name]
    return feature_value(s, name)


def _feature_matrix(
    rows: list[SeasonFeatureVector], names: tuple[str, ...], metrics
) -> np.ndarray:
    return np.array([[_row_value(s, n, metrics) for n in names] for s in rows], dtype=float)


def _load_model(out_dir: Path) -> dict:
    return read_json(out_dir / "pricing_model.json")


def _model_predictors(model_payload: dict) -> tuple[str, ...]:
    return tuple(t["name"] for t in model_payload["model"]["terms"])


def _model_coefficients(model_payload: dict) -> dict[str, float]:
    return {t["name"]: float(t["coefficient"]) for t in model_payload["model"]["terms"]}


def _cluster_rows(out_dir: Path) -> list[dict]:
    with open(out_dir / "clusters.csv", encoding="utf-8", newline="") as f:
        return [
            {
                "player_id": r["player_id"],
                "season_year": int(r["season_year"]),
                "cluster": int(r["cluster"]),
                "silhouette": float(r["silhouette"]),
            }
            for r in csv.DictReader(f)
        ]


# ---------------------------------------------------------------------------
# Stages


def stage_ingest(cfg: RunConfig) -> None:
    out = Path(cfg.out_dir)
    inputs = [Path(cfg.games_csv), Path(cfg.awards_csv), Path(cfg.pff_csv), Path(cfg.contracts_csv)]
    seasons = build_season_features(
        cfg.games_csv, cfg.awards_csv, cfg.pff_csv, cfg.contracts_csv, cfg.cap_table, cfg.reference_year
    )
    regression, cluster_rows = apply_exclusions(
        seasons,
        min_signing_year=cfg.min_signing_year,
        exclude_rookie_contracts=cfg.exclude_rookie_contracts,
        require_ufa=cfg.require_ufa,
    )
    all_path = out / "seasons_all.csv"
    reg_path = out / "regression_sample.csv"
    clu_path = out / "clustering_sample.csv"
    write_sample(all_path, sorted(seasons, key=lambda s: (s.player_id, s.season_year)))
    write_sample(reg_path, regression)
    write_sample(clu_path, cluster_rows)
    _manifest(cfg, "ingest", inputs, [all_path, reg_path, clu_path])


def _model_payload(model: pricing.PricingModel) -> dict:
    return {
        "intercept": model.intercept,
        "intercept_t": model.intercept_t,
        "intercept_p": model.intercept_p,
        "terms": [
            {"name": t.name, "coefficient": t.coefficient, "t_value": t.t_value, "p_value": t.p_value}
            for t in model.terms
        ],
        "adjusted_r2": model.adjusted_r2,
        "n": model.n,
        "rss": model.rss,
        "tss": model.tss,
    }


def stage_price(cfg: RunConfig) -> None:
    _require(cfg, "price")
    out = Path(cfg.out_dir)
    regression = read_sample(out / "regression_sample.csv")
    all_seasons = read_sample(out / "seasons_all.csv")

    candidates = tuple(cfg.candidates)
    if cfg.include_current_pff and "pff_current" not in candidates:
        candidates += ("pff_current",)
    data = pricing.RegressionData.from_seasons(regression, candidates)
    initial = pricing.stepwise_select(
        data, candidates, mode=cfg.stepwise_mode, p_enter=cfg.p_enter, p_exit=cfg.p_exit
    )
    partition = pricing.partition_predictors(initial)
    weights = pricing.normalized_weights(initial, partition)

    metrics = pricing.compute_player_metrics(weights, all_seasons)
    metrics = pricing.team_metrics(pricing.build_lineups(all_seasons), metrics)

    def contract_mean(row: SeasonFeatureVector, attr: str) -> float:
        vals = [getattr(metrics[(row.player_id, y)], attr) for y in row.seasons_included]
        return sum(vals) / len(vals)

    team_perf = np.array([contract_mean(r, "team_performance_metric") for r in regression])
    team_exp = np.array([contract_mean(r, "team_experience_metric") for r in regression])
    second = pricing.second_stage_selection(
        data, initial, team_perf, team_exp, candidates,
        mode=cfg.stepwise_mode, p_enter=cfg.p_enter, p_exit=cfg.p_exit,
    )

    payload = {
        "initial": _model_payload(second.initial),
        "augmented": _model_payload(second.augmented),
        "chosen": "augmented" if second.chose_augmented else "initial",
        "model": _model_payload(second.chosen),
        "partition": partition,
        "gamma": weights.gamma,
        "candidates": list(candidates),
    }
    model_path = out / "pricing_model.json"
    write_json(model_path, payload)

    from .reports import format_model_table

    txt_path = out / "pricing_model.txt"
    txt_path.write_text(format_model_table(second.chosen, partition, weights.gamma), encoding="utf-8")

    metrics_path = out / "player_metrics.csv"
    write_csv(
        metrics_path,
        [
            "player_id",
            "season_year",
            "performance_metric",
            "experience_metric",
            "team_performance_metric",
            "team_experience_metric",
        ],
        (
            [
                m.player_id,
                m.season_year,
                m.performance_metric,
                m.experience_metric,
                "" if m.team_performance_metric is None else m.team_performance_metric,
                "" if m.team_experience_metric is None else m.team_experience_metric,
            ]
            for m in sorted(metrics.values(), key=lambda m: (m.player_id, m.season_year))
        ),
    )
    _manifest(
        cfg,
        "price",
        [out / "regression_sample.csv", out / "seasons_all.csv"],
        [model_path, txt_path, metrics_path],
    )


def stage_cluster(cfg: RunConfig) -> None:
    _require(cfg, "cluster")
    out = Path(cfg.out_dir)
    rows = read_sample(out / "clustering_sample.csv")
    payload = _load_model(out)
    names = _model_predictors(payload)
    if not names:
        raise ValueError("the pricing model selected no predictors; nothing to cluster on")
    metrics = _metric_map(out)

    X = _feature_matrix(rows, names, metrics)
    Z, std = clustering.standardize(X, names)
    n = Z.shape[0]
    seed = stage_seed(cfg.seed, "cluster")

    k_values = [k for k in range(cfg.k_min, min(cfg.k_max, n) + 1)]
    wss = clustering.within_ss_sweep(Z, k_values, seed=seed, restarts=cfg.restarts)
    curve = clustering.kl_curve(wss, m=len(names))
    if cfg.k_override is not None:
        k_star, candidates, fallback = cfg.k_override, (), False
    else:
        selection = clustering.select_k(curve, rho=cfg.rho)
        k_star, candidates, fallback = selection.k_star, selection.candidates, selection.fallback
    if k_star < 2:
        raise ValueError(f"selected k = {k_star}; downstream stages need at least two clusters")

    solution = clustering.kmeans(Z, k_star, seed=seed, restarts=cfg.restarts)
    sil = clustering.silhouettes(Z, solution.assignments)

    clusters_path = out / "clusters.csv"
    write_csv(
        clusters_path,
        ["player_id", "season_year", "cluster", "silhouette"],
        (
            [s.player_id, s.season_year, int(solution.assignments[i]), float(sil.s[i])]
            for i, s in enumerate(rows)
        ),
    )
    curve_path = out / "kl_curve.csv"
    write_csv(
        curve_path,
        ["k", "within_ss", "diff", "c"],
        (
            [
                k,
                wss[k],
                "" if k not in curve.diff_by_k else curve.diff_by_k[k],
                "" if k not in curve.c_by_k else curve.c_by_k[k],
            ]
            for k in sorted(wss)
        ),
    )
    model_path = out / "cluster_model.json"
    write_json(
        model_path,
        {
            "attributes": list(names),
            "standardization": {"means": std.means.tolist(), "sds": std.sds.tolist()},
            "k_star": k_star,
            "k_candidates": list(candidates),
            "fallback": fallback,
            "k_override": cfg.k_override,
            "within_ss": solution.within_ss,
            "centroids": solution.centroids.tolist(),
            "mean_silhouette": sil.sample_mean,
            "seed": cfg.seed,
            "restarts": cfg.restarts,
        },
    )
    _manifest(
        cfg,
        "cluster",
        [out / "clustering_sample.csv", out / "pricing_model.json", out / "player_metrics.csv"],
        [clusters_path, curve_path, model_path],
    )


def stage_profile(cfg: RunConfig) -> None:
    _require(cfg, "profile")
    out = Path(cfg.out_dir)
    rows = read_sample(out / "clustering_sample.csv")
    payload = _load_model(out)
    names = _model_predictors(payload)
    coefficients = _model_coefficients(payload)
    metrics = _metric_map(out)
    clusters = _cluster_rows(out)
    by_key = {(r["player_id"], r["season_year"]): r["cluster"] for r in clusters}
    assignments = np.array([by_key[(s.player_id, s.season_year)] for s in rows], dtype=int)

    X = _feature_matrix(rows, names, metrics)
    counts = np.bincount(assignments)
    testable = np.array(
        [counts[c] >= 2 and (len(rows) - counts[c]) >= 2 for c in range(counts.size)]
    )
    profiles = []
    if testable.all():
        profiles = profiling.profile_clusters(
            X, names, assignments, coefficients, mode=cfg.ttest_mode, significance=cfg.significance
        )
    else:
        # Tiny clusters cannot be tested; characterize the rest normally.
        mask = testable[assignments]
        sub_profiles = profiling.profile_clusters(
            X[mask], names, assignments[mask], coefficients, mode=cfg.ttest_mode, significance=cfg.significance
        )
        by_cluster = {p.cluster: p for p in sub_profiles}
        for c in range(counts.size):
            if c in by_cluster:
                profiles.append(by_cluster[c])
            else:
                profiles.append(
                    profiling.ClusterProfile(
                        cluster=c,
                        size=int(counts[c]),
                        stats=(),
                        direction=profiling.TEST_BOTH,
                        narrative="Cluster too small to characterize",
                    )
                )

    profile_path = out / "cluster_profiles.csv"
    write_csv(
        profile_path,
        ["cluster", "predictor", "cluster_mean", "overall_mean", "t_value", "p_value", "significant"],
        (
            [p.cluster, st.name, st.cluster_mean, st.overall_mean, st.t_value, st.p_value, int(st.significant)]
            for p in profiles
            for st in p.stats
        ),
    )
    directions_path = out / "directions.json"
    write_json(
        directions_path,
        {
            str(p.cluster): {"direction": p.direction, "narrative": p.narrative, "size": p.size}
            for p in profiles
        },
    )
    _manifest(
        cfg,
        "profile",
        [out / "clustering_sample.csv", out / "pricing_model.json", out / "clusters.csv"],
        [profile_path, directions_path],
    )


def _fit_payload(fit: salary_dist.FittedSalaryDistribution) -> dict:
    chi = None
    if fit.chi_squared is not None:
        chi = {
            "statistic": fit.chi_squared.statistic,
            "bin_count": fit.chi_squared.bin_count,
            "dof": fit.chi_squared.dof,
            "p_value": fit.chi_squared.p_value,
        }
    return {
        "family": fit.family,
        "lower": fit.lower,
        "upper": fit.upper,
        "params": fit.params,
        "log_likelihood": fit.log_likelihood,
        "aic": fit.aic,
        "n": fit.n,
        "converged": fit.converged,
        "chi_squared": chi,
        "chi_note": fit.chi_note,
    }


def stage_fit_dist(cfg: RunConfig) -> None:
    _require(cfg, "fit-dist")
    out = Path(cfg.out_dir)
    rows = read_sample(out / "clustering_sample.csv")
    clusters = _cluster_rows(out)
    by_key = {(r["player_id"], r["season_year"]): r["cluster"] for r in clusters}
    salaries_by_cluster: dict[int, list[float]] = {}
    for s in rows:
        c = by_key[(s.player_id, s.season_year)]
        salaries_by_cluster.setdefault(c, []).append(s.cap_value_adjusted)

    all_salaries = [s.cap_value_adjusted for s in rows]
    lower = cfg.dist_lower if cfg.dist_lower is not None else 0.95 * min(all_salaries)
    if lower >= min(all_salaries):
        raise ValueError(f"distribution lower bound {lower} is not below the minimum salary {min(all_salaries)}")

    fits_payload: dict[str, dict] = {}
    ranking_rows = []
    outputs = []
    for c in sorted(salaries_by_cluster):
        sel = salary_dist.select_distribution(
            salaries_by_cluster[c],
            lower,
            cluster=c,
            min_size=cfg.min_cluster_size,
            beta_upper_factor=cfg.beta_upper_factor,
        )
        if sel.skipped:
            fits_payload[str(c)] = {"skipped": True, "reason": sel.reason}
            continue
        fits_payload[str(c)] = {"skipped": False, "reason": None, **_fit_payload(sel.best)}
        for fit in sel.ranking:
            ranking_rows.append(
                [
                    c,
                    fit.family,
                    ";".join(f"{k}={v!r}" for k, v in sorted(fit.params.items())),
                    fit.log_likelihood,
                    fit.aic,
                    "" if fit.chi_squared is None else fit.chi_squared.statistic,
                    "" if fit.chi_squared is None else fit.chi_squared.p_value,
                ]
            )
        pp_path = out / f"pp_cluster{c}.csv"
        qq_path = out / f"qq_cluster{c}.csv"
        write_csv(pp_path, ["theoretical", "empirical"], sel.best.pp_series)
        write_csv(qq_path, ["theoretical", "empirical"], sel.best.qq_series)
        outputs += [pp_path, qq_path]

    fits_path = out / "distribution_fits.json"
    write_json(fits_path, fits_payload)
    ranking_path = out / "fit_ranking.csv"
    write_csv(
        ranking_path,
        ["cluster", "family", "params", "log_likelihood", "aic", "chi_statistic", "chi_p_value"],
        ranking_rows,
    )
    _manifest(
        cfg,
        "fit-dist",
        [out / "clustering_sample.csv", out / "clusters.csv"],
        [fits_path, ranking_path] + outputs,
    )


def _fit_from_payload(payload: dict) -> salary_dist.FittedSalaryDistribution:
    return salary_dist.FittedSalaryDistribution(
        family=payload["family"],
        lower=payload["lower"],
        upper=payload["upper"],
        params={k: float(v) for k, v in payload["params"].items()},
        log_likelihood=payload["log_likelihood"],
        aic=payload["aic"],
        n=payload["n"],
        converged=payload["converged"],
    )


def _finding_row(f: valuation.ValuationFinding) -> list:
    return [
        f.player_id,
        f.season_year,
        f.team,
        f.position,
        f.cap_value_nominal,
        f.cluster,
        f.verdict,
        f.tail_probability,
        f.silhouette,
        int(f.gate_passed),
    ]


def stage_identify(cfg: RunConfig) -> None:
    _require(cfg, "identify")
    out = Path(cfg.out_dir)
    rows = read_sample(out / "clustering_sample.csv")
    clusters = _cluster_rows(out)
    cluster_model = read_json(out / "cluster_model.json")
    directions = read_json(out / "directions.json")
    fits = read_json(out / "distribution_fits.json")
    mean_sil = float(cluster_model["mean_silhouette"])

    info = {(r["player_id"], r["season_year"]): r for r in clusters}
    members_by_cluster: dict[int, list[valuation.ClusterMember]] = {}
    for s in rows:
        r = info[(s.player_id, s.season_year)]
        members_by_cluster.setdefault(r["cluster"], []).append(
            valuation.ClusterMember(
                player_id=s.player_id,
                season_year=s.season_year,
                team=s.team,
                position=s.position,
                cap_value_nominal=s.cap_value_nominal,
                cap_value_adjusted=s.cap_value_adjusted,
                silhouette=r["silhouette"],
            )
        )

    all_candidates: list[valuation.ValuationFinding] = []
    all_findings: list[valuation.ValuationFinding] = []
    summary = {}
    for c in sorted(members_by_cluster):
        fit_payload = fits.get(str(c))
        if fit_payload is None or fit_payload.get("skipped"):
            reason = "no fitted distribution" if fit_payload is None else fit_payload["reason"]
            summary[str(c)] = {"tested": False, "reason": reason}
            continue
        direction = directions[str(c)]["direction"]
        dist = _fit_from_payload(fit_payload)
        result = valuation.identify(
            members_by_cluster[c], dist, direction, mean_sil, alpha=cfg.alpha, cluster=c
        )
        all_candidates.extend(result.candidates)
        all_findings.extend(result.findings)
        summary[str(c)] = {
            "tested": True,
            "direction": direction,
            "candidates": len(result.candidates),
            "findings": len(result.findings),
        }

    key = lambda f: (f.player_id, f.season_year)
    findings_path = out / "findings.csv"
    write_csv(findings_path, FINDINGS_HEADER, (_finding_row(f) for f in sorted(all_findings, key=key)))
    candidates_path = out / "candidates.csv"
    write_csv(candidates_path, FINDINGS_HEADER, (_finding_row(f) for f in sorted(all_candidates, key=key)))
    summary_path = out / "identify_summary.json"
    write_json(summary_path, summary)
    _manifest(
        cfg,
        "identify",
        [
            out / "clustering_sample.csv",
            out / "clusters.csv",
            out / "cluster_model.json",
            out / "directions.json",
            out / "distribution_fits.json",
        ],
        [findings_path, candidates_path, summary_path],
    )


def stage_validate(cfg: RunConfig) -> None:
    _require(cfg, "validate")
    out = Path(cfg.out_dir)
    rows = read_sample(out / "clustering_sample.csv")
    sample = [
        {
            "player_id": s.player_id,
            "season_year": s.season_year,
            "position": s.position,
            "cap_value": s.cap_value_nominal,
            "rating": None if "missing_pff_current" in s.flags else s.pff_current,
        }
        for s in rows
    ]
    findings = []
    with open(out / "findings.csv", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            findings.append(
                valuation.ValuationFinding(
                    player_id=row["Player"],
                    season_year=int(row["Year"]),
                    team=row["Team"],
                    position=row["Position"],
                    cap_value_nominal=float(row["Cap Value"]),
                    cluster=int(row["Cluster"]),
                    verdict=row["Verdict"],
                    tail_probability=float(row["Tail Probability"]),
                    silhouette=float(row["Silhouette"]),
                    gate_passed=row["Gate Passed"] == "1",
                )
            )
    rank_rows = valuation.rank_validation(findings, sample, min_gap=cfg.rank_gap)
    path = out / "validation.csv"
    write_csv(
        path,
        VALIDATION_HEADER,
        (
            [
                r.player_id,
                r.season_year,
                r.position_group,
                "" if r.performance_rank is None else r.performance_rank,
                "" if r.salary_rank is None else r.salary_rank,
                r.verdict,
                "not_comparable" if r.corroborated is None else ("yes" if r.corroborated else "no"),
            ]
            for r in rank_rows
        ),
    )
    _manifest(cfg, "validate", [out / "clustering_sample.csv", out / "findings.csv"], [path])


def stage_synth(cfg: RunConfig) -> RunConfig:
    """Generate the configured scenario and point the config at its files."""
    if cfg.synth_scenario is None:
        raise ValueError("config has no synth_scenario to generate")
    out = Path(cfg.out_dir)
    kwargs = {}
    if cfg.synth_archetypes is not None and cfg.synth_scenario == "separable":
        kwargs["n_archetypes"] = cfg.synth_archetypes
    synth_cfg = synthgen.preset_config(cfg.synth_scenario, seed=cfg.seed, **kwargs)
    league = synthgen.generate_league(synth_cfg)
    paths = synthgen.write_league(league, out / "inputs")

    updated = replace(
        cfg,
        games_csv=str(paths["games"]),
        awards_csv=str(paths["awards"]),
        pff_csv=str(paths["pff"]),
        contracts_csv=str(paths["contracts"]),
        cap_table=dict(synth_cfg.cap_table),
        reference_year=synth_cfg.reference_year,
        dist_lower=cfg.dist_lower if cfg.dist_lower is not None else synth_cfg.salary_floor,
    )
    dump_config(updated, out / "inputs" / "pipeline_config.yaml")
    _manifest(cfg, "synth", [], sorted(paths.values()))
    return updated


_STAGE_FNS = {
    "ingest": stage_ingest,
    "price": stage_price,
    "cluster": stage_cluster,
    "profile": stage_profile,
    "fit-dist": stage_fit_dist,
    "identify": stage_identify,
    "validate": stage_validate,
}


def run_stage(name: str, cfg: RunConfig) -> None:
    if name == "synth":
        stage_synth(cfg)
        return
    if name not in _STAGE_FNS:
        raise ValueError(f"unknown stage {name!r}")
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    _STAGE_FNS[name](cfg)


def run_pipeline(cfg: RunConfig, stage_from: str | None = None) -> None:
    """Run every stage in order; generates scenario inputs first when configured."""
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    if cfg.synth_scenario is not None:
        cfg = stage_synth(cfg)
    start = 0
    if stage_from is not None:
        if stage_from not in STAGE_ORDER:
            raise ValueError(f"unknown stage {stage_from!r}; expected one of {STAGE_ORDER}")
        start = STAGE_ORDER.index(stage_from)
    for name in STAGE_ORDER[start:]:
        _STAGE_FNS[name](cfg)
