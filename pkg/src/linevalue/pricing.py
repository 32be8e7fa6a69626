"""Labor-market salary model: stepwise OLS, metric weights, neighbor controls.

Fits cap value against lineman characteristics, partitions the selected
predictors into experience/performance sets, derives normalized weights and
per-player composite metrics, and runs the second-stage comparison that adds
linemate (team) metrics as candidate controls.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import (
    EXPERIENCE_FEATURES,
    PERFORMANCE_FEATURES,
    SeasonFeatureVector,
    feature_value,
)
from .errors import CollinearityError

# Default candidate pool: demographics and past-honors proxies plus the
# run/pass differential statistics judged most descriptive of line play.
# The current-season film grade is appended by callers that want it assessed.
DEFAULT_CANDIDATES = (
    "age",
    "experience",
    "draft_round",
    "draft_pick",
    "pro_bowls",
    "ap_all_pro_1st",
    "ap_all_pro_2nd",
    "pfw_all_pro",
    "pff_prior_avg",
    "stuff_pct_diff",
    "yds_per_attempt_diff",
    "successful_run_pct_diff",
    "pressure_allowed_diff",
    "pressure_pct",
    "sack_pct",
)

TEAM_METRIC_NAMES = (
    "team_performance_metric",
    "team_experience_metric",
    "team_performance_metric_sq",
    "team_experience_metric_sq",
)

# Line order for neighbor lookups; tackles have a single neighbor.
_NEIGHBORS = {
    "LT": ("LG",),
    "LG": ("LT", "C"),
    "C": ("LG", "RG"),
    "RG": ("C", "RT"),
    "RT": ("RG",),
}


@dataclass(frozen=True)
class ModelTerm:
    name: str
    coefficient: float
    t_value: float
    p_value: float


@dataclass(frozen=True)
class PricingModel:
    """Fitted linear salary model with per-term inference statistics."""

    intercept: float
    intercept_t: float
    intercept_p: float
    terms: tuple[ModelTerm, ...]
    adjusted_r2: float
    n: int
    rss: float
    tss: float

    @property
    def predictor_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms)

    def coefficient(self, name: str) -> float:
        for t in self.terms:
            if t.name == name:
                return t.coefficient
        raise KeyError(f"predictor {name!r} not in model")

    def predict(self, features: dict[str, float]) -> float:
        return self.intercept + sum(t.coefficient * features[t.name] for t in self.terms)


@dataclass(frozen=True)
class RegressionData:
    """Named predictor columns plus the salary target, shared by model stages."""

    names: tuple[str, ...]
    X: np.ndarray  # n x len(names), no intercept column
    y: np.ndarray

    @classmethod
    def from_seasons(
        cls, seasons: list[SeasonFeatureVector], names: tuple[str, ...] | list[str]
    ) -> "RegressionData":
        names = tuple(names)
        X = np.array([[feature_value(s, n) for n in names] for s in seasons], dtype=float)
        y = np.array([s.cap_value_adjusted for s in seasons], dtype=float)
        return cls(names=names, X=X, y=y)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def subset(self, names: tuple[str, ...]) -> np.ndarray:
        idx = [self.names.index(n) for n in names]
        return self.X[:, idx]

    def with_columns(self, extra: dict[str, np.ndarray]) -> "RegressionData":
        cols = [np.asarray(v, dtype=float).reshape(-1, 1) for v in extra.values()]
        return RegressionData(
            names=self.names + tuple(extra.keys()),
            X=np.hstack([self.X] + cols) if cols else self.X,
            y=self.y,
        )


def _independent_columns(X: np.ndarray) -> list[int]:
    """Greedy scan returning indices of a maximal linearly independent prefix set."""
    kept: list[int] = []
    for j in range(X.shape[1]):
        trial = X[:, kept + [j]]
        if np.linalg.matrix_rank(trial) == len(kept) + 1:
            kept.append(j)
    return kept


def ols_fit(X: np.ndarray, y: np.ndarray, names: tuple[str, ...] | list[str]) -> PricingModel:
    """Least-squares fit of y on X (leading ones column included in X).

    Returns coefficients with t statistics and two-sided p-values, plus the
    adjusted R-squared. Raises CollinearityError naming dependent columns
    when X is rank deficient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    names = tuple(names)
    n, p = X.shape
    if len(names) != p - 1:
        raise ValueError(f"got {len(names)} names for {p - 1} non-intercept columns")
    if n <= p:
        raise ValueError(f"need more observations ({n}) than parameters ({p})")

    rank = np.linalg.matrix_rank(X)
    if rank < p:
        kept = set(_independent_columns(X))
        all_names = ("(intercept)",) + names
        dependent = [all_names[j] for j in range(p) if j not in kept]
        raise CollinearityError(f"design matrix is rank deficient; dependent column(s): {', '.join(dependent)}")

    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    dof = n - p
    sigma2 = rss / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(np.diag(xtx_inv) * sigma2, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_vals = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    t_vals = np.where(np.isnan(t_vals), 0.0, t_vals)
    p_vals = 2.0 * stats.t.sf(np.abs(t_vals), dof)

    if tss > 0:
        adjusted_r2 = 1.0 - (rss / dof) / (tss / (n - 1))
    else:
        adjusted_r2 = 0.0
    terms = tuple(
        ModelTerm(name=names[j - 1], coefficient=float(beta[j]), t_value=float(t_vals[j]), p_value=float(p_vals[j]))
        for j in range(1, p)
    )
    return PricingModel(
        intercept=float(beta[0]),
        intercept_t=float(t_vals[0]),
        intercept_p=float(p_vals[0]),
        terms=terms,
        adjusted_r2=float(adjusted_r2),
        n=n,
        rss=rss,
        tss=tss,
    )


def _fit_named(data: RegressionData, selected: tuple[str, ...]) -> PricingModel:
    n = len(data.y)
    X = np.hstack([np.ones((n, 1)), data.subset(selected)])
    return ols_fit(X, data.y, selected)


def _aicc(model: PricingModel) -> float:
    """Small-sample-corrected information criterion for the fitted model."""
    n, p = model.n, len(model.terms) + 1
    if n - p - 1 <= 0:
        return np.inf
    rss = max(model.rss, 1e-12 * max(model.tss, 1.0))  # guard exact fits
    return n * np.log(rss / n) + 2 * p + 2 * p * (p + 1) / (n - p - 1)


def stepwise_select(
    data: RegressionData,
    candidates: tuple[str, ...] | list[str] | None = None,
    *,
    mode: str = "aicc",
    p_enter: float = 0.05,
    p_exit: float = 0.10,
    max_steps: int = 200,
) -> PricingModel:
    """Bidirectional stepwise search over the candidate predictors.

    Starting from the intercept-only model, each step first adds the candidate
    that most improves the criterion, then drops any included predictor whose
    removal improves it, stopping at a fixed point. Candidate evaluation is
    deterministic: ties break by predictor name. `mode` is "aicc" (default)
    or "pvalue" (entry/exit thresholds).
    """
    if candidates is None:
        candidates = DEFAULT_CANDIDATES
    if mode not in ("aicc", "pvalue"):
        raise ValueError(f"unknown stepwise mode {mode!r}")
    # Constant columns carry no information and would only alias the intercept.
    candidates = tuple(sorted(n for n in candidates if float(np.ptp(data.column(n))) > 0.0))
    selected: tuple[str, ...] = ()
    current = _fit_named(data, selected)
    n_obs = len(data.y)

    for _ in range(max_steps):
        changed = False

        can_grow = n_obs >= len(selected) + 4  # room for one more term + inference dof
        if mode == "aicc":
            best_crit = _aicc(current)
            best_name, best_model = None, None
            for name in candidates if can_grow else ():
                if name in selected:
                    continue
                trial = _fit_named(data, selected + (name,))
                crit = _aicc(trial)
                if crit < best_crit - 1e-10:
                    best_crit, best_name, best_model = crit, name, trial
            if best_name is not None:
                selected += (best_name,)
                current = best_model
                changed = True

            improved = True
            while improved and selected:
                improved = False
                best_crit = _aicc(current)
                drop_name, drop_model = None, None
                for name in selected:
                    remaining = tuple(x for x in selected if x != name)
                    trial = _fit_named(data, remaining)
                    crit = _aicc(trial)
                    if crit < best_crit - 1e-10:
                        best_crit, drop_name, drop_model = crit, name, trial
                if drop_name is not None:
                    selected = tuple(x for x in selected if x != drop_name)
                    current = drop_model
                    changed = True
                    improved = True
        else:
            best_p, best_name, best_model = p_enter, None, None
            for name in candidates if can_grow else ():
                if name in selected:
                    continue
                trial = _fit_named(data, selected + (name,))
                p_val = trial.terms[-1].p_value
                if p_val < best_p - 1e-12:
                    best_p, best_name, best_model = p_val, name, trial
            if best_name is not None:
                selected += (best_name,)
                current = best_model
                changed = True

            while selected:
                worst = max(current.terms, key=lambda t: (t.p_value, t.name))
                if worst.p_value <= p_exit:
                    break
                selected = tuple(x for x in selected if x != worst.name)
                current = _fit_named(data, selected)
                changed = True

        if not changed:
            break

    if not selected:
        warnings.warn("no candidate improved on the intercept-only model", stacklevel=2)
    return current


EXPERIENCE_SET = frozenset(EXPERIENCE_FEATURES)
PERFORMANCE_SET = frozenset(PERFORMANCE_FEATURES)


def partition_predictors(model: PricingModel) -> dict[str, str]:
    """Classify each selected predictor as experience ("E") or performance ("P")."""
    partition = {}
    for term in model.terms:
        if term.name in EXPERIENCE_SET:
            partition[term.name] = "E"
        elif term.name in PERFORMANCE_SET:
            partition[term.name] = "P"
        else:
            raise ValueError(f"predictor {term.name!r} is not in the experience/performance taxonomy")
    return partition


@dataclass(frozen=True)
class MetricWeights:
    """Coefficient shares within each predictor set; shares sum to 1 per set."""

    partition: dict[str, str]
    gamma: dict[str, float]

    def set_members(self, which: str) -> list[str]:
        return sorted(n for n, s in self.partition.items() if s == which)


def normalized_weights(model: PricingModel, partition: dict[str, str]) -> MetricWeights:
    """Weights gamma_j = alpha_j / sum of alphas within j's set.

    Raw (signed) sums are used, so individual weights may fall outside [0, 1]
    while still summing to one. A nonempty set whose coefficients sum to zero
    has undefined weights and raises; an empty set simply yields no weights.
    """
    gamma: dict[str, float] = {}
    for which in ("E", "P"):
        members = [t for t in model.terms if partition.get(t.name) == which]
        if not members:
            continue
        total = sum(t.coefficient for t in members)
        if total == 0.0:
            raise ValueError(f"coefficients in set {which} sum to zero; weights undefined")
        for t in members:
            gamma[t.name] = t.coefficient / total
    return MetricWeights(partition=dict(partition), gamma=gamma)


def player_metrics(weights: MetricWeights, features: dict[str, float]) -> tuple[float, float]:
    """Weighted (performance_metric, experience_metric) for one player-season."""
    perf = 0.0
    exp = 0.0
    for name, g in weights.gamma.items():
        if name not in features:
            raise KeyError(f"feature vector is missing weighted predictor {name!r}")
        if weights.partition[name] == "P":
            perf += g * features[name]
        else:
            exp += g * features[name]
    return perf, exp


@dataclass(frozen=True)
class PlayerMetrics:
    player_id: str
    season_year: int
    performance_metric: float
    experience_metric: float
    team_performance_metric: float | None = None
    team_experience_metric: float | None = None


def compute_player_metrics(
    weights: MetricWeights, seasons: list[SeasonFeatureVector]
) -> dict[tuple[str, int], PlayerMetrics]:
    out = {}
    for s in seasons:
        features = {name: feature_value(s, name) for name in weights.gamma}
        perf, exp = player_metrics(weights, features)
        out[(s.player_id, s.season_year)] = PlayerMetrics(
            player_id=s.player_id,
            season_year=s.season_year,
            performance_metric=perf,
            experience_metric=exp,
        )
    return out


def build_lineups(seasons: list[SeasonFeatureVector]) -> dict[tuple[str, int], dict[str, tuple[str, int]]]:
    """Primary player per (team, season, position), chosen by most snaps."""
    best: dict[tuple[str, int, str], tuple[float, str]] = {}
    for s in seasons:
        key = (s.team, s.season_year, s.position)
        entry = (-s.snaps, s.player_id)  # fewer snaps sorts later; name breaks ties
        if key not in best or entry < best[key]:
            best[key] = entry
    lineups: dict[tuple[str, int], dict[str, tuple[str, int]]] = {}
    for (team, year, position), (_, pid) in best.items():
        lineups.setdefault((team, year), {})[position] = (pid, year)
    return lineups


def team_metrics(
    lineups: dict[tuple[str, int], dict[str, tuple[str, int]]],
    metrics: dict[tuple[str, int], PlayerMetrics],
) -> dict[tuple[str, int], PlayerMetrics]:
    """Average each lineman's neighbors' metrics; tackles use their lone neighbor.

    Raises ValueError naming the vacancy when a required neighbor position has
    no primary player in the lineup.
    """
    out = dict(metrics)
    for (team, year), lineup in sorted(lineups.items()):
        for position, (pid, _) in sorted(lineup.items()):
            if (pid, year) not in metrics:
                continue
            neighbor_positions = _NEIGHBORS[position]
            neighbor_vals: list[PlayerMetrics] = []
            for npos in neighbor_positions:
                if npos not in lineup:
                    raise ValueError(f"lineup for {team} {year} has no primary {npos} (needed by {position})")
                n_pid, _ = lineup[npos]
                if (n_pid, year) not in metrics:
                    raise ValueError(f"no metrics for {npos} {n_pid!r} of {team} {year} (needed by {position})")
                neighbor_vals.append(metrics[(n_pid, year)])
            team_perf = sum(m.performance_metric for m in neighbor_vals) / len(neighbor_vals)
            team_exp = sum(m.experience_metric for m in neighbor_vals) / len(neighbor_vals)
            m = out[(pid, year)]
            out[(pid, year)] = PlayerMetrics(
                player_id=m.player_id,
                season_year=m.season_year,
                performance_metric=m.performance_metric,
                experience_metric=m.experience_metric,
                team_performance_metric=team_perf,
                team_experience_metric=team_exp,
            )
    return out


@dataclass(frozen=True)
class SecondStageResult:
    chosen: PricingModel
    initial: PricingModel
    augmented: PricingModel
    chose_augmented: bool


def second_stage_selection(
    data: RegressionData,
    initial: PricingModel,
    team_perf: np.ndarray,
    team_exp: np.ndarray,
    candidates: tuple[str, ...] | list[str] | None = None,
    *,
    mode: str = "aicc",
    p_enter: float = 0.05,
    p_exit: float = 0.10,
) -> SecondStageResult:
    """Re-run stepwise with team metrics (and squares) added to the pool.

    The augmented model replaces the initial one only when it strictly
    improves adjusted R-squared; ties keep the initial model.
    """
    if candidates is None:
        candidates = DEFAULT_CANDIDATES
    extra = {
        "team_performance_metric": np.asarray(team_perf, dtype=float),
        "team_experience_metric": np.asarray(team_exp, dtype=float),
        "team_performance_metric_sq": np.asarray(team_perf, dtype=float) ** 2,
        "team_experience_metric_sq": np.asarray(team_exp, dtype=float) ** 2,
    }
    augmented_data = data.with_columns(extra)
    pool = tuple(candidates) + TEAM_METRIC_NAMES
    augmented = stepwise_select(augmented_data, pool, mode=mode, p_enter=p_enter, p_exit=p_exit)
    chose_augmented = augmented.adjusted_r2 > initial.adjusted_r2
    return SecondStageResult(
        chosen=augmented if chose_augmented else initial,
        initial=initial,
        augmented=augmented,
        chose_augmented=chose_augmented,
    )
