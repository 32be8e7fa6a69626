"""Parametric salary-distribution fitting for clusters.

Five income-distribution families (lognormal, gamma, beta, Pareto/Lomax,
Weibull) are fit by maximum likelihood to salaries shifted by a fixed lower
support bound. Fits are ranked by AIC with the chi-squared statistic and
P-P/Q-Q series attached as diagnostics; clusters at or below the minimum
size are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special, stats

FAMILIES = ("LOGNORMAL", "GAMMA", "BETA", "PARETO", "WEIBULL")

_LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GofResult:
    statistic: float
    bin_count: int
    dof: int
    p_value: float


@dataclass(frozen=True)
class FittedSalaryDistribution:
    """One family's ML fit to a cluster's shifted salaries."""

    family: str
    lower: float  # support lower bound L
    upper: float | None  # finite upper bound, beta only
    params: dict[str, float]
    log_likelihood: float
    aic: float
    n: int
    converged: bool
    cluster: int = -1
    chi_squared: GofResult | None = None
    chi_note: str | None = None
    pp_series: tuple[tuple[float, float], ...] = ()
    qq_series: tuple[tuple[float, float], ...] = ()

    def _frozen(self):
        p = self.params
        if self.family == "LOGNORMAL":
            return stats.lognorm(s=p["sigma"], loc=self.lower, scale=math.exp(p["mu"]))
        if self.family == "GAMMA":
            return stats.gamma(a=p["shape"], loc=self.lower, scale=p["scale"])
        if self.family == "WEIBULL":
            return stats.weibull_min(c=p["shape"], loc=self.lower, scale=p["scale"])
        if self.family == "PARETO":
            return stats.lomax(c=p["shape"], loc=self.lower, scale=p["scale"])
        if self.family == "BETA":
            return stats.beta(p["alpha"], p["beta"], loc=self.lower, scale=self.upper - self.lower)
        raise ValueError(f"unknown family {self.family!r}")

    def cdf(self, x) -> np.ndarray | float:
        return self._frozen().cdf(x)

    def ppf(self, q) -> np.ndarray | float:
        return self._frozen().ppf(q)

    @property
    def param_count(self) -> int:
        return len(self.params)


def _log_pdf(family: str, y: np.ndarray, params: tuple[float, float], span: float | None) -> np.ndarray:
    """Log density of the shifted observations y = x - L (beta scales by span)."""
    a, b = params
    if family == "LOGNORMAL":
        ly = np.log(y)
        return -ly - math.log(b) - 0.5 * _LN_2PI - (ly - a) ** 2 / (2.0 * b * b)
    if family == "GAMMA":
        return (a - 1.0) * np.log(y) - y / b - special.gammaln(a) - a * math.log(b)
    if family == "WEIBULL":
        t = y / b
        return math.log(a / b) + (a - 1.0) * np.log(t) - t**a
    if family == "PARETO":
        return math.log(a / b) - (a + 1.0) * np.log1p(y / b)
    if family == "BETA":
        z = y / span
        return (a - 1.0) * np.log(z) + (b - 1.0) * np.log1p(-z) - special.betaln(a, b) - math.log(span)
    raise ValueError(f"unknown family {family!r}")


def _to_params(family: str, u: np.ndarray) -> tuple[float, float]:
    """Map unconstrained optimizer coordinates to family parameters."""
    if family == "LOGNORMAL":
        return float(u[0]), float(np.exp(u[1]))
    return float(np.exp(u[0])), float(np.exp(u[1]))


def _from_params(family: str, params: tuple[float, float]) -> np.ndarray:
    if family == "LOGNORMAL":
        return np.array([params[0], np.log(params[1])])
    return np.log(np.array(params))


def _moment_start(family: str, y: np.ndarray, span: float | None) -> tuple[float, float]:
    m = float(y.mean())
    v = float(y.var(ddof=1))
    v = max(v, 1e-12 * m * m + 1e-300)
    if family == "LOGNORMAL":
        s2 = math.log1p(v / (m * m))
        return math.log(m) - s2 / 2.0, math.sqrt(s2)
    if family == "GAMMA":
        return m * m / v, v / m
    if family == "WEIBULL":
        cv = math.sqrt(v) / m
        shape = min(max(cv**-1.086, 0.1), 50.0)
        return shape, m / math.gamma(1.0 + 1.0 / shape)
    if family == "PARETO":
        cv2 = v / (m * m)
        shape = 2.0 * cv2 / (cv2 - 1.0) if cv2 > 1.0 else 3.0
        return shape, m * (shape - 1.0)
    if family == "BETA":
        z = y / span
        mz = float(z.mean())
        vz = max(float(z.var(ddof=1)), 1e-12)
        common = mz * (1.0 - mz) / vz - 1.0
        if common <= 0:
            common = 1.0
        return max(mz * common, 1e-3), max((1.0 - mz) * common, 1e-3)
    raise ValueError(f"unknown family {family!r}")


def _param_names(family: str) -> tuple[str, str]:
    if family == "LOGNORMAL":
        return ("mu", "sigma")
    if family == "BETA":
        return ("alpha", "beta")
    return ("shape", "scale")


def fit_family(
    salaries, family: str, lower: float, upper: float | None = None
) -> FittedSalaryDistribution:
    """Maximum-likelihood fit of one family to salaries bounded below by `lower`.

    Optimization is derivative-free simplex descent in transformed (log)
    parameter space from three deterministic starts: moment-matched and the
    same start dispersed by factors 0.5 and 2. A fit that never converges is
    returned flagged so selection can discard it.
    """
    x = np.asarray(salaries, dtype=float)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if x.size < 4:
        raise ValueError(f"need at least 4 observations to fit, got {x.size}")
    if np.min(x) <= lower:
        raise ValueError(f"all salaries must exceed the lower bound {lower!r}")
    if family == "BETA":
        if upper is None:
            raise ValueError("beta fits require a finite upper bound")
        if np.max(x) >= upper:
            raise ValueError(f"all salaries must be below the beta upper bound {upper!r}")
    span = (upper - lower) if family == "BETA" else None
    y = x - lower

    names = _param_names(family)
    if float(y.var(ddof=1)) == 0.0:
        start = _moment_start(family, y, span)
        return FittedSalaryDistribution(
            family=family,
            lower=lower,
            upper=upper if family == "BETA" else None,
            params=dict(zip(names, start)),
            log_likelihood=-math.inf,
            aic=math.inf,
            n=int(x.size),
            converged=False,
        )

    def nll(u: np.ndarray) -> float:
        params = _to_params(family, u)
        if not all(np.isfinite(params)) or params[1] <= 0 or (family != "LOGNORMAL" and params[0] <= 0):
            return math.inf
        lp = _log_pdf(family, y, params, span)
        if not np.all(np.isfinite(lp)):
            return math.inf
        return -float(lp.sum())

    base = _moment_start(family, y, span)
    starts = [base, tuple(p * 0.5 for p in base), tuple(p * 2.0 for p in base)]
    best_u, best_fun, converged = None, math.inf, False
    for start in starts:
        u0 = _from_params(family, start)
        if not np.all(np.isfinite(u0)):
            continue
        res = optimize.minimize(
            nll,
            u0,
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 4000, "maxfev": 4000},
        )
        if res.fun < best_fun:
            best_u, best_fun = res.x, float(res.fun)
            converged = converged or bool(res.success)

    if best_u is None or not math.isfinite(best_fun):
        params = dict(zip(names, base))
        log_l = -math.inf
        converged = False
    else:
        params = dict(zip(names, _to_params(family, best_u)))
        log_l = -best_fun
    return FittedSalaryDistribution(
        family=family,
        lower=lower,
        upper=upper if family == "BETA" else None,
        params=params,
        log_likelihood=log_l,
        aic=2.0 * len(names) - 2.0 * log_l,
        n=int(x.size),
        converged=converged,
    )


def chi_squared_gof(salaries, fit: FittedSalaryDistribution, bins: int | None = None) -> GofResult | None:
    """Equal-probability-bin chi-squared test of the fitted distribution.

    Bin count defaults to max(5, n // 5) so expected counts stay near five.
    Returns None for samples under 20 observations (caller records the skip).
    """
    x = np.sort(np.asarray(salaries, dtype=float))
    n = x.size
    if n < 20:
        return None
    b = bins if bins is not None else max(5, n // 5)
    edges = fit.ppf(np.arange(1, b) / b)
    observed = np.diff(np.concatenate([[0], np.searchsorted(x, edges, side="right"), [n]]))
    expected = n / b
    statistic = float(((observed - expected) ** 2 / expected).sum())
    dof = b - 1 - fit.param_count
    p_value = float(stats.chi2.sf(statistic, dof)) if dof > 0 else float("nan")
    return GofResult(statistic=statistic, bin_count=b, dof=dof, p_value=p_value)


def pp_qq_series(
    fit: FittedSalaryDistribution, salaries
) -> tuple[tuple[tuple[float, float], ...], tuple[tuple[float, float], ...]]:
    """P-P pairs (F(x_(i)), (i-0.5)/n) and Q-Q pairs (Finv((i-0.5)/n), x_(i))."""
    x = np.sort(np.asarray(salaries, dtype=float))
    n = x.size
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo_p = np.asarray(fit.cdf(x), dtype=float)
    theo_q = np.asarray(fit.ppf(probs), dtype=float)
    pp = tuple((float(t), float(e)) for t, e in zip(theo_p, probs))
    qq = tuple((float(t), float(e)) for t, e in zip(theo_q, x))
    return pp, qq


@dataclass(frozen=True)
class SelectionResult:
    cluster: int
    skipped: bool
    reason: str | None
    best: FittedSalaryDistribution | None
    ranking: tuple[FittedSalaryDistribution, ...]
    failed_families: tuple[str, ...]


def _better(a: FittedSalaryDistribution, b: FittedSalaryDistribution) -> FittedSalaryDistribution:
    # AIC decides; ties within 1e-9 go to fewer parameters, then family name.
    if a.aic < b.aic - 1e-9:
        return a
    if b.aic < a.aic - 1e-9:
        return b
    if a.param_count != b.param_count:
        return a if a.param_count < b.param_count else b
    return a if a.family <= b.family else b


def select_distribution(
    salaries,
    lower: float,
    upper: float | None = None,
    *,
    cluster: int = -1,
    min_size: int = 15,
    beta_upper_factor: float = 1.1,
    chi_bins: int | None = None,
) -> SelectionResult:
    """Fit all five families and keep the minimum-AIC convergent fit.

    Clusters of size <= min_size are skipped outright. The winning fit gets
    the chi-squared result and P-P/Q-Q series attached; the full converged
    ranking is returned for reporting.
    """
    x = np.asarray(salaries, dtype=float)
    n = x.size
    if n <= min_size:
        return SelectionResult(
            cluster=cluster,
            skipped=True,
            reason=f"cluster size {n} <= minimum {min_size}",
            best=None,
            ranking=(),
            failed_families=(),
        )
    if upper is None:
        upper = beta_upper_factor * float(np.max(x))

    fits, failed = [], []
    for family in FAMILIES:
        fit = fit_family(x, family, lower, upper if family == "BETA" else None)
        fit = replace(fit, cluster=cluster)
        if fit.converged and math.isfinite(fit.aic):
            fits.append(fit)
        else:
            failed.append(family)
    if not fits:
        return SelectionResult(
            cluster=cluster,
            skipped=True,
            reason="no family fit converged",
            best=None,
            ranking=(),
            failed_families=tuple(failed),
        )

    best = fits[0]
    for fit in fits[1:]:
        best = _better(best, fit)
    gof = chi_squared_gof(x, best, bins=chi_bins)
    pp, qq = pp_qq_series(best, x)
    best = replace(
        best,
        chi_squared=gof,
        chi_note=None if gof is not None else f"chi-squared skipped: n = {n} < 20",
        pp_series=pp,
        qq_series=qq,
    )
    ranking = tuple(sorted(fits, key=lambda f: (f.aic, f.param_count, f.family)))
    return SelectionResult(
        cluster=cluster,
        skipped=False,
        reason=None,
        best=best,
        ranking=ranking,
        failed_families=tuple(failed),
    )
