"""Human-readable report formatting for fitted models and profiles."""

from __future__ import annotations

from .pricing import PricingModel

DISPLAY_NAMES = {
    "age": "Age",
    "experience": "Experience",
    "draft_round": "Draft Round",
    "draft_pick": "Draft Pick",
    "pro_bowls": "Pro Bowl Selections",
    "ap_all_pro_1st": "AP All-Pro 1st Team Selections",
    "ap_all_pro_2nd": "AP All-Pro 2nd Team Selections",
    "pfw_all_pro": "PFW All-Pro Selections",
    "pff_prior_avg": "Avg. PFF Rating Prior to Contract",
    "pff_current": "PFF Rating, Current Season",
    "stuff_pct_diff": "Stuff % Differential",
    "yds_per_attempt_diff": "Yds per Attempt Differential",
    "yac_per_attempt_diff": "YAC per Attempt Differential",
    "ybc_per_attempt_diff": "YBC per Attempt Differential",
    "successful_run_pct_diff": "Successful Run % Differential",
    "rush_td_per_attempt_diff": "Rush TD per Attempt Differential",
    "pressure_allowed_diff": "Pressure Allowed Differential",
    "pressure_pct": "Pressure %",
    "sack_pct": "Sack %",
    "att_per_dropback": "Att per Dropback",
    "team_performance_metric": "Team Performance Metric",
    "team_experience_metric": "Team Experience Metric",
    "team_performance_metric_sq": "Team Performance Metric^2",
    "team_experience_metric_sq": "Team Experience Metric^2",
}


def display_name(name: str) -> str:
    return DISPLAY_NAMES.get(name, name)


def format_model_table(
    model: PricingModel,
    partition: dict[str, str] | None = None,
    gamma: dict[str, float] | None = None,
) -> str:
    """Fixed-width regression table: Variable, Estimate, t value, Pr(>|t|).

    Optionally appends the experience/performance partition and normalized
    weight of each predictor.
    """
    headers = ["Variable", "Estimate", "t value", "Pr(>|t|)"]
    if partition is not None:
        headers.append("Set")
    if gamma is not None:
        headers.append("Weight")

    def row(key: str | None, name: str, est: float, t: float, p: float) -> list[str]:
        cells = [name, f"{est:.0f}", f"{t:.3f}", f"{p:.3g}"]
        if partition is not None:
            cells.append(partition.get(key, "") if key else "")
        if gamma is not None:
            cells.append(f"{gamma[key]:.4f}" if key and gamma and key in gamma else "")
        return cells

    rows = [row(None, "(Intercept)", model.intercept, model.intercept_t, model.intercept_p)]
    for term in model.terms:
        rows.append(row(term.name, display_name(term.name), term.coefficient, term.t_value, term.p_value))

    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    lines.append("")
    lines.append(f"Observations: {model.n}    Adjusted R-squared: {model.adjusted_r2:.4f}")
    return "\n".join(lines) + "\n"
