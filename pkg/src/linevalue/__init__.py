"""Salary-valuation analytics for NFL offensive linemen.

The pipeline derives to-side/not-to-side differential statistics from game
logs, fits a labor-market salary model by stepwise regression, clusters
players on the priced characteristics with a sum-of-squares cluster-count
criterion, fits parametric salary distributions per cluster, and flags
players whose pay sits in a tested tail of their cluster's distribution.
"""

from .clustering import kl_curve, kmeans, select_k, silhouettes, standardize
from .dataset import (
    DIFFERENTIAL_NAMES,
    FEATURE_NAMES,
    GameRecord,
    SeasonFeatureVector,
    adjust_cap_inflation,
    aggregate_season,
    apply_exclusions,
    build_season_features,
    compute_differentials,
    merge_external,
    parse_game_records,
    to_side_splits,
)
from .pricing import (
    DEFAULT_CANDIDATES,
    MetricWeights,
    PricingModel,
    normalized_weights,
    ols_fit,
    partition_predictors,
    player_metrics,
    second_stage_selection,
    stepwise_select,
    team_metrics,
)
from .profiling import assign_direction, cluster_t_tests, profile_clusters, welch_t_test
from .salary_dist import (
    FAMILIES,
    FittedSalaryDistribution,
    chi_squared_gof,
    fit_family,
    pp_qq_series,
    select_distribution,
)
from .synthgen import SynthConfig, generate_league, preset_config, write_league
from .valuation import identify, rank_validation, tail_probability

__version__ = "0.1.0"
