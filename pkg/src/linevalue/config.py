"""Run configuration: defaults, file loading, validation, and hashing."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .pricing import DEFAULT_CANDIDATES
from .util import canonical_json, sha256_text

DEFAULT_CAP_TABLE = {2010: 120.0e6, 2011: 120.4e6, 2012: 120.6e6, 2013: 123.0e6, 2014: 133.0e6}


@dataclass
class RunConfig:
    """Everything a pipeline run needs; defaults mirror the published study."""

    games_csv: str = "games.csv"
    awards_csv: str = "awards.csv"
    pff_csv: str = "pff.csv"
    contracts_csv: str = "contracts.csv"
    out_dir: str = "out"

    cap_table: dict[int, float] = field(default_factory=lambda: dict(DEFAULT_CAP_TABLE))
    reference_year: int = 2014
    min_signing_year: int = 2011
    exclude_rookie_contracts: bool = True
    require_ufa: bool = True

    candidates: tuple[str, ...] = DEFAULT_CANDIDATES
    include_current_pff: bool = True
    stepwise_mode: str = "aicc"  # "aicc" | "pvalue"
    p_enter: float = 0.05
    p_exit: float = 0.10

    k_min: int = 1
    k_max: int = 20
    restarts: int = 50
    seed: int = 0
    rho: float = 0.8
    k_override: int | None = None

    ttest_mode: str = "two_sample"  # "two_sample" | "one_sample"
    significance: float = 0.01

    dist_lower: float | None = None  # None: 0.95 * minimum observed adjusted salary
    beta_upper_factor: float = 1.1
    min_cluster_size: int = 15

    alpha: float = 0.05
    rank_gap: int = 0

    # Optional synthetic-scenario inputs generated before ingestion.
    synth_scenario: str | None = None
    synth_archetypes: int | None = None

    def validate(self) -> None:
        for name in ("alpha", "significance", "rho", "p_enter", "p_exit"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError(f"k range [{self.k_min}, {self.k_max}] is empty or invalid")
        if self.k_override is not None and self.k_override < 1:
            raise ValueError("k_override must be positive")
        if self.stepwise_mode not in ("aicc", "pvalue"):
            raise ValueError(f"unknown stepwise_mode {self.stepwise_mode!r}")
        if self.ttest_mode not in ("two_sample", "one_sample"):
            raise ValueError(f"unknown ttest_mode {self.ttest_mode!r}")
        if self.beta_upper_factor <= 1.0:
            raise ValueError("beta_upper_factor must exceed 1")
        if self.min_cluster_size < 0 or self.rank_gap < 0 or self.restarts < 1:
            raise ValueError("min_cluster_size/rank_gap must be nonnegative and restarts positive")
        paths = [self.games_csv, self.awards_csv, self.pff_csv, self.contracts_csv]
        if len(set(paths)) != len(paths):
            raise ValueError("input file paths must be distinct")
        if self.reference_year not in self.cap_table:
            raise ValueError(f"cap table missing reference year {self.reference_year}")


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def load_config(path: str | Path, **overrides) -> RunConfig:
    """Load a YAML/JSON config file, apply overrides, and validate."""
    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    unknown = sorted(set(raw) - _FIELD_NAMES)
    if unknown:
        raise ValueError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if "cap_table" in raw and raw["cap_table"] is not None:
        raw["cap_table"] = {int(k): float(v) for k, v in raw["cap_table"].items()}
    if "candidates" in raw and raw["candidates"] is not None:
        raw["candidates"] = tuple(raw["candidates"])
    cfg = RunConfig(**raw)
    cfg.validate()
    return cfg


def config_hash(cfg: RunConfig) -> str:
    """Hash of every semantically meaningful field (output location excluded)."""
    payload = asdict(cfg)
    payload.pop("out_dir")
    payload["cap_table"] = {str(k): v for k, v in payload["cap_table"].items()}
    payload["candidates"] = list(payload["candidates"])
    return sha256_text(canonical_json(payload))


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    payload = asdict(cfg)
    payload["candidates"] = list(payload["candidates"])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(payload, f, sort_keys=True)
