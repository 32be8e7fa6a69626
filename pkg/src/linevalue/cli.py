"""Command-line driver wiring the pipeline stages together."""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, load_config
from .errors import DependencyError, InvariantError, ParseError, SchemaError
from .stages import STAGE_ORDER, run_pipeline, run_stage

_COMMANDS = ("ingest", "price", "cluster", "profile", "fit-dist", "identify", "validate", "synth", "pipeline")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linevalue",
        description=(
            "Offensive-line salary valuation pipeline: ingest game data, fit the "
            "labor-market salary model, cluster players, fit cluster salary "
            "distributions, and flag overvalued/undervalued players."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "pipeline" else "run every stage in order")
        p.add_argument("--config", default=None, help="YAML/JSON run configuration path")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--k", type=int, default=None, help="override the selected cluster count")
        p.add_argument("--scenario", default=None, help="synthetic scenario name (synth/pipeline)")
        if name == "pipeline":
            p.add_argument("--stage-from", default=None, choices=STAGE_ORDER, help="start from this stage")
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "out_dir": args.out,
        "seed": args.seed,
        "k_override": args.k,
        "synth_scenario": args.scenario,
    }
    if args.config is not None:
        return load_config(args.config, **overrides)
    cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "pipeline":
            run_pipeline(cfg, stage_from=args.stage_from)
        else:
            run_stage(args.command, cfg)
    except DependencyError as exc:
        print(f"dependency error: {exc}", file=sys.stderr)
        return 3
    except (SchemaError, ParseError, InvariantError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: ok (outputs in {cfg.out_dir})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
