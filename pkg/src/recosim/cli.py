"""Command-line entry point: single runs, sweeps, and re-aggregation.

Exit codes: 0 success, 1 runtime failure (failed runs, bad result files,
I/O), 2 usage error (bad flags or config). Progress goes to stderr;
machine-readable data goes to files and stdout.

The default output directory can be set with the RECOSIM_OUT environment
variable; an explicit --out always wins.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .harness import (CsvFormatError, ExperimentConfig, PersistError,
                      RunFailure, RunSpec, build_summary, execute, load_preset,
                      persist, read_eccentricity_csv, read_rounds_csv,
                      summary_table, sweep, write_eccentricity_csv,
                      write_rounds_csv, write_summary)
from .state import STRATEGIES, WEIGHT_INITS, SimParams

OUTPUT_ENV_VAR = "RECOSIM_OUT"

_DEFAULTS = SimParams()

# flag spec per SimParams field: (type, help); grid fields appear only on `run`
_PARAM_FLAGS = {
    "n": (int, "agent count"),
    "k": (int, "idea vector dimension"),
    "c": (float, "conformity strength"),
    "h": (float, "homophily strength"),
    "a": (float, "attention-to-novelty strength"),
    "theta_h": (float, "homophily distance threshold"),
    "theta_a": (float, "novelty distance threshold"),
    "opinion_noise": (float, "noise magnitude when authoring opinions"),
    "state_noise": (float, "noise magnitude in idea-state updates"),
    "opinions_per_round": (int, "opinions generated per update round"),
    "total_opinions": (int, "total opinions in a run"),
    "recommendation_size": (int, "selection size per strategy"),
    "recent_window": (int, "recent-opinion window per agent"),
    "weight_init": (str, "initial weight distribution"),
    "strategy": (str, "recommendation strategy"),
    "normalize_distance": (bool, "divide distances by sqrt(k)"),
    "seed": (int, "run seed"),
}

# grid-owned fields never become sweep flags
_SWEEP_EXCLUDED = {"h", "a", "strategy", "weight_init", "seed"}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_param_flags(parser: argparse.ArgumentParser, *, with_defaults: bool,
                     exclude: set[str] = frozenset()) -> None:
    """One flag per simulation parameter.

    with_defaults=True (run) bakes in the SimParams defaults; otherwise
    (sweep) flags default to None and only override when given.
    """
    for name, (ftype, help_text) in _PARAM_FLAGS.items():
        if name in exclude:
            continue
        default = getattr(_DEFAULTS, name) if with_defaults else None
        if ftype is bool:
            parser.add_argument(_flag(name), dest=name,
                                action=argparse.BooleanOptionalAction,
                                default=default, help=help_text)
            continue
        kwargs = {"dest": name, "type": ftype, "default": default,
                  "help": help_text}
        if name == "strategy":
            kwargs["choices"] = STRATEGIES
        elif name == "weight_init":
            kwargs["choices"] = WEIGHT_INITS
        parser.add_argument(_flag(name), **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recosim",
        description="Opinion-dynamics simulator with recommendation strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run", help="execute one simulation run",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_param_flags(run, with_defaults=True)
    run.add_argument("--eccentricity", action="store_true", default=False,
                     help="also record per-opinion eccentricities")
    run.add_argument("--out", default=None,
                     help=f"output directory (default: ${OUTPUT_ENV_VAR} or "
                          f"'results-run')")
    run.add_argument("-q", "--quiet", action="store_true", help="no progress output")

    swp = sub.add_parser(
        "sweep", help="execute a full experiment grid",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    swp.add_argument("config", nargs="?", default=None,
                     help="experiment config JSON (omit when using --preset)")
    swp.add_argument("--preset", default=None,
                     help="named preset: desk, full-dynamics, full-eccentricity")
    swp.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes")
    swp.add_argument("--replications", type=int, default=None,
                     help="override replications per cell")
    swp.add_argument("--master-seed", type=int, default=None,
                     help="override master seed")
    swp.add_argument("--record-eccentricity", dest="record_eccentricity",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="override eccentricity recording")
    swp.add_argument("--burn-in", type=int, default=None,
                     help="override eccentricity burn-in rounds for the summary")
    _add_param_flags(swp, with_defaults=False, exclude=_SWEEP_EXCLUDED)
    swp.add_argument("--out", default=None,
                     help=f"output directory (default: ${OUTPUT_ENV_VAR} or "
                          f"the config's output_dir)")
    swp.add_argument("-q", "--quiet", action="store_true", help="no progress output")

    summ = sub.add_parser("summarize",
                          help="recompute summary.json from result CSVs")
    summ.add_argument("results_dir", help="directory holding rounds.csv")
    summ.add_argument("--burn-in", type=int, default=5,
                      help="eccentricity burn-in rounds (default: 5)")

    val = sub.add_parser("validate-config", help="check an experiment config")
    val.add_argument("config", help="experiment config JSON")
    return parser


def _resolve_out(explicit: str | None, fallback: str) -> Path:
    return Path(explicit or os.environ.get(OUTPUT_ENV_VAR) or fallback)


def _cmd_run(args: argparse.Namespace) -> int:
    values = {name: getattr(args, name) for name in _PARAM_FLAGS}
    try:
        params = SimParams(**values)
        params.validate()
    except ValueError as exc:
        print(f"recosim run: invalid parameters: {exc}", file=sys.stderr)
        return 2
    out = _resolve_out(args.out, "results-run")
    spec = RunSpec(run_id=0, replication=0, params=params,
                   record_eccentricity=args.eccentricity)
    try:
        result = execute(spec)
        out.mkdir(parents=True, exist_ok=True)
        write_rounds_csv([result], out / "rounds.csv")
        if args.eccentricity:
            write_eccentricity_csv([result], out / "eccentricity.csv")
    except (RunFailure, PersistError, OSError) as exc:
        print(f"recosim run: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"wrote {out / 'rounds.csv'}", file=sys.stderr)
        if args.eccentricity:
            print(f"wrote {out / 'eccentricity.csv'}", file=sys.stderr)
    print(f"max_modularity {result.max_modularity!r}")
    print(f"max_community_std {result.max_community_std!r}")
    return 0


def _load_sweep_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise ValueError("give either a config file or --preset, not both")
    if args.preset is not None:
        config = load_preset(args.preset)
    elif args.config is not None:
        config = ExperimentConfig.from_json_file(args.config)
    else:
        raise ValueError("a config file or --preset is required")

    doc = config.to_dict()
    if args.replications is not None:
        doc["replications"] = args.replications
    if args.master_seed is not None:
        doc["master_seed"] = args.master_seed
    if args.record_eccentricity is not None:
        doc["record_eccentricity"] = args.record_eccentricity
    if args.burn_in is not None:
        doc["eccentricity_burn_in_rounds"] = args.burn_in
    for name in _PARAM_FLAGS:
        if name in _SWEEP_EXCLUDED:
            continue
        value = getattr(args, name)
        if value is not None:
            doc["params"][name] = value
    return ExperimentConfig.from_dict(doc)


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        config = _load_sweep_config(args)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"recosim sweep: invalid config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"recosim sweep: cannot read config: {exc}", file=sys.stderr)
        return 1
    out = _resolve_out(args.out, config.output_dir)
    outcome = sweep(config, workers=args.workers, progress=not args.quiet)
    try:
        persist(outcome.results, out,
                burn_in_rounds=config.eccentricity_burn_in_rounds)
    except PersistError as exc:
        print(f"recosim sweep: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"completed {len(outcome.results)} runs in "
              f"{outcome.duration_s:.1f}s -> {out}", file=sys.stderr)
    for failure in outcome.failures:
        print(f"recosim sweep: run {failure['run_id']} failed: "
              f"{failure['error']}", file=sys.stderr)
    return 1 if outcome.failures else 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    results_dir = Path(args.results_dir)
    try:
        rounds = read_rounds_csv(results_dir / "rounds.csv")
        ecc_path = results_dir / "eccentricity.csv"
        ecc = read_eccentricity_csv(ecc_path) if ecc_path.is_file() else None
        summary = build_summary(rounds, ecc, args.burn_in)
        write_summary(summary, results_dir / "summary.json")
    except (CsvFormatError, PersistError) as exc:
        print(f"recosim summarize: {exc}", file=sys.stderr)
        return 1
    print(summary_table(summary))
    return 0


def _cmd_validate_config(args: argparse.Namespace) -> int:
    try:
        config = ExperimentConfig.from_json_file(args.config)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"recosim validate-config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"recosim validate-config: cannot read config: {exc}",
              file=sys.stderr)
        return 1
    n_runs = (len(config.weight_inits) * len(config.h_a_pairs)
              * len(config.strategies) * config.replications)
    print(f"ok: {n_runs} runs "
          f"({len(config.weight_inits) * len(config.h_a_pairs) * len(config.strategies)} "
          f"cells x {config.replications} replications)")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "summarize": _cmd_summarize,
    "validate-config": _cmd_validate_config,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
