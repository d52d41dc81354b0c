"""Experiment orchestration: grids, replicated runs, aggregation, files.

A sweep expands a parameter grid into seeded run specifications, executes
them (serially or over a process pool), and writes three artifacts:

  rounds.csv        one row per run per round (network metrics)
  eccentricity.csv  one row per opinion (when recording is enabled)
  summary.json      per-cell, per-strategy statistics and rank tests

Run seeds are stable hashes of (master seed, cell content, replication),
so results never depend on grid ordering or worker count, and any single
run can be reproduced standalone from its recorded seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import run_round
from .metrics import MetricsRecord, record_round_metrics
from .state import STRATEGIES, WEIGHT_INITS, SimParams, SimulationState, init_network
from .stats import mann_whitney_u

ROUNDS_COLUMNS = ("run_id", "strategy", "h", "a", "weight_init", "seed",
                  "round", "modularity", "n_communities", "community_std")
ECCENTRICITY_COLUMNS = ("run_id", "strategy", "h", "a", "weight_init",
                        "round", "opinion_id", "author", "eccentricity")

OPINION_STRATEGIES = ("NO", "FO")
BASELINE_STRATEGIES = ("SC", "NU", "FU", "NOU")

# test direction per metric: opinion strategies are expected to push
# modularity and community dispersion down and eccentricity up
METRIC_ALTERNATIVES = {
    "max_modularity": "less",
    "max_community_std": "less",
    "eccentricity": "greater",
}

# grid fields are owned by the grid; per-run seeds are derived
_RESERVED_OVERRIDES = ("strategy", "h", "a", "weight_init", "seed")


class RunFailure(Exception):
    """A run produced invalid state; carries diagnostics for the report."""


class CsvFormatError(Exception):
    """A results CSV is missing, malformed, or truncated."""


class PersistError(Exception):
    """Writing an output file failed."""


@dataclass(frozen=True)
class ExperimentConfig:
    weight_inits: tuple[str, ...] = ("uniform", "power_law")
    h_a_pairs: tuple[tuple[float, float], ...] = ((0.3, 0.01), (0.01, 0.3))
    strategies: tuple[str, ...] = STRATEGIES
    replications: int = 15
    master_seed: int = 20250808
    record_eccentricity: bool = False
    eccentricity_burn_in_rounds: int = 5
    params: dict = field(default_factory=dict)   # SimParams overrides
    output_dir: str = "results"

    def validate(self) -> None:
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not (self.weight_inits and self.h_a_pairs and self.strategies):
            raise ValueError("grid must be non-empty on every axis")
        for wi in self.weight_inits:
            if wi not in WEIGHT_INITS:
                raise ValueError(f"unknown weight_init in grid: {wi!r}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy in grid: {s!r}")
        for pair in self.h_a_pairs:
            if len(pair) != 2:
                raise ValueError(f"h_a_pairs entries must be (h, a), got {pair!r}")
        if self.eccentricity_burn_in_rounds < 0:
            raise ValueError("eccentricity_burn_in_rounds must be >= 0")
        for key in self.params:
            if key in _RESERVED_OVERRIDES:
                raise ValueError(
                    f"param override {key!r} is owned by the grid and cannot "
                    f"be set in config params")
        # surface bad override values (unknown key, bad n, ...) now
        self.base_params().validate()

    def base_params(self) -> SimParams:
        return SimParams.from_dict(self.params)

    def to_dict(self) -> dict:
        return {
            "weight_inits": list(self.weight_inits),
            "h_a_pairs": [list(p) for p in self.h_a_pairs],
            "strategies": list(self.strategies),
            "replications": self.replications,
            "master_seed": self.master_seed,
            "record_eccentricity": self.record_eccentricity,
            "eccentricity_burn_in_rounds": self.eccentricity_burn_in_rounds,
            "params": dict(self.params),
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls().to_dict())
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        merged = cls().to_dict()
        merged.update(doc)
        config = cls(
            weight_inits=tuple(merged["weight_inits"]),
            h_a_pairs=tuple(tuple(p) for p in merged["h_a_pairs"]),
            strategies=tuple(merged["strategies"]),
            replications=int(merged["replications"]),
            master_seed=int(merged["master_seed"]),
            record_eccentricity=bool(merged["record_eccentricity"]),
            eccentricity_burn_in_rounds=int(merged["eccentricity_burn_in_rounds"]),
            params=dict(merged["params"]),
            output_dir=str(merged["output_dir"]),
        )
        config.validate()
        return config

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_preset(name: str) -> ExperimentConfig:
    """Load a shipped preset config ('desk', 'full-dynamics', ...)."""
    from importlib import resources

    ref = resources.files("recosim").joinpath("presets", f"{name}.json")
    if not ref.is_file():
        available = sorted(p.name[:-5] for p in
                           resources.files("recosim").joinpath("presets").iterdir()
                           if p.name.endswith(".json"))
        raise ValueError(f"unknown preset {name!r}; available: {available}")
    return ExperimentConfig.from_dict(json.loads(ref.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class RunSpec:
    run_id: int
    replication: int
    params: SimParams
    record_eccentricity: bool

    @property
    def seed(self) -> int:
        return self.params.seed


@dataclass
class RunResult:
    run_id: int
    strategy: str
    h: float
    a: float
    weight_init: str
    seed: int
    replication: int
    records: list[MetricsRecord]
    max_modularity: float
    max_community_std: float
    eccentricities: list[tuple[int, int, int, float]] | None  # (round, id, author, value)


def stable_seed(master_seed: int, weight_init: str, h: float, a: float,
                strategy: str, replication: int) -> int:
    """Content-addressed run seed, invariant to grid ordering."""
    key = f"{master_seed}|{weight_init}|{h!r}|{a!r}|{strategy}|{replication}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def expand_grid(config: ExperimentConfig) -> list[RunSpec]:
    """All grid cells x replications, with derived per-run seeds."""
    config.validate()
    base = config.base_params()
    specs = []
    for weight_init in config.weight_inits:
        for h, a in config.h_a_pairs:
            for strategy in config.strategies:
                for rep in range(config.replications):
                    params = base.with_overrides(
                        weight_init=weight_init, h=h, a=a, strategy=strategy,
                        seed=stable_seed(config.master_seed, weight_init, h, a,
                                         strategy, rep))
                    specs.append(RunSpec(
                        run_id=len(specs), replication=rep, params=params,
                        record_eccentricity=config.record_eccentricity))
    return specs


def _validate_round(state: SimulationState, record: MetricsRecord,
                    spec: RunSpec) -> None:
    ctx = (f"run {spec.run_id} (seed {spec.seed}, strategy "
           f"{spec.params.strategy}), round {record.round}")
    w = state.weights
    if not np.isfinite(state.idea_states).all():
        raise RunFailure(f"{ctx}: non-finite idea state")
    if not np.isfinite(w).all():
        raise RunFailure(f"{ctx}: non-finite edge weight")
    if w.min() < 0.0 or w.max() > 1.0:
        raise RunFailure(f"{ctx}: weight outside [0, 1] "
                         f"(min {w.min()}, max {w.max()})")
    if np.diagonal(w).any():
        raise RunFailure(f"{ctx}: non-zero self-weight")
    expected = state.round_counter * state.params.opinions_per_round
    if len(state.opinion_log) != expected:
        raise RunFailure(f"{ctx}: opinion count {len(state.opinion_log)} != "
                         f"{expected}")
    if state._recent_count.max() > state.params.recent_window:
        raise RunFailure(f"{ctx}: recent window overflow")
    for name, value in (("modularity", record.modularity),
                        ("community_std", record.community_state_std)):
        if not np.isfinite(value):
            raise RunFailure(f"{ctx}: non-finite {name}")
    if not -0.5 - 1e-9 <= record.modularity <= 1.0 + 1e-9:
        raise RunFailure(f"{ctx}: modularity {record.modularity} out of bounds")


def execute(spec: RunSpec, on_round=None) -> RunResult:
    """Run one spec to completion, validating state after every round.

    on_round, when given, is called as on_round(state, record) after each
    round's metrics: used by tests and by callers wanting live traces.
    """
    params = spec.params
    state = init_network(params)
    records: list[MetricsRecord] = []
    ecc: list | None = [] if spec.record_eccentricity else None
    for _ in range(params.rounds):
        run_round(state, eccentricity_out=ecc)
        record = record_round_metrics(state)
        _validate_round(state, record, spec)
        if on_round is not None:
            on_round(state, record)
        records.append(record)
    if ecc is not None:
        values = np.array([e[3] for e in ecc])
        if len(values) and (not np.isfinite(values).all() or values.min() < 0):
            raise RunFailure(f"run {spec.run_id}: invalid eccentricity values")
    return RunResult(
        run_id=spec.run_id,
        strategy=params.strategy,
        h=params.h,
        a=params.a,
        weight_init=params.weight_init,
        seed=params.seed,
        replication=spec.replication,
        records=records,
        max_modularity=max(r.modularity for r in records),
        max_community_std=max(r.community_state_std for r in records),
        eccentricities=ecc,
    )


def _execute_guarded(spec: RunSpec):
    """Pool-safe wrapper: isolates failures to their own run."""
    try:
        return "ok", execute(spec)
    except Exception as exc:  # noqa: BLE001 - a failed run must not kill the sweep
        return "failed", {
            "run_id": spec.run_id,
            "seed": spec.seed,
            "strategy": spec.params.strategy,
            "weight_init": spec.params.weight_init,
            "h": spec.params.h,
            "a": spec.params.a,
            "error": f"{type(exc).__name__}: {exc}",
        }


@dataclass
class SweepOutcome:
    results: list[RunResult]
    failures: list[dict]
    duration_s: float


def sweep(config: ExperimentConfig, workers: int = 1,
          progress: bool = True) -> SweepOutcome:
    """Execute the full grid; failures are isolated and reported.

    Any worker count yields identical results: runs are independent and
    fully determined by their seeds.
    """
    specs = expand_grid(config)
    started = time.perf_counter()
    outcomes = []
    if workers <= 1:
        for done, spec in enumerate(specs, 1):
            outcome = _execute_guarded(spec)
            outcomes.append(outcome)
            _report_progress(progress, done, len(specs), spec, outcome[0])
    else:
        from concurrent.futures import ProcessPoolExecutor, as_completed

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_execute_guarded, spec): spec for spec in specs}
            for done, future in enumerate(as_completed(futures), 1):
                outcome = future.result()
                outcomes.append(outcome)
                _report_progress(progress, done, len(specs), futures[future],
                                 outcome[0])
    results = sorted((r for tag, r in outcomes if tag == "ok"),
                     key=lambda r: r.run_id)
    failures = sorted((f for tag, f in outcomes if tag == "failed"),
                      key=lambda f: f["run_id"])
    return SweepOutcome(results, failures, time.perf_counter() - started)


def _report_progress(enabled: bool, done: int, total: int, spec: RunSpec,
                     tag: str) -> None:
    if enabled:
        p = spec.params
        print(f"[{done}/{total}] run {spec.run_id} {p.strategy} "
              f"{p.weight_init} h={p.h} a={p.a}: {tag}", file=sys.stderr)


# -- result rows and files -------------------------------------------------

def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rounds_rows(results: list[RunResult]) -> list[dict]:
    rows = []
    for r in sorted(results, key=lambda r: r.run_id):
        for rec in r.records:
            rows.append({
                "run_id": r.run_id, "strategy": r.strategy, "h": r.h, "a": r.a,
                "weight_init": r.weight_init, "seed": r.seed,
                "round": rec.round, "modularity": rec.modularity,
                "n_communities": rec.community_count,
                "community_std": rec.community_state_std,
            })
    return rows


def eccentricity_rows(results: list[RunResult]) -> list[dict]:
    rows = []
    for r in sorted(results, key=lambda r: r.run_id):
        for rnd, opinion_id, author, value in (r.eccentricities or []):
            rows.append({
                "run_id": r.run_id, "strategy": r.strategy, "h": r.h, "a": r.a,
                "weight_init": r.weight_init, "round": rnd,
                "opinion_id": opinion_id, "author": author,
                "eccentricity": value,
            })
    return rows


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in columns])
    except OSError as exc:
        raise PersistError(f"failed writing {path}: {exc}") from exc


def write_rounds_csv(results: list[RunResult], path: str | Path) -> None:
    _write_csv(Path(path), ROUNDS_COLUMNS, rounds_rows(results))


def write_eccentricity_csv(results: list[RunResult], path: str | Path) -> None:
    _write_csv(Path(path), ECCENTRICITY_COLUMNS, eccentricity_rows(results))


_ROUNDS_TYPES = {"run_id": int, "seed": int, "round": int, "n_communities": int,
                 "h": float, "a": float, "modularity": float,
                 "community_std": float, "strategy": str, "weight_init": str}
_ECC_TYPES = {"run_id": int, "round": int, "opinion_id": int, "author": int,
              "h": float, "a": float, "eccentricity": float,
              "strategy": str, "weight_init": str}


def read_csv_rows(path: str | Path, columns: tuple[str, ...],
                  types: dict) -> list[dict]:
    """Parse a results CSV, failing loudly with line/column diagnostics."""
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError(f"{path}: file not found")
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvFormatError(f"{path}: empty file")
        if tuple(header) != columns:
            missing = set(columns) - set(header)
            extra = set(header) - set(columns)
            raise CsvFormatError(
                f"{path}: header mismatch (missing {sorted(missing)}, "
                f"unexpected {sorted(extra)})")
        for line_no, raw in enumerate(reader, start=2):
            if len(raw) != len(columns):
                raise CsvFormatError(
                    f"{path}: line {line_no}: expected {len(columns)} fields, "
                    f"got {len(raw)}")
            row = {}
            for name, text in zip(columns, raw):
                try:
                    row[name] = types[name](text)
                except ValueError as exc:
                    raise CsvFormatError(
                        f"{path}: line {line_no}, column {name!r}: "
                        f"{text!r} is not a valid {types[name].__name__}") from exc
            rows.append(row)
    return rows


def read_rounds_csv(path: str | Path) -> list[dict]:
    return read_csv_rows(path, ROUNDS_COLUMNS, _ROUNDS_TYPES)


def read_eccentricity_csv(path: str | Path) -> list[dict]:
    return read_csv_rows(path, ECCENTRICITY_COLUMNS, _ECC_TYPES)


# -- aggregation -------------------------------------------------------------

def _quantile_block(sample: list[float]) -> dict:
    arr = np.asarray(sample, dtype=np.float64)
    q1, median, q3 = (float(np.quantile(arr, q)) for q in (0.25, 0.5, 0.75))
    return {"median": median, "q1": q1, "q3": q3, "iqr": q3 - q1,
            "n": len(sample)}


def _eccentricity_block(sample: np.ndarray) -> dict:
    qs = (0.05, 0.25, 0.5, 0.75, 0.95)
    values = [float(np.quantile(sample, q)) for q in qs]
    block = dict(zip(("q05", "q25", "median", "q75", "q95"), values))
    block["n_opinions"] = int(len(sample))
    return block


def _compare_samples(samples: dict[str, list], alternative: str) -> dict:
    """Pairwise opinion-vs-baseline rank tests on per-strategy samples."""
    p_values = {}
    for target in OPINION_STRATEGIES:
        for baseline in BASELINE_STRATEGIES:
            if len(samples.get(target, [])) >= 3 and len(samples.get(baseline, [])) >= 3:
                result = mann_whitney_u(samples[target], samples[baseline],
                                        alternative=alternative)
                p_values[f"{target}_vs_{baseline}"] = result.p_value
    return {
        "alternative": alternative,
        "underpowered": not p_values,
        "p_values": p_values,
    }


def _cells_in_order(rows: list[dict]) -> list[tuple[str, float, float]]:
    seen = []
    for row in rows:
        cell = (row["weight_init"], row["h"], row["a"])
        if cell not in seen:
            seen.append(cell)
    return seen


def build_summary(rounds: list[dict], eccentricity: list[dict] | None,
                  burn_in_rounds: int) -> dict:
    """Aggregate CSV-shaped rows into the summary document.

    Pure function of its inputs: the sweep and the summarize command both
    call this, so recomputing from the CSVs reproduces the original file.
    """
    per_run: dict[int, dict] = {}
    for row in rounds:
        run = per_run.setdefault(row["run_id"], {
            "strategy": row["strategy"],
            "cell": (row["weight_init"], row["h"], row["a"]),
            "max_modularity": -np.inf,
            "max_community_std": -np.inf,
        })
        run["max_modularity"] = max(run["max_modularity"], row["modularity"])
        run["max_community_std"] = max(run["max_community_std"],
                                       row["community_std"])

    ecc_pool: dict[tuple, list[float]] = {}
    for row in eccentricity or []:
        if row["round"] >= burn_in_rounds:
            key = ((row["weight_init"], row["h"], row["a"]), row["strategy"])
            ecc_pool.setdefault(key, []).append(row["eccentricity"])

    cells_doc = []
    for cell in _cells_in_order(rounds):
        weight_init, h, a = cell
        metric_samples = {m: {} for m in ("max_modularity", "max_community_std")}
        strategies_present = []
        for run in per_run.values():
            if run["cell"] == cell:
                if run["strategy"] not in strategies_present:
                    strategies_present.append(run["strategy"])
                for m in metric_samples:
                    metric_samples[m].setdefault(run["strategy"], []).append(run[m])
        ordered = [s for s in STRATEGIES if s in strategies_present]

        strategies_doc = {}
        for strategy in ordered:
            doc = {
                "n_runs": len(metric_samples["max_modularity"][strategy]),
                "max_modularity": _quantile_block(
                    metric_samples["max_modularity"][strategy]),
                "max_community_std": _quantile_block(
                    metric_samples["max_community_std"][strategy]),
            }
            pooled = ecc_pool.get((cell, strategy))
            doc["eccentricity"] = (
                _eccentricity_block(np.asarray(pooled)) if pooled else None)
            strategies_doc[strategy] = doc

        tests_doc = {
            m: _compare_samples(metric_samples[m], METRIC_ALTERNATIVES[m])
            for m in ("max_modularity", "max_community_std")
        }
        ecc_samples = {s: ecc_pool.get((cell, s), []) for s in ordered}
        tests_doc["eccentricity"] = (
            _compare_samples(ecc_samples, METRIC_ALTERNATIVES["eccentricity"])
            if any(ecc_samples.values()) else None)

        cells_doc.append({
            "weight_init": weight_init, "h": h, "a": a,
            "strategies": strategies_doc,
            "tests": tests_doc,
        })
    return {
        "eccentricity_burn_in_rounds": burn_in_rounds,
        "cells": cells_doc,
    }


def compare_strategies(results: list[RunResult], metric: str,
                       cell: tuple[str, float, float],
                       burn_in_rounds: int = 5) -> dict:
    """Per-strategy stats and opinion-vs-baseline rank tests for one cell.

    metric is one of max_modularity, max_community_std, eccentricity; cell
    is (weight_init, h, a).
    """
    if metric not in METRIC_ALTERNATIVES:
        raise ValueError(f"unknown metric {metric!r}")
    weight_init, h, a = cell
    in_cell = [r for r in results
               if (r.weight_init, r.h, r.a) == (weight_init, h, a)]
    samples: dict[str, list[float]] = {}
    for r in in_cell:
        if metric == "eccentricity":
            values = [e[3] for e in (r.eccentricities or [])
                      if e[0] >= burn_in_rounds]
            samples.setdefault(r.strategy, []).extend(values)
        else:
            samples.setdefault(r.strategy, []).append(getattr(r, metric))
    report = {
        "cell": {"weight_init": weight_init, "h": h, "a": a},
        "metric": metric,
        "strategies": {
            s: _quantile_block(samples[s]) for s in STRATEGIES if s in samples
        },
    }
    report.update(_compare_samples(samples, METRIC_ALTERNATIVES[metric]))
    return report


def write_summary(summary: dict, path: Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise PersistError(f"failed writing {path}: {exc}") from exc


def persist(results: list[RunResult], directory: str | Path,
            burn_in_rounds: int = 5) -> dict[str, Path]:
    """Write rounds.csv, eccentricity.csv (if recorded), summary.json."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PersistError(f"failed creating {directory}: {exc}") from exc
    paths = {"rounds": directory / "rounds.csv"}
    r_rows = rounds_rows(results)
    _write_csv(paths["rounds"], ROUNDS_COLUMNS, r_rows)
    e_rows = None
    if any(r.eccentricities is not None for r in results):
        e_rows = eccentricity_rows(results)
        paths["eccentricity"] = directory / "eccentricity.csv"
        _write_csv(paths["eccentricity"], ECCENTRICITY_COLUMNS, e_rows)
    paths["summary"] = directory / "summary.json"
    write_summary(build_summary(r_rows, e_rows, burn_in_rounds),
                  paths["summary"])
    return paths


def summary_table(summary: dict) -> str:
    """Console table: median max-modularity per strategy per cell."""
    lines = []
    strategies = [s for s in STRATEGIES
                  if any(s in cell["strategies"] for cell in summary["cells"])]
    header = f"{'cell':<32}" + "".join(f"{s:>10}" for s in strategies)
    lines.append(header)
    lines.append("-" * len(header))
    for cell in summary["cells"]:
        name = f"{cell['weight_init']} h={cell['h']} a={cell['a']}"
        medians = []
        for s in strategies:
            block = cell["strategies"].get(s)
            medians.append(f"{block['max_modularity']['median']:>10.4f}"
                           if block else f"{'-':>10}")
        lines.append(f"{name:<32}" + "".join(medians))
    return "\n".join(lines)
