import json

import numpy as np
import pytest

from recosim import dynamics
from recosim.harness import (CsvFormatError, ExperimentConfig, RunFailure,
                             build_summary, compare_strategies,
                             eccentricity_rows, execute, expand_grid,
                             load_preset, persist, read_eccentricity_csv,
                             read_rounds_csv, rounds_rows, stable_seed, sweep,
                             summary_table)

TINY_PARAMS = {"n": 8, "k": 3, "opinions_per_round": 10, "total_opinions": 30,
               "recommendation_size": 3}


def tiny_config(**over):
    base = dict(weight_inits=("uniform",), h_a_pairs=((0.3, 0.01),),
                strategies=("SC", "NO"), replications=2, master_seed=99,
                record_eccentricity=True, params=TINY_PARAMS)
    base.update(over)
    return ExperimentConfig(**base)


class TestExpandGrid:
    def test_paper_grid_sizes(self):
        full = ExperimentConfig(replications=15)
        assert len(expand_grid(full)) == 2 * 2 * 6 * 15 == 360
        ecc = ExperimentConfig(replications=3)
        assert len(expand_grid(ecc)) == 72

    def test_deterministic_assignment(self):
        a = expand_grid(ExperimentConfig(replications=2))
        b = expand_grid(ExperimentConfig(replications=2))
        assert [s.seed for s in a] == [s.seed for s in b]

    def test_seeds_stable_under_grid_growth(self):
        small = tiny_config(strategies=("SC", "NO"))
        grown = tiny_config(strategies=("SC", "NO", "FU"))
        seeds_small = {(s.params.strategy, s.replication): s.seed
                       for s in expand_grid(small)}
        seeds_grown = {(s.params.strategy, s.replication): s.seed
                       for s in expand_grid(grown)}
        for key, seed in seeds_small.items():
            assert seeds_grown[key] == seed

    def test_seed_depends_on_every_cell_field(self):
        base = stable_seed(1, "uniform", 0.3, 0.01, "SC", 0)
        assert stable_seed(2, "uniform", 0.3, 0.01, "SC", 0) != base
        assert stable_seed(1, "power_law", 0.3, 0.01, "SC", 0) != base
        assert stable_seed(1, "uniform", 0.4, 0.01, "SC", 0) != base
        assert stable_seed(1, "uniform", 0.3, 0.01, "NO", 0) != base
        assert stable_seed(1, "uniform", 0.3, 0.01, "SC", 1) != base

    def test_run_params_carry_cell(self):
        specs = expand_grid(tiny_config())
        assert {s.params.strategy for s in specs} == {"SC", "NO"}
        assert all(s.params.n == 8 for s in specs)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError, match="strategy"):
            ExperimentConfig(strategies=("SC", "XX")).validate()
        with pytest.raises(ValueError, match="replications"):
            ExperimentConfig(replications=0).validate()
        with pytest.raises(ValueError, match="grid"):
            ExperimentConfig(weight_inits=()).validate()
        with pytest.raises(ValueError, match="owned by the grid"):
            ExperimentConfig(params={"h": 0.5}).validate()


class TestExecute:
    def test_record_count_and_maxima(self):
        spec = expand_grid(tiny_config())[0]
        result = execute(spec)
        assert len(result.records) == 3
        assert result.max_modularity == max(r.modularity for r in result.records)
        assert result.max_community_std == max(r.community_state_std
                                               for r in result.records)
        assert len(result.eccentricities) == 30

    def test_re_execution_identical(self):
        spec = expand_grid(tiny_config())[1]
        a, b = execute(spec), execute(spec)
        assert [(r.round, r.modularity, r.community_count,
                 r.community_state_std) for r in a.records] == \
               [(r.round, r.modularity, r.community_count,
                 r.community_state_std) for r in b.records]
        assert a.eccentricities == b.eccentricities

    def test_on_round_callback(self):
        spec = expand_grid(tiny_config())[0]
        seen = []
        execute(spec, on_round=lambda state, record: seen.append(record.round))
        assert seen == [0, 1, 2]

    def test_forced_nan_surfaces_as_run_failure(self, monkeypatch):
        spec = expand_grid(tiny_config())[0]
        original = dynamics.run_round

        def poisoned(state, authors=None, eccentricity_out=None):
            update = original(state, authors, eccentricity_out)
            state.weights[1, 0] = np.nan
            return update

        monkeypatch.setattr("recosim.harness.run_round", poisoned)
        with pytest.raises(RunFailure, match="non-finite"):
            execute(spec)


class TestSweep:
    def test_failure_isolation(self, monkeypatch):
        from recosim import harness

        original = harness.execute
        calls = {"n": 0}

        def flaky(spec, on_round=None):
            calls["n"] += 1
            if spec.run_id == 1:
                raise RunFailure("injected failure")
            return original(spec, on_round)

        monkeypatch.setattr(harness, "execute", flaky)
        outcome = harness.sweep(tiny_config(), workers=1, progress=False)
        assert [f["run_id"] for f in outcome.failures] == [1]
        assert [r.run_id for r in outcome.results] == [0, 2, 3]
        assert calls["n"] == 4

    def test_run_reproducible_standalone_from_recorded_seed(self, tmp_path):
        """A run can be rebuilt from its CSV row plus the sweep's params."""
        config = tiny_config()
        outcome = sweep(config, workers=1, progress=False)
        persist(outcome.results, tmp_path)
        rows = read_rounds_csv(tmp_path / "rounds.csv")
        row = next(r for r in rows if r["run_id"] == 2)
        params = config.base_params().with_overrides(
            strategy=row["strategy"], h=row["h"], a=row["a"],
            weight_init=row["weight_init"], seed=row["seed"])
        from recosim.harness import RunSpec

        redone = execute(RunSpec(run_id=0, replication=0, params=params,
                                 record_eccentricity=False))
        original = [r for r in rows if r["run_id"] == 2]
        assert [rec.modularity for rec in redone.records] == \
               [r["modularity"] for r in original]
        assert [rec.community_state_std for rec in redone.records] == \
               [r["community_std"] for r in original]

    def test_parallel_equals_serial(self, tmp_path):
        config = tiny_config()
        serial = sweep(config, workers=1, progress=False)
        parallel = sweep(config, workers=2, progress=False)
        persist(serial.results, tmp_path / "serial")
        persist(parallel.results, tmp_path / "parallel")
        for name in ("rounds.csv", "eccentricity.csv", "summary.json"):
            assert (tmp_path / "serial" / name).read_bytes() == \
                   (tmp_path / "parallel" / name).read_bytes()


class TestPersistence:
    def test_row_counts_and_headers(self, tmp_path):
        outcome = sweep(tiny_config(), workers=1, progress=False)
        paths = persist(outcome.results, tmp_path)
        rounds = (tmp_path / "rounds.csv").read_text().splitlines()
        assert rounds[0] == ("run_id,strategy,h,a,weight_init,seed,round,"
                             "modularity,n_communities,community_std")
        assert len(rounds) == 1 + 4 * 3
        ecc = (tmp_path / "eccentricity.csv").read_text().splitlines()
        assert ecc[0] == ("run_id,strategy,h,a,weight_init,round,opinion_id,"
                          "author,eccentricity")
        assert len(ecc) == 1 + 4 * 30
        assert paths["summary"].is_file()

    def test_csv_round_trip(self, tmp_path):
        outcome = sweep(tiny_config(), workers=1, progress=False)
        persist(outcome.results, tmp_path)
        parsed = read_rounds_csv(tmp_path / "rounds.csv")
        assert parsed == rounds_rows(outcome.results)
        parsed_ecc = read_eccentricity_csv(tmp_path / "eccentricity.csv")
        assert parsed_ecc == eccentricity_rows(outcome.results)

    def test_summary_round_trips_losslessly(self, tmp_path):
        outcome = sweep(tiny_config(), workers=1, progress=False)
        persist(outcome.results, tmp_path)
        loaded = json.loads((tmp_path / "summary.json").read_text())
        rebuilt = build_summary(rounds_rows(outcome.results),
                                eccentricity_rows(outcome.results), 5)
        assert loaded == rebuilt

    def test_aggregates_order_independent(self, tmp_path):
        outcome = sweep(tiny_config(), workers=1, progress=False)
        persist(outcome.results, tmp_path / "a")
        persist(list(reversed(outcome.results)), tmp_path / "b")
        assert (tmp_path / "a" / "rounds.csv").read_bytes() == \
               (tmp_path / "b" / "rounds.csv").read_bytes()
        assert (tmp_path / "a" / "summary.json").read_bytes() == \
               (tmp_path / "b" / "summary.json").read_bytes()

    def test_no_eccentricity_file_when_not_recorded(self, tmp_path):
        outcome = sweep(tiny_config(record_eccentricity=False), workers=1,
                        progress=False)
        persist(outcome.results, tmp_path)
        assert not (tmp_path / "eccentricity.csv").exists()


class TestCsvParsing:
    def test_missing_file(self, tmp_path):
        with pytest.raises(CsvFormatError, match="not found"):
            read_rounds_csv(tmp_path / "rounds.csv")

    def test_header_mismatch_names_columns(self, tmp_path):
        path = tmp_path / "rounds.csv"
        path.write_text("run_id,strategy\n0,SC\n")
        with pytest.raises(CsvFormatError, match="missing"):
            read_rounds_csv(path)

    def test_truncated_row_names_line(self, tmp_path):
        outcome = sweep(tiny_config(record_eccentricity=False), workers=1,
                        progress=False)
        persist(outcome.results, tmp_path)
        path = tmp_path / "rounds.csv"
        lines = path.read_text().splitlines()
        lines[3] = lines[3].rsplit(",", 2)[0]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CsvFormatError, match="line 4"):
            read_rounds_csv(path)

    def test_bad_value_names_line_and_column(self, tmp_path):
        outcome = sweep(tiny_config(record_eccentricity=False), workers=1,
                        progress=False)
        persist(outcome.results, tmp_path)
        path = tmp_path / "rounds.csv"
        lines = path.read_text().splitlines()
        parts = lines[2].split(",")
        parts[7] = "not-a-number"
        lines[2] = ",".join(parts)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(CsvFormatError, match="line 3.*modularity"):
            read_rounds_csv(path)


class TestConfigFiles:
    def test_json_round_trip(self, tmp_path):
        config = tiny_config()
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config.to_dict()))
        assert ExperimentConfig.from_json_file(path) == config

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            ExperimentConfig.from_dict({"replication": 5})

    def test_presets_load(self):
        desk = load_preset("desk")
        assert desk.replications == 5
        assert desk.params["n"] == 50
        assert load_preset("full-dynamics").replications == 15
        assert load_preset("full-eccentricity").replications == 3

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            load_preset("galaxy")


class TestCompareStrategies:
    def _results(self):
        config = tiny_config(strategies=("SC", "NO", "FO", "NU"),
                             replications=3)
        return sweep(config, workers=1, progress=False).results

    def test_report_shape(self):
        report = compare_strategies(self._results(), "max_modularity",
                                    ("uniform", 0.3, 0.01))
        assert set(report["strategies"]) == {"SC", "NO", "FO", "NU"}
        for block in report["strategies"].values():
            assert block["n"] == 3
            assert block["q1"] <= block["median"] <= block["q3"]
            assert block["iqr"] == pytest.approx(block["q3"] - block["q1"])
        assert report["alternative"] == "less"
        assert set(report["p_values"]) == {
            "NO_vs_SC", "NO_vs_NU", "FO_vs_SC", "FO_vs_NU"}

    def test_underpowered_when_too_few_runs(self):
        config = tiny_config(strategies=("SC", "NO"), replications=2)
        results = sweep(config, workers=1, progress=False).results
        report = compare_strategies(results, "max_modularity",
                                    ("uniform", 0.3, 0.01))
        assert report["underpowered"] is True
        assert report["p_values"] == {}

    def test_missing_strategy_pairs_skipped(self):
        results = [r for r in self._results() if r.strategy != "SC"]
        report = compare_strategies(results, "max_modularity",
                                    ("uniform", 0.3, 0.01))
        assert set(report["p_values"]) == {"NO_vs_NU", "FO_vs_NU"}

    def test_separated_samples_significant(self):
        # 5 runs per side: fully separated exact one-sided p = 1/252
        config = tiny_config(strategies=("SC", "NO"), replications=5)
        results = sweep(config, workers=1, progress=False).results
        for r in results:   # force full separation on the tested metric
            r.max_modularity = (0.1 + r.run_id * 1e-3 if r.strategy == "NO"
                                else 0.9 + r.run_id * 1e-3)
        report = compare_strategies(results, "max_modularity",
                                    ("uniform", 0.3, 0.01))
        assert report["p_values"]["NO_vs_SC"] == pytest.approx(1 / 252)
        assert report["p_values"]["NO_vs_SC"] < 0.05

    def test_eccentricity_metric_pools_opinions(self):
        report = compare_strategies(self._results(), "eccentricity",
                                    ("uniform", 0.3, 0.01), burn_in_rounds=1)
        for block in report["strategies"].values():
            assert block["n"] == 3 * 20  # 2 of 3 rounds kept, 10 opinions each
        assert report["alternative"] == "greater"

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError, match="metric"):
            compare_strategies([], "median_degree", ("uniform", 0.3, 0.01))


class TestSummary:
    def test_cells_and_strategy_order(self):
        config = ExperimentConfig(
            weight_inits=("uniform", "power_law"), h_a_pairs=((0.3, 0.01),),
            strategies=("NO", "SC"), replications=3, master_seed=5,
            record_eccentricity=False, params=TINY_PARAMS)
        outcome = sweep(config, workers=1, progress=False)
        summary = build_summary(rounds_rows(outcome.results), None, 5)
        assert [(c["weight_init"], c["h"], c["a"]) for c in summary["cells"]] \
            == [("uniform", 0.3, 0.01), ("power_law", 0.3, 0.01)]
        for cell in summary["cells"]:
            assert list(cell["strategies"]) == ["SC", "NO"]  # canonical order
            assert cell["tests"]["eccentricity"] is None
            for block in cell["strategies"].values():
                assert block["eccentricity"] is None

    def test_summary_table_renders(self):
        outcome = sweep(tiny_config(), workers=1, progress=False)
        summary = build_summary(rounds_rows(outcome.results), None, 5)
        table = summary_table(summary)
        assert "uniform h=0.3 a=0.01" in table
        assert "SC" in table and "NO" in table
