import csv
import dataclasses

import numpy as np
import pytest
from click.testing import CliRunner

from burstdfe import ConfigurationError
from burstdfe.harness import (
    RESULT_COLUMNS,
    ExperimentConfig,
    ResultTable,
    apply_override,
    config_to_dict,
    emit_results,
    load_config,
    loads_config,
    plan_runs,
    run_experiment,
)
from burstdfe.harness.cli import main
from burstdfe.harness.config import dumps_config, preset_names, resolve_axis
from burstdfe.metrics import q_from_ber

SMALL = """
name = "small"
seeds = [1]

[channel]
noise_ref = 0.05

[equalizer]
dfe_taps = [15, 7]
mlse_memory = 2

[frame]
training_length = 5000
payload_length = 3000
prbs_order = 15
"""


@pytest.fixture
def small():
    return loads_config(SMALL)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_minimal_file_gets_defaults(self, tmp_path):
        p = tmp_path / "min.toml"
        p.write_text('name = "m"\n')
        cfg = load_config(p)
        assert cfg == ExperimentConfig(name="m")
        assert cfg.frame.training_length == 5000
        assert cfg.equalizer.dfe_taps == (71, 51)
        assert cfg.seeds == (1,) and cfg.modes == ("dfe", "wdfe")

    def test_unknown_key_named(self):
        with pytest.raises(ConfigurationError, match="mles_memory"):
            loads_config("[equalizer]\nmles_memory = 4\n")

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="'colour'"):
            loads_config('colour = "red"\n')

    def test_parse_error_has_line_number(self):
        with pytest.raises(ConfigurationError, match="line 3"):
            loads_config('name = "x"\n\nseeds = = [1]\nmodes = ["dfe"]\n', source="bad.toml")

    def test_validation_names_field(self):
        with pytest.raises(ConfigurationError, match="training_length"):
            loads_config("[frame]\ntraining_length = 10\n")

    def test_planned_runs(self):
        cfg = loads_config('seeds = [1, 2, 3]\n[sweep]\naxis = "rop_dbm"\n'
                           'values = [-10.0, -8.0, -6.0, -4.0, -2.0]\n')
        assert cfg.sweep.axis == "channel.rop_dbm"
        assert cfg.n_planned_runs == 15
        plan = plan_runs(cfg)
        assert [p.index for p in plan] == list(range(15))
        assert [(p.sweep_value, p.seed) for p in plan[:4]] == [(-10.0, 1), (-10.0, 2),
                                                               (-10.0, 3), (-8.0, 1)]

    def test_sweep_axis_must_exist(self):
        with pytest.raises(ConfigurationError, match="does not name"):
            loads_config('[sweep]\naxis = "colour"\nvalues = [1]\n')

    def test_sweep_values_validated(self):
        with pytest.raises(ConfigurationError, match="mlse_memory"):
            loads_config('[sweep]\naxis = "mlse_memory"\nvalues = [2, -1]\n')

    def test_sweep_values_checked_against_training(self):
        with pytest.raises(ConfigurationError):
            loads_config('[frame]\ntraining_length = 100\n'
                         '[sweep]\naxis = "mlse_memory"\nvalues = [2, 14]\n')

    @pytest.mark.parametrize("axis,canonical", [
        ("rop_dbm", "channel.rop_dbm"),
        ("mlse_memory", "equalizer.mlse_memory"),
        ("payload_length", "frame.payload_length"),
        ("amplitude", "channel.burst.amplitude"),
        ("channel.burst.rate", "channel.burst.rate"),
    ])
    def test_resolve_axis(self, axis, canonical):
        assert resolve_axis(axis) == canonical

    def test_apply_override(self, small):
        cfg = apply_override(small, "channel.burst.rate", 12.0)
        assert cfg.channel.burst.rate == 12.0
        assert small.channel.burst.rate == 0.0

    def test_at_least_one_seed(self):
        with pytest.raises(ConfigurationError, match="seed"):
            loads_config("seeds = []\n")

    def test_mode_aliases(self):
        assert loads_config('modes = ["classical_dfe", "weighted_dfe"]').modes == ("dfe", "wdfe")
        with pytest.raises(ConfigurationError):
            loads_config('modes = ["dfe", "dfe"]')

    def test_schema_version_checked(self):
        with pytest.raises(ConfigurationError, match="schema_version"):
            loads_config("schema_version = 99\n")

    def test_manifest_round_trip(self, small):
        assert loads_config(dumps_config(small)) == small
        cfg = apply_override(small, "pf_alpha", "auto")
        assert loads_config(dumps_config(cfg)) == cfg

    @pytest.mark.parametrize("name", ["burst_stats", "memory_sweep", "rop_sweep", "spectra"])
    def test_presets_load(self, name):
        assert name in preset_names()
        cfg = load_config(name)
        assert config_to_dict(cfg)["schema_version"] == 1


class TestRunAndEmit:
    def test_ideal_link_is_error_free(self, small):
        cfg = dataclasses.replace(small, channel=dataclasses.replace(
            small.channel, length=0.0, noise_ref=0.0))
        table = run_experiment(cfg)
        assert len(table.rows) == 2
        for row in table.rows:
            assert row.ok, row.error
            assert row.eq.bit_errors == 0 and row.mlse.bit_errors == 0
            assert row.eq.bits_compared == 3000

    def test_rows_satisfy_metric_invariants(self, small):
        cfg = apply_override(small, "noise_ref", 0.4)
        for row in run_experiment(cfg).rows:
            for res in (row.eq, row.mlse):
                assert 0 <= res.ber <= 1
                assert res.ber == res.bit_errors / res.bits_compared
                if 0 < res.ber < 0.5:
                    assert res.q_db == pytest.approx(q_from_ber(res.ber))
            assert row.eq_runs.total_runs <= row.eq.bit_errors

    def test_emit_layout(self, small, tmp_path):
        table = run_experiment(small)
        written = emit_results(table, tmp_path)
        rows = read_rows(written["results"])
        assert tuple(rows[0].keys()) == RESULT_COLUMNS
        assert [r["mode"] for r in rows] == ["dfe", "wdfe"]
        hist = read_rows(tmp_path / rows[0]["histogram_file"])
        assert set(hist[0]) == {"stage", "run_length", "count", "pdf", "cdf"} if hist else True
        assert loads_config((tmp_path / "manifest.toml").read_text()) == small
        assert read_rows(written["timings"])[0]["mode"] == "dfe"
        assert "spectra" not in written

    def test_empty_table(self, small, tmp_path):
        written = emit_results(ResultTable(small), tmp_path)
        text = written["results"].read_text()
        assert text == ",".join(RESULT_COLUMNS) + "\n"
        assert (tmp_path / "manifest.toml").exists()

    def test_deterministic_bytes(self, small, tmp_path):
        a = emit_results(run_experiment(small), tmp_path / "a")
        b = emit_results(run_experiment(small), tmp_path / "b")
        assert a["results"].read_bytes() == b["results"].read_bytes()
        for h in sorted((tmp_path / "a" / "histograms").iterdir()):
            assert h.read_bytes() == (tmp_path / "b" / "histograms" / h.name).read_bytes()

    def test_workers_keep_plan_order(self, small):
        cfg = dataclasses.replace(small, seeds=(3, 1, 2))
        serial = run_experiment(cfg, workers=1)
        parallel = run_experiment(cfg, workers=2)
        def key(table):
            return [(r.run_index, r.seed, r.mode, r.eq.bit_errors, r.mlse.bit_errors,
                     r.eq_runs) for r in table.rows]

        assert key(serial) == key(parallel)
        assert [r.seed for r in serial.rows] == [3, 3, 1, 1, 2, 2]

    def test_permuting_sweep_permutes_rows(self, small):
        def rows(values):
            cfg = loads_config(SMALL + f'[sweep]\naxis = "noise_ref"\nvalues = {values}\n')
            return {r.sweep_value: (r.mode, r.eq.bit_errors, r.mlse.bit_errors) for r in run_experiment(cfg).rows
                    if r.mode == "wdfe"}

        assert rows([0.05, 0.3]) == rows([0.3, 0.05])

    def test_failed_run_is_recorded_and_sweep_continues(self, tmp_path):
        cfg = loads_config(SMALL + '[sweep]\naxis = "noise_ref"\nvalues = [0.05, 100.0]\n')
        table = run_experiment(cfg)
        status = [r.status for r in table.rows]
        assert status == ["ok", "ok", "failed", "failed"]
        assert "SynchronizationError" in table.rows[2].error
        rows = read_rows(emit_results(table, tmp_path)["results"])
        assert rows[2]["status"] == "failed" and rows[2]["ber_eq"] == ""

    def test_spectrum_stages(self, small):
        spec = dataclasses.replace(small.spectrum, stages=("received", "wdfe", "mlse"),
                                   segment=256)
        table = run_experiment(dataclasses.replace(small, spectrum=spec))
        stages = [(s.stage, s.mode) for s in table.spectra]
        assert stages == [("received", ""), ("mlse", "dfe"), ("wdfe", "wdfe"), ("mlse", "wdfe")]
        assert all(np.all(np.diff(s.freqs) > 0) for s in table.spectra)

    def test_zero_memory_bypasses_mlse(self, small):
        cfg = apply_override(apply_override(small, "mlse_memory", 0), "noise_ref", 0.35)
        for row in run_experiment(cfg).rows:
            assert row.eq.bit_errors > 0
            assert row.mlse.bit_errors == row.eq.bit_errors
            assert row.mlse_runs == row.eq_runs


class TestCli:
    @pytest.fixture
    def cfg_file(self, tmp_path):
        p = tmp_path / "small.toml"
        p.write_text(SMALL)
        return p

    def test_validate(self, cfg_file):
        res = CliRunner().invoke(main, ["validate", str(cfg_file)])
        assert res.exit_code == 0
        assert res.output.strip() == "small: valid; sweep (none); modes dfe, wdfe; 1 planned run"

    def test_validate_reports_bad_key(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[equalizer]\nmles_memory = 3\n")
        res = CliRunner().invoke(main, ["validate", str(p)])
        assert res.exit_code != 0 and "mles_memory" in res.output

    def test_run_writes_outputs(self, cfg_file, tmp_path):
        out = tmp_path / "out"
        res = CliRunner().invoke(main, ["run", str(cfg_file), "--seed", "4", "--seed", "5",
                                        "--out", str(out)])
        assert res.exit_code == 0, res.output
        rows = read_rows(out / "results.csv")
        assert [r["seed"] for r in rows] == ["4", "4", "5", "5"]

    def test_sweep_requires_axis(self, cfg_file):
        res = CliRunner().invoke(main, ["sweep", str(cfg_file)])
        assert res.exit_code != 0 and "sweep" in res.output

    def test_failed_run_exit_code(self, tmp_path):
        p = tmp_path / "fail.toml"
        p.write_text(SMALL + '[sweep]\naxis = "noise_ref"\nvalues = [100.0]\n')
        res = CliRunner().invoke(main, ["sweep", str(p), "--out", str(tmp_path / "o")])
        assert res.exit_code == 1
        assert (tmp_path / "o" / "results.csv").exists()

    def test_spectrum_command(self, cfg_file, tmp_path):
        res = CliRunner().invoke(main, ["spectrum", str(cfg_file), "--stage", "received",
                                        "--stage", "dfe", "--out", str(tmp_path / "s")])
        assert res.exit_code == 0, res.output
        stages = {r["stage"] for r in read_rows(tmp_path / "s" / "spectra.csv")}
        assert stages == {"received", "dfe"}

    def test_presets_listing(self):
        res = CliRunner().invoke(main, ["presets"])
        assert res.output.split() == ["burst_stats", "memory_sweep", "rop_sweep", "spectra"]
        res = CliRunner().invoke(main, ["presets", "rop_sweep"])
        assert 'axis = "rop_dbm"' in res.output
