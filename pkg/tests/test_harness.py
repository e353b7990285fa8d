import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from noisy_pst.errors import ComparisonError, ConfigError, InputError
from noisy_pst.harness import cli, runner
from noisy_pst.harness.config import ExperimentConfig, SuiteConfig, bundled_configs, load_config

SMALL = {
    "name": "small",
    "noise": {
        "gate_error": {"model": "depolarizing", "p_1q": 5e-4, "p_2q": 1.28e-2},
        "crosstalk": {"zeta_rad_per_us": 0.01},
        "decoherence": {"t1_us": 80, "t2_us": 140},
    },
    "time_window": {"grid_points": 21},
    "depths": {"n_min": 1, "n_max": 8},
}


def small(**changes):
    d = json.loads(json.dumps(SMALL))
    d.update(changes)
    return load_config(d)


def test_bundled_configs_load():
    names = bundled_configs()
    stems = {n.removesuffix(".json") for n in names}
    assert {"exp1", "exp2", "exp3", "exp4", "table1", "table2", "table5"} <= stems
    for name in names:
        cfg = load_config(name)
        assert isinstance(cfg, (ExperimentConfig, SuiteConfig))
    assert load_config("exp1.json") == load_config("exp1")


def test_experiment_round_trip():
    for name in ("exp1", "exp2", "exp3", "exp4"):
        cfg = load_config(name)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_suite_round_trip_and_overrides():
    suite = load_config("table5")
    assert load_config(suite.to_dict()) == suite
    assert suite.experiment("noiseless").build_noise().is_noiseless
    neg = suite.experiment("negative_crosstalk").build_noise()
    assert neg.crosstalk.zeta < 0 and neg.decoherence is not None


def test_defaults():
    cfg = load_config({"name": "d"})
    assert cfg.grid_points == 101 and cfg.depths == list(range(1, 31))
    assert cfg.t_grid[-1] == pytest.approx(np.pi)
    assert cfg.build_chain().couplings == pytest.approx((2 * np.sqrt(2),) * 2)


def test_gate_error_conversion():
    noise = small().build_noise()
    assert noise.gate_error_1q.params["q"] == pytest.approx(4 / 3 * 5e-4)
    per_qubit = 1 - np.sqrt(1 - 1.28e-2)
    assert noise.gate_error_2q.params["q"] == pytest.approx(4 / 3 * per_qubit)
    biased = small(noise={"gate_error": {"model": "pauli", "p_1q": 0.01, "p_2q": 0.02, "bias": [3, 1, 1]}})
    p = biased.build_noise().gate_error_1q.params
    assert p["p_x"] == pytest.approx(0.006) and p["p_y"] == pytest.approx(0.002)


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"bogus": 1}, "bogus"),
        ({"time_window": {"grid_points": 1}}, "time_window.grid_points"),
        ({"time_window": {"t_min": 2.0, "t_max": 1.0}}, "time_window"),
        ({"depths": {"n_min": 0}}, "depths.n_min"),
        ({"observable": "nope"}, "observable"),
        ({"noise": {"decoherence": {"t1_us": 10, "t2_us": 30}}}, "noise.decoherence.t2_us"),
        ({"noise": {"gate_error": {"model": "depolarizing", "p_1q": 0.9, "p_2q": 0.1}}}, "noise.gate_error"),
        ({"noise": {"crosstalk": {}}}, "noise.crosstalk"),
        ({"chain": {"n_qubits": "three"}}, "chain.n_qubits"),
    ],
)
def test_config_errors_name_the_field(patch, field):
    d = json.loads(json.dumps(SMALL))
    d.update(patch)
    with pytest.raises(ConfigError) as exc:
        load_config(d).build_noise()
    assert exc.value.field.startswith(field)


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config("no_such_config")


def test_runs_are_byte_identical(tmp_path):
    a = runner.run_experiment(small(), tmp_path / "a")
    b = runner.run_experiment(small(), tmp_path / "b")
    for fname in ("config.json", "series.csv", "sweep.csv", "fit.json", "mitigated.csv", "summary.json"):
        assert (a.directory / fname).read_bytes() == (b.directory / fname).read_bytes()


def test_worker_processes_do_not_change_results():
    cfg = small()
    one = runner.compute_sweep(cfg, threads=1)
    two = runner.compute_sweep(cfg, threads=2)
    for ra, rb in zip(one.records, two.records):
        np.testing.assert_array_equal(ra.fidelity, rb.fidelity)


def test_saved_run_reloads(tmp_path):
    out = runner.run_experiment(small(), tmp_path)
    cfg, sweep = runner.load_run(out.directory)
    assert cfg == small()
    for ra, rb in zip(out.sweep.records, sweep.records):
        np.testing.assert_array_equal(ra.fidelity, rb.fidelity)
    with pytest.raises(InputError):
        runner.load_run(tmp_path / "missing")


def test_compare_self_is_zero(tmp_path):
    out = runner.run_experiment(small(), tmp_path)
    for metric in runner.METRICS:
        rep = runner.compare_runs(out.directory, out.directory, metric)
        if metric == "dynamics_error":
            assert all(v == 0 for _, v in rep["rows"])
        else:
            assert rep["value"] == 0


def test_compare_rejects_mismatched_depths(tmp_path):
    a = runner.run_experiment(small(), tmp_path / "a")
    b = runner.run_experiment(small(depths={"n_min": 1, "n_max": 6}), tmp_path / "b")
    with pytest.raises(ComparisonError):
        runner.compare_runs(a.directory, b.directory, "delta_fidelity")


def test_noiseless_mitigation_keeps_amplitudes(tmp_path):
    cfg = small(noise={}, time_window={"grid_points": 101})
    out = runner.run_experiment(cfg, tmp_path)
    m = out.mitigation
    # grid-sampled noiseless peaks sit a hair under 1, so c1 does too
    assert m.fit.c1 == pytest.approx(1.0, abs=1e-4)
    for raw, res in zip(out.sweep.records, m.rescaled.records):
        np.testing.assert_allclose(res.fidelity, raw.fidelity, atol=1e-3)
    for raw, mit in zip(out.sweep.records, m.mitigated.records):
        np.testing.assert_allclose(mit.t_grid, raw.t_grid - m.fit.c2 * raw.n_steps)


def test_mitigate_run_with_reference(tmp_path):
    noisy = runner.run_experiment(small(), tmp_path)
    ref = runner.run_experiment(small(name="ref", noise={}), tmp_path)
    rep = runner.mitigate_run(noisy.directory, tmp_path / "m", ref.directory)
    assert (tmp_path / "m" / "mitigation_error.csv").is_file()
    assert len(rep["errors"]) == 8


def test_suite_writes_tables(tmp_path):
    tables = runner.run_suite(load_config("table5"), tmp_path)
    root = tmp_path / "table5"
    assert (root / "tables.json").is_file()
    for name in tables:
        assert (root / f"{name}.csv").is_file()
    assert tables["retention_c1"]["values"]["noiseless"] == pytest.approx(1.0, abs=5e-3)


def cli_run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_run_compare_mitigate(tmp_path, capsys):
    cfg_path = tmp_path / "small.json"
    cfg_path.write_text(json.dumps(SMALL))
    code, out, _ = cli_run(["run", str(cfg_path), "--out-dir", str(tmp_path), "--grid-points", "11"], capsys)
    assert code == 0
    run_dir = json.loads(out)["run"]
    code, out, _ = cli_run(["compare", run_dir, run_dir, "--metric", "delta_hitting"], capsys)
    assert code == 0 and json.loads(out)["value"] == 0
    code, out, _ = cli_run(["mitigate", run_dir], capsys)
    assert code == 0 and "c1" in json.loads(out)["fit"]
    code, out, _ = cli_run(["list"], capsys)
    assert "table5.json" in json.loads(out)


@pytest.mark.parametrize(
    "args,code,kind",
    [
        (["run", "no_such_config"], 2, "ConfigError"),
        (["run", "exp1", "--threads", "0"], 2, "ConfigError"),
        (["run", "exp1", "--grid-points", "1"], 2, "ConfigError"),
    ],
)
def test_cli_errors_are_json(args, code, kind, capsys):
    got, _, err = cli_run(args, capsys)
    assert got == code
    payload = json.loads(err)
    assert payload["error"] == kind and payload["message"]


def test_cli_bad_config_reports_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "depths": {"n_max": 0}}))
    code, _, err = cli_run(["run", str(bad), "--out-dir", str(tmp_path)], capsys)
    assert code == 2 and json.loads(err)["field"].startswith("depths")


def test_cli_compare_exit_code(tmp_path, capsys):
    a = runner.run_experiment(small(), tmp_path / "a")
    b = runner.run_experiment(small(depths={"n_min": 1, "n_max": 6}), tmp_path / "b")
    code, _, err = cli_run(["compare", str(a.directory), str(b.directory), "--metric", "delta_fidelity"], capsys)
    assert code == 3 and json.loads(err)["error"] == "ComparisonError"


def test_cli_missing_run_directory(tmp_path, capsys):
    code, _, err = cli_run(["mitigate", str(tmp_path / "nothing")], capsys)
    assert code == 2 and json.loads(err)["error"] == "InputError"


def test_console_script_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "noisy_pst.harness.cli", "list"], capture_output=True, text=True, check=True
    )
    assert "exp1.json" in json.loads(out.stdout)
