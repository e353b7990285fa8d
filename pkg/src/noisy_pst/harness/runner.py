"""Run experiments and suites, and post-process saved runs.

A run directory holds::

    config.json   normalized experiment config
    series.csv    n_steps, t_model, fidelity
    sweep.csv     n_steps, hitting_time, peak_fidelity
    fit.json      mitigation fit (when enabled)
    rescaled.csv  / mitigated.csv   corrected series (mitigated on the shifted axis)
    summary.json  headline numbers

Every file is written to a temporary name and renamed into place.  Output
is a pure function of the config, so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..analysis import SweepResult, TransferRecord, delta_fidelity, delta_hitting, dynamics_error
from ..errors import ComparisonError, ConfigError, FitError, InputError
from ..mitigation import MitigationResult, error_table, mitigate
from ..simulator import StepProgram, fidelity_series
from .config import ExperimentConfig, SuiteConfig

__all__ = [
    "compute_sweep",
    "compute_sweeps",
    "run_experiment",
    "run_suite",
    "load_run",
    "compare_runs",
    "mitigate_run",
    "RunOutput",
]

METRICS = ("delta_fidelity", "delta_hitting", "dynamics_error")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Sweeps


def _sweep_chunk(cfg_dict: dict, depths: list[int]) -> np.ndarray:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    chain, noise = cfg.build_chain(), cfg.build_noise()
    conv = cfg.convention
    program = None
    if chain.n_qubits <= 5:
        program = StepProgram(chain, noise, conv, cfg.basis_change)
    return np.array(
        [
            fidelity_series(
                chain, noise, cfg.t_grid, n,
                convention=conv, basis_change=cfg.basis_change,
                observable=cfg.observable, program=program,
            )
            for n in depths
        ]
    )


def _chunks(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items)))
    # round-robin keeps the cost (which grows with depth) balanced
    return [items[i::parts] for i in range(parts)]


def compute_sweeps(configs: Sequence[ExperimentConfig], threads: int = 1) -> list[SweepResult]:
    """Fidelity sweeps for several experiments, optionally across worker processes."""
    for cfg in configs:
        cfg.build_noise()  # surface config errors before any work starts
    if threads < 1:
        raise InputError(f"threads must be at least 1, got {threads}")
    tasks = []
    for i, cfg in enumerate(configs):
        per_cfg = max(1, threads // max(1, len(configs))) if threads > 1 else 1
        for chunk in _chunks(cfg.depths, per_cfg):
            tasks.append((i, chunk))
    if threads == 1:
        results = [_sweep_chunk(configs[i].to_dict(), chunk) for i, chunk in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_sweep_chunk, configs[i].to_dict(), chunk) for i, chunk in tasks]
            results = [f.result() for f in futures]
    tables = [dict() for _ in configs]
    for (i, chunk), rows in zip(tasks, results):
        for n, row in zip(chunk, rows):
            tables[i][n] = row
    return [
        SweepResult.from_arrays(cfg.depths, cfg.t_grid, [tab[n] for n in cfg.depths], cfg.name)
        for cfg, tab in zip(configs, tables)
    ]


def compute_sweep(cfg: ExperimentConfig, threads: int = 1) -> SweepResult:
    return compute_sweeps([cfg], threads)[0]


# ---------------------------------------------------------------------------
# Writing runs


@dataclass(frozen=True)
class RunOutput:
    config: ExperimentConfig
    sweep: SweepResult
    mitigation: MitigationResult | None
    directory: Path
    mitigation_error: str | None = None


def _series_rows(sweep: SweepResult):
    for rec in sweep.records:
        for t, f in zip(rec.t_grid, rec.fidelity):
            yield rec.n_steps, t, f


def _write_mitigation(directory: Path, m: MitigationResult) -> None:
    fit = m.fit.to_dict()
    fit["clamped_points"] = {str(k): v for k, v in sorted(m.clamped.items())}
    _atomic_write(directory / "fit.json", _json_text(fit))
    _atomic_write(directory / "rescaled.csv", _csv_text(("n_steps", "t_model", "fidelity"), _series_rows(m.rescaled)))
    _atomic_write(directory / "mitigated.csv", _csv_text(("n_steps", "t_model", "fidelity"), _series_rows(m.mitigated)))


def _try_mitigate(cfg: ExperimentConfig, sweep: SweepResult) -> tuple[MitigationResult | None, str | None]:
    try:
        return (
            mitigate(sweep, n_min=cfg.fit_n_min, n_max=cfg.fit_n_max, skip_unmitigatable=True),
            None,
        )
    except FitError as exc:
        return None, str(exc)


def _write_run(cfg: ExperimentConfig, sweep: SweepResult, directory: Path) -> RunOutput:
    directory.mkdir(parents=True, exist_ok=True)
    _atomic_write(directory / "config.json", _json_text(cfg.to_dict()))
    _atomic_write(directory / "series.csv", _csv_text(("n_steps", "t_model", "fidelity"), _series_rows(sweep)))
    _atomic_write(
        directory / "sweep.csv",
        _csv_text(
            ("n_steps", "hitting_time", "peak_fidelity"),
            zip(sweep.n_steps, sweep.hitting_times, sweep.peak_fidelities),
        ),
    )
    m, err = (None, None)
    if cfg.mitigation:
        m, err = _try_mitigate(cfg, sweep)
        if m is not None:
            _write_mitigation(directory, m)
    summary = {
        "name": cfg.name,
        "depths": [cfg.n_min, cfg.n_max],
        "grid_points": cfg.grid_points,
        "final_peak_fidelity": float(sweep.peak_fidelities[-1]),
        "final_hitting_time": float(sweep.hitting_times[-1]),
        "fit": m.fit.to_dict() if m else None,
        "fit_error": err,
    }
    _atomic_write(directory / "summary.json", _json_text(summary))
    return RunOutput(cfg, sweep, m, directory, err)


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path, threads: int = 1) -> RunOutput:
    """Sweep ``cfg`` and write its run directory under ``out_dir/<name>``."""
    sweep = compute_sweep(cfg, threads)
    return _write_run(cfg, sweep, Path(out_dir) / cfg.name)


def run_suite(
    suite: SuiteConfig,
    out_dir: str | Path,
    threads: int = 1,
    grid_points: int | None = None,
) -> dict:
    """Run every experiment of ``suite`` and write its tables; returns the table data."""
    root = Path(out_dir) / suite.name
    configs = [suite.experiment(label).with_overrides(grid_points=grid_points) for label in suite.labels]
    sweeps = compute_sweeps(configs, threads)
    runs = {cfg.name: _write_run(cfg, sw, root / cfg.name) for cfg, sw in zip(configs, sweeps)}
    tables = {}
    for spec in suite.tables:
        tables[spec.name] = _table(spec, runs)
        header, rows = _table_rows(spec, tables[spec.name])
        _atomic_write(root / f"{spec.name}.csv", _csv_text(header, rows))
    _atomic_write(root / "tables.json", _json_text(tables))
    return tables


def _fit_value(run: RunOutput, metric: str):
    if run.mitigation is None:
        raise FitError(f"run {run.config.name} has no mitigation fit: {run.mitigation_error}")
    return getattr(run.mitigation.fit, metric)


def _table(spec, runs: dict[str, RunOutput]) -> dict:
    if spec.metric in ("delta_fidelity", "delta_hitting"):
        fn = delta_fidelity if spec.metric == "delta_fidelity" else delta_hitting
        ref = runs[spec.reference].sweep
        return {"metric": spec.metric, "reference": spec.reference,
                "values": {a: fn(ref, runs[a].sweep) for a in spec.against}}
    if spec.metric == "mitigation_error":
        target = runs[spec.against[0]]
        if target.mitigation is None:
            raise FitError(f"run {target.config.name} has no mitigation fit")
        rows = error_table(runs[spec.reference].sweep, target.sweep, target.mitigation)
        return {"metric": spec.metric, "reference": spec.reference, "target": spec.against[0],
                "rows": [[r.n_steps, r.raw, r.rescaled, r.mitigated, r.points] for r in rows]}
    return {"metric": spec.metric, "values": {a: _fit_value(runs[a], spec.metric) for a in spec.against}}


def _table_rows(spec, table: dict):
    if spec.metric == "mitigation_error":
        return ("n_steps", "raw", "rescaled", "mitigated", "points"), table["rows"]
    return ("run", spec.metric), [(k, v) for k, v in table["values"].items()]


# ---------------------------------------------------------------------------
# Saved runs


def load_run(directory: str | Path) -> tuple[ExperimentConfig, SweepResult]:
    """Read a run directory written by :func:`run_experiment`."""
    d = Path(directory)
    if not (d / "series.csv").is_file():
        raise InputError(f"{d} is not a run directory (series.csv missing)")
    cfg = ExperimentConfig.from_dict(json.loads((d / "config.json").read_text()))
    return cfg, _read_series(d / "series.csv", cfg.name)


def _read_series(path: Path, label: str) -> SweepResult:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["n_steps", "t_model", "fidelity"]:
            raise InputError(f"{path}: unexpected header {header}")
        data: dict[int, tuple[list, list]] = {}
        for row in reader:
            n, t, f = int(row[0]), float(row[1]), float(row[2])
            ts, fs = data.setdefault(n, ([], []))
            ts.append(t)
            fs.append(f)
    records = tuple(TransferRecord(n, np.array(ts), np.array(fs)) for n, (ts, fs) in sorted(data.items()))
    return SweepResult(records, label)


def compare_runs(run_a: str | Path, run_b: str | Path, metric: str) -> dict:
    """Metric between two saved runs; ``dynamics_error`` is reported per depth."""
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}; expected one of {list(METRICS)}")
    _, a = load_run(run_a)
    _, b = load_run(run_b)
    if not np.array_equal(a.n_steps, b.n_steps):
        raise ComparisonError(f"depth ranges differ: {a.n_steps.tolist()} vs {b.n_steps.tolist()}")
    if metric == "delta_fidelity":
        return {"metric": metric, "value": delta_fidelity(a, b)}
    if metric == "delta_hitting":
        return {"metric": metric, "value": delta_hitting(a, b)}
    rows = []
    for ra, rb in zip(a.records, b.records):
        if not np.array_equal(ra.t_grid, rb.t_grid):
            raise ComparisonError(f"time grids differ at N={ra.n_steps}")
        rows.append([ra.n_steps, dynamics_error(ra.fidelity, rb.fidelity)])
    return {"metric": metric, "rows": rows}


def mitigate_run(
    run: str | Path,
    out_dir: str | Path | None = None,
    reference: str | Path | None = None,
) -> dict:
    """Fit and apply mitigation to a saved run; optionally score it against a reference run."""
    cfg, sweep = load_run(run)
    target = Path(out_dir) if out_dir is not None else Path(run)
    m = mitigate(sweep, n_min=cfg.fit_n_min, n_max=cfg.fit_n_max, skip_unmitigatable=True)
    _write_mitigation(target, m)
    report = {"fit": m.fit.to_dict()}
    if reference is not None:
        _, ref = load_run(reference)
        rows = error_table(ref, sweep, m)
        _atomic_write(
            target / "mitigation_error.csv",
            _csv_text(("n_steps", "raw", "rescaled", "mitigated", "points"),
                      [[r.n_steps, r.raw, r.rescaled, r.mitigated, r.points] for r in rows]),
        )
        report["errors"] = [[r.n_steps, r.raw, r.rescaled, r.mitigated, r.points] for r in rows]
    return report


def validate_threads(threads: int) -> int:
    if threads < 1:
        raise ConfigError("--threads", f"must be at least 1, got {threads}")
    return threads
