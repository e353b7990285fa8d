"""Command-line entry point.

    noisy-pst run <config> [--out-dir D] [--grid-points K] [--threads T]
    noisy-pst compare <runA> <runB> --metric {delta_fidelity,delta_hitting,dynamics_error}
    noisy-pst mitigate <run> [--reference RUN] [--out-dir D]
    noisy-pst list

``<config>`` is a JSON file or the name of a bundled config (``exp1``,
``table5.json``, ...).  Results go to stdout as JSON; errors go to stderr as
a JSON object and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import ComparisonError, ConfigError, FitError, InputError, PSTError
from . import runner
from .config import ExperimentConfig, bundled_configs, load_config

EXIT_CONFIG = 2
EXIT_COMPARISON = 3
EXIT_FIT = 4
EXIT_OTHER = 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="noisy-pst", description="Noisy Trotterized state-transfer experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment or suite config")
    r.add_argument("config")
    r.add_argument("--out-dir", default="runs")
    r.add_argument("--grid-points", type=int, default=None, help="override the time-grid size")
    r.add_argument("--threads", type=int, default=1, help="worker processes for the depth sweep")

    c = sub.add_parser("compare", help="compare two saved runs")
    c.add_argument("run_a")
    c.add_argument("run_b")
    c.add_argument("--metric", required=True, choices=runner.METRICS)
    c.add_argument("--out-dir", default=None, help="also write the report here")

    m = sub.add_parser("mitigate", help="fit and apply mitigation to a saved run")
    m.add_argument("run")
    m.add_argument("--reference", default=None, help="noiseless run to score against")
    m.add_argument("--out-dir", default=None, help="write outputs here instead of the run directory")

    sub.add_parser("list", help="list bundled configs")
    return p


def _error(kind: str, message: str, field: str | None = None) -> None:
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _run(args) -> dict:
    runner.validate_threads(args.threads)
    if args.grid_points is not None and args.grid_points < 2:
        raise ConfigError("--grid-points", f"must be at least 2, got {args.grid_points}")
    cfg = load_config(args.config)
    if isinstance(cfg, ExperimentConfig):
        cfg = cfg.with_overrides(grid_points=args.grid_points)
        out = runner.run_experiment(cfg, args.out_dir, args.threads)
        return {
            "run": str(out.directory),
            "fit": out.mitigation.fit.to_dict() if out.mitigation else None,
            "fit_error": out.mitigation_error,
        }
    tables = runner.run_suite(cfg, args.out_dir, args.threads, args.grid_points)
    return {"suite": cfg.name, "directory": str(Path(args.out_dir) / cfg.name), "tables": tables}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            _emit(_run(args))
        elif args.command == "compare":
            report = runner.compare_runs(args.run_a, args.run_b, args.metric)
            if args.out_dir:
                runner._atomic_write(Path(args.out_dir) / f"compare_{args.metric}.json", runner._json_text(report))
            _emit(report)
        elif args.command == "mitigate":
            _emit(runner.mitigate_run(args.run, args.out_dir, args.reference))
        else:
            _emit(bundled_configs())
    except ConfigError as exc:
        _error("ConfigError", exc.message, exc.field)
        return EXIT_CONFIG
    except ComparisonError as exc:
        _error("ComparisonError", str(exc))
        return EXIT_COMPARISON
    except FitError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_FIT
    except (InputError, PSTError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_CONFIG if isinstance(exc, InputError) else EXIT_OTHER
    except OSError as exc:
        _error("OSError", str(exc))
        return EXIT_OTHER
    return 0


if __name__ == "__main__":
    sys.exit(main())
