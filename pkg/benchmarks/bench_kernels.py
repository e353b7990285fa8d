"""Compare the compiled kernel with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat R]

Three measurements:
  * ``apply_local_kraus`` on its own, for both backends;
  * one layer-by-layer :func:`simulate` call, for both backends;
  * a full bundled experiment, run in a subprocess per backend
    (``NOISY_PST_PURE_PYTHON=1`` selects the fallback at import).
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from noisy_pst import _kernels_py, channels, kernels
from noisy_pst.simulator import ChainSpec, Crosstalk, Decoherence, NoiseModel, build_circuit, initial_state, simulate

try:
    from noisy_pst import _kernels as _compiled
except ImportError:
    _compiled = None

_E2E = """
import time
from noisy_pst import BACKEND
from noisy_pst.harness.config import load_config
from noisy_pst.harness.runner import compute_sweep
from noisy_pst.simulator import build_circuit, initial_state, simulate
cfg = load_config("exp2")
start = time.perf_counter()
compute_sweep(cfg)
sweep = time.perf_counter() - start
chain, noise = cfg.build_chain(), cfg.build_noise()
start = time.perf_counter()
for t in cfg.t_grid[::10]:
    simulate(build_circuit(chain, t, 10, cfg.convention, noise.l1q, noise.l2q), noise, initial_state(3))
walk = time.perf_counter() - start
print(BACKEND, sweep, walk)
"""


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernel(repeat: int) -> list[dict]:
    rng = np.random.default_rng(0)
    rows = []
    for n in (3, 5, 7):
        d = 2**n
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = np.ascontiguousarray(g @ g.conj().T / np.trace(g @ g.conj().T))
        for k, kraus in ((1, channels.depolarizing_1q(0.01)), (2, channels.lift_2q(channels.depolarizing_1q(0.01)))):
            ops = np.asarray(kraus)
            targets = list(range(k))
            row = {"n_qubits": n, "arity": k}
            row["python_s"] = _best(lambda: _kernels_py.apply_local_kraus(rho, ops, targets, n), repeat)
            if _compiled is not None:
                row["compiled_s"] = _best(lambda: _compiled.apply_local_kraus(rho, ops, targets, n), repeat)
                row["speedup"] = row["python_s"] / row["compiled_s"]
            rows.append(row)
    return rows


def bench_simulate(repeat: int) -> dict:
    chain = ChainSpec.pst(4, 1.0)
    noise = NoiseModel(
        channels.ChannelSpec.depolarizing(1e-3), channels.ChannelSpec.depolarizing(1e-2),
        Crosstalk(1e4), Decoherence(80e-6, 140e-6),
    )
    circuit = build_circuit(chain, 1.0, 10)
    rho0 = initial_state(4)
    out = {}
    saved = kernels.apply_local_kraus
    try:
        for name, impl in (("python", _kernels_py), ("compiled", _compiled)):
            if impl is None:
                continue
            kernels.apply_local_kraus = impl.apply_local_kraus
            out[f"{name}_s"] = _best(lambda: simulate(circuit, noise, rho0), repeat)
    finally:
        kernels.apply_local_kraus = saved
    return out


def bench_end_to_end() -> dict:
    out = {}
    for flag in ("", "1"):
        env = dict(os.environ)
        env.pop("NOISY_PST_PURE_PYTHON", None)
        if flag:
            env["NOISY_PST_PURE_PYTHON"] = flag
        res = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True, text=True, check=True)
        backend, sweep, walk = res.stdout.split()
        out[backend] = {"sweep_s": float(sweep), "layer_walk_s": float(walk)}
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    result = {
        "default_backend": kernels.BACKEND,
        "kernel": bench_kernel(args.repeat),
        "simulate_4q_10_steps": bench_simulate(args.repeat),
        "end_to_end_exp2": bench_end_to_end(),
    }
    print(json.dumps(result, indent=2))


if __name__ == "__main__":
    main()
