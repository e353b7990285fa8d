import os
import subprocess
import sys

import numpy as np
import pytest

from noisy_pst import _kernels_py, kernels
from noisy_pst.core import embed

from .oracles import random_density_matrix, random_unitary

compiled = pytest.importorskip("noisy_pst._kernels", reason="compiled extension not built")


def dense(rho, kraus, targets, n):
    full = [embed(E, targets, n) for E in kraus]
    return sum(F @ rho @ F.conj().T for F in full)


@pytest.mark.parametrize("impl", [compiled, _kernels_py], ids=["compiled", "python"])
@pytest.mark.parametrize("targets", [(0,), (2,), (3,), (0, 1), (3, 1), (2, 0)])
def test_kernel_matches_dense(impl, targets, rng):
    n = 4
    rho = random_density_matrix(rng, n)
    k = len(targets)
    kraus = np.stack([random_unitary(rng, 2**k) * np.sqrt(w) for w in (0.6, 0.4)])
    out = impl.apply_local_kraus(np.ascontiguousarray(rho), kraus, list(targets), n)
    np.testing.assert_allclose(out, dense(rho, kraus, targets, n), atol=1e-13)


def test_backends_agree_bitwise_close(rng):
    rho = random_density_matrix(rng, 5)
    kraus = np.stack([random_unitary(rng, 4)])
    a = compiled.apply_local_kraus(rho, kraus, [4, 2], 5)
    b = _kernels_py.apply_local_kraus(rho, kraus, [4, 2], 5)
    assert np.max(np.abs(a - b)) < 1e-14


def test_default_backend_is_compiled():
    assert kernels.BACKEND == "compiled"


def test_env_var_selects_python_fallback():
    env = dict(os.environ, NOISY_PST_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import noisy_pst; print(noisy_pst.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_large_registers_route_to_numpy(rng, monkeypatch):
    calls = []
    monkeypatch.setattr(_kernels_py, "apply_local_kraus", lambda *a: calls.append(a[3]) or a[0])
    rho = np.eye(2 ** (kernels.COMPILED_MAX_QUBITS + 1)) / 2 ** (kernels.COMPILED_MAX_QUBITS + 1)
    kernels.apply_local_kraus(rho, np.eye(2)[None], [0], kernels.COMPILED_MAX_QUBITS + 1)
    assert calls == [kernels.COMPILED_MAX_QUBITS + 1]
