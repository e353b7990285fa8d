"""Kernel selection: compiled extension when importable, NumPy otherwise.

Set ``NOISY_PST_PURE_PYTHON=1`` to force the fallback.  Above
``COMPILED_MAX_QUBITS`` the NumPy path is used regardless, since its
BLAS-backed contraction overtakes the compiled block loop there.
"""

import os

from . import _kernels_py

COMPILED_MAX_QUBITS = 6

if os.environ.get("NOISY_PST_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"


def _dispatch(rho, kraus, targets, n_qubits):
    if n_qubits > COMPILED_MAX_QUBITS:
        return _kernels_py.apply_local_kraus(rho, kraus, targets, n_qubits)
    return _impl.apply_local_kraus(rho, kraus, targets, n_qubits)


apply_local_kraus = _impl.apply_local_kraus if _impl is _kernels_py else _dispatch
