"""Pure-NumPy implementation of the local channel kernel.

Mirrors the compiled ``_kernels`` extension and is used whenever the
extension is unavailable (or ``NOISY_PST_PURE_PYTHON`` is set).
"""

import numpy as np


def apply_local_kraus(rho, kraus, targets, n_qubits):
    """Return ``sum_k E_k rho E_k^dagger`` with each ``E_k`` acting on ``targets``.

    ``rho`` is ``(2**n, 2**n)``; ``kraus`` is ``(K, 2**k, 2**k)``; qubit 0 is
    the most significant bit of the basis index.
    """
    k = len(targets)
    n = n_qubits
    targets = list(targets)
    rest = [q for q in range(n) if q not in targets]
    # Tensor axes: row bits 0..n-1, column bits n..2n-1.
    perm = targets + rest + [n + q for q in targets] + [n + q for q in rest]
    inv = np.argsort(perm)
    m = 2**k
    r = 2 ** (n - k)
    t = rho.reshape((2,) * (2 * n)).transpose(perm).reshape(m, r, m, r)
    ops = np.asarray(kraus).reshape(-1, m, m)
    # out[a', x, b', y] = sum_k E[a', a] t[a, x, b, y] conj(E[b', b])
    out = np.einsum("kij,jxly,kml->ixmy", ops, t, ops.conj(), optimize=True)
    return np.ascontiguousarray(
        out.reshape((2,) * (2 * n)).transpose(inv).reshape(rho.shape)
    )
