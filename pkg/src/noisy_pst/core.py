"""Dense density-matrix primitives.

States and operators are plain ``complex128`` NumPy arrays.  Qubit 0 is the
most significant bit of the computational-basis index, so ``|100>`` on three
qubits is basis index 4.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import kernels
from .errors import ContractError, InputError
from .policy import get_policy

__all__ = [
    "n_qubits_of",
    "basis_state",
    "basis_projector",
    "embed",
    "apply_unitary",
    "apply_kraus",
    "expectation",
    "is_unitary",
    "completeness_error",
    "check_density_matrix",
]


def n_qubits_of(matrix: np.ndarray) -> int:
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != dim or dim < 1 or dim & (dim - 1):
        raise InputError(f"expected a square 2^n matrix, got shape {matrix.shape}")
    return dim.bit_length() - 1


def basis_state(n_qubits: int, bitstring: str | Sequence[int]) -> np.ndarray:
    """Projector ``|b><b|`` for the computational basis state ``b``."""
    bits = [int(b) for b in bitstring]
    if len(bits) != n_qubits:
        raise InputError(
            f"bitstring has {len(bits)} bits but n_qubits={n_qubits}"
        )
    if any(b not in (0, 1) for b in bits):
        raise InputError(f"bitstring must contain only 0/1, got {bitstring!r}")
    index = int("".join(map(str, bits)), 2) if bits else 0
    rho = np.zeros((2**n_qubits, 2**n_qubits), dtype=np.complex128)
    rho[index, index] = 1.0
    return rho


def basis_projector(n_qubits: int, bitstring: str | Sequence[int]) -> np.ndarray:
    return basis_state(n_qubits, bitstring)


def _check_targets(targets: Sequence[int], arity: int, n_qubits: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(targets) != arity:
        raise InputError(f"operator acts on {arity} qubits, got targets {targets}")
    if len(set(targets)) != len(targets):
        raise InputError(f"duplicate target qubits {targets}")
    if any(t < 0 or t >= n_qubits for t in targets):
        raise InputError(f"targets {targets} out of range for {n_qubits} qubits")
    return targets


def embed(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Lift a ``k``-qubit operator onto ``targets`` of an ``n``-qubit register.

    ``targets[0]`` is the most significant qubit of ``op``'s own basis, so
    ``embed(CNOT, [1, 0], 2)`` is a CNOT controlled by qubit 1.
    """
    op = np.asarray(op, dtype=np.complex128)
    k = n_qubits_of(op)
    targets = _check_targets(targets, k, n_qubits)
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=np.complex128))
    # full acts on qubit order targets + rest; permute to natural order.
    order = targets + rest
    inv = np.argsort(order)
    n = n_qubits
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(inv) + [n + i for i in inv])
    return np.ascontiguousarray(t.reshape(2**n, 2**n))


def is_unitary(op: np.ndarray, tol: float | None = None) -> bool:
    tol = get_policy().unitary_tol if tol is None else tol
    op = np.asarray(op)
    return bool(np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))) < tol)


def completeness_error(kraus: Sequence[np.ndarray]) -> float:
    """``max |sum E^dagger E - I|`` for a Kraus set."""
    ops = np.asarray(kraus, dtype=np.complex128)
    total = np.einsum("kji,kjl->il", ops.conj(), ops)
    return float(np.max(np.abs(total - np.eye(ops.shape[1]))))


def apply_unitary(
    rho: np.ndarray,
    op: np.ndarray,
    targets: Sequence[int],
    *,
    strict: bool | None = None,
) -> np.ndarray:
    """Return ``U rho U^dagger`` with ``U`` acting on ``targets``."""
    op = np.asarray(op, dtype=np.complex128)
    strict = get_policy().strict if strict is None else strict
    if strict and not is_unitary(op):
        raise ContractError("operator is not unitary")
    return apply_kraus(rho, [op], targets, check=False)


def apply_kraus(
    rho: np.ndarray,
    kraus: Sequence[np.ndarray],
    targets: Sequence[int],
    *,
    check: bool | None = None,
) -> np.ndarray:
    """Return ``sum_k E_k rho E_k^dagger`` with each ``E_k`` on ``targets``."""
    n = n_qubits_of(rho)
    ops = np.asarray(kraus, dtype=np.complex128)
    if ops.ndim == 2:
        ops = ops[None]
    k = n_qubits_of(ops[0])
    targets = _check_targets(targets, k, n)
    check = get_policy().strict if check is None else check
    if check:
        err = completeness_error(ops)
        if err > get_policy().completeness_tol:
            raise ContractError(f"Kraus set is not trace preserving (error {err:.2e})")
    if k > 2:
        full = np.stack([embed(E, targets, n) for E in ops])
        return np.einsum("kij,jl,kml->im", full, rho, full.conj())
    return kernels.apply_local_kraus(
        np.ascontiguousarray(rho, dtype=np.complex128), ops, targets, n
    )


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    """``Tr[obs rho]`` for a Hermitian observable."""
    obs = np.asarray(obs)
    pol = get_policy()
    if np.max(np.abs(obs - obs.conj().T)) > pol.hermitian_tol:
        raise ContractError("observable is not Hermitian")
    value = np.einsum("ij,ji->", obs, rho)
    if abs(value.imag) > pol.imag_tol:
        raise ContractError(f"expectation has imaginary part {value.imag:.2e}")
    return float(value.real)


def check_density_matrix(rho: np.ndarray, *, psd: bool = True) -> None:
    """Raise ``ContractError`` unless ``rho`` is a valid density matrix.

    The eigenvalue check is meant for tests and debugging, not hot loops.
    """
    pol = get_policy()
    tr = np.trace(rho)
    if abs(tr - 1.0) > pol.trace_tol:
        raise ContractError(f"trace is {tr}")
    if np.max(np.abs(rho - rho.conj().T)) > pol.hermitian_tol:
        raise ContractError("density matrix is not Hermitian")
    if not np.all(np.isfinite(rho)):
        raise ContractError("density matrix has non-finite entries")
    if psd:
        lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
        if lo < -pol.psd_tol:
            raise ContractError(f"density matrix has eigenvalue {lo:.2e}")
