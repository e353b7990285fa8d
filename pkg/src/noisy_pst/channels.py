"""Noise channels as Kraus sets.

Every channel is a list of ``2^k x 2^k`` Kraus matrices; unitary noise
(crosstalk) is a single unitary matrix and can be wrapped as a one-element
set.  Two-qubit gate noise is always the uncorrelated product of the
single-qubit channel on each qubit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import completeness_error
from .errors import InputError
from .gates import I2, X, Y, Z

__all__ = [
    "ChannelKind",
    "ChannelSpec",
    "depolarizing_1q",
    "pauli_1q",
    "lift_2q",
    "crosstalk_zz",
    "thermal_t1",
    "dephasing_t2",
    "apply_1q_map",
]


def _probability(name: str, p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise InputError(f"{name} must be a probability in [0, 1], got {p}")
    return p


def depolarizing_1q(q: float) -> list[np.ndarray]:
    """``rho -> (1 - q) rho + q I/2`` as four Pauli-weighted Kraus operators."""
    q = _probability("q", q)
    a = math.sqrt(q / 4)
    return [math.sqrt(1 - 3 * q / 4) * I2, a * X, a * Y, a * Z]


def pauli_1q(p_x: float, p_y: float, p_z: float) -> list[np.ndarray]:
    p_x, p_y, p_z = (_probability(n, v) for n, v in (("p_x", p_x), ("p_y", p_y), ("p_z", p_z)))
    p = p_x + p_y + p_z
    if p > 1 + 1e-15:
        raise InputError(f"p_x + p_y + p_z = {p} exceeds 1")
    return [
        math.sqrt(max(0.0, 1 - p)) * I2,
        math.sqrt(p_x) * X,
        math.sqrt(p_y) * Y,
        math.sqrt(p_z) * Z,
    ]


def lift_2q(kraus: list[np.ndarray]) -> list[np.ndarray]:
    """Product channel ``Phi x Phi``: all pairwise tensor products ``E_i x E_j``."""
    return [np.kron(a, b) for a in kraus for b in kraus]


def crosstalk_zz(zeta: float, tau: float) -> np.ndarray:
    """``diag(e^{-i phi}, e^{i phi}, e^{i phi}, e^{-i phi})`` with ``phi = zeta * tau``."""
    if tau < 0:
        raise InputError(f"duration must be non-negative, got {tau}")
    phi = zeta * tau
    return np.diag(np.exp(1j * phi * np.array([-1, 1, 1, -1]))).astype(np.complex128)


def thermal_t1(t1: float, tau: float) -> list[np.ndarray]:
    """Amplitude damping for a time ``tau`` with lifetime ``t1``."""
    if not t1 > 0:
        raise InputError(f"T1 must be positive, got {t1}")
    if tau < 0:
        raise InputError(f"duration must be non-negative, got {tau}")
    gamma = -math.expm1(-tau / t1)
    e1 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=np.complex128)
    e2 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=np.complex128)
    return [e1, e2]


def dephasing_t2(t2: float, tau: float) -> list[np.ndarray]:
    """Pure dephasing: coherences shrink by exactly ``exp(-tau / t2)``.

    Uses ``gamma2 = (1 + exp(-tau/t2)) / 2`` for the weight of the identity
    branch, which is what makes ``gamma2 rho + (1 - gamma2) Z rho Z`` reproduce
    the ``exp(-tau/t2)`` off-diagonal factor.
    """
    if not t2 > 0:
        raise InputError(f"T2 must be positive, got {t2}")
    if tau < 0:
        raise InputError(f"duration must be non-negative, got {tau}")
    gamma2 = (1 + math.exp(-tau / t2)) / 2
    return [math.sqrt(gamma2) * I2, math.sqrt(1 - gamma2) * Z]


def apply_1q_map(rho: np.ndarray, kraus: list[np.ndarray]) -> np.ndarray:
    """Apply a Kraus set to a matrix of matching size (no embedding)."""
    return sum(E @ rho @ E.conj().T for E in kraus)


class ChannelKind(str, enum.Enum):
    DEPOLARIZING_1Q = "Depolarizing1q"
    DEPOLARIZING_2Q = "Depolarizing2q"
    PAULI_1Q = "Pauli1q"
    PAULI_2Q = "Pauli2q"
    CROSSTALK_ZZ = "CrosstalkZZ"
    THERMAL_T1 = "ThermalT1"
    DEPHASING_T2 = "DephasingT2"


_REQUIRED = {
    ChannelKind.DEPOLARIZING_1Q: ("q",),
    ChannelKind.DEPOLARIZING_2Q: ("q",),
    ChannelKind.PAULI_1Q: ("p_x", "p_y", "p_z"),
    ChannelKind.PAULI_2Q: ("p_x", "p_y", "p_z"),
    ChannelKind.CROSSTALK_ZZ: ("zeta", "tau"),
    ChannelKind.THERMAL_T1: ("t1", "tau"),
    ChannelKind.DEPHASING_T2: ("t2", "tau"),
}


@dataclass(frozen=True)
class ChannelSpec:
    """Serializable description of one channel.

    Gate-error specs (depolarizing / Pauli) carry no duration; ``kraus()``
    builds the operators.  ``2q`` kinds return the lifted 4x4 set.
    """

    kind: ChannelKind
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kind = ChannelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        params = {k: float(v) for k, v in dict(self.params).items()}
        missing = [k for k in _REQUIRED[kind] if k not in params]
        if missing:
            raise InputError(f"{kind.value} needs parameters {missing}")
        extra = set(params) - set(_REQUIRED[kind])
        if extra:
            raise InputError(f"{kind.value} got unknown parameters {sorted(extra)}")
        object.__setattr__(self, "params", params)
        self.kraus()  # validates ranges

    @classmethod
    def depolarizing(cls, q: float, two_qubit: bool = False) -> "ChannelSpec":
        kind = ChannelKind.DEPOLARIZING_2Q if two_qubit else ChannelKind.DEPOLARIZING_1Q
        return cls(kind, {"q": q})

    @classmethod
    def pauli(cls, p_x: float, p_y: float, p_z: float, two_qubit: bool = False) -> "ChannelSpec":
        kind = ChannelKind.PAULI_2Q if two_qubit else ChannelKind.PAULI_1Q
        return cls(kind, {"p_x": p_x, "p_y": p_y, "p_z": p_z})

    @property
    def arity(self) -> int:
        if self.kind in (ChannelKind.DEPOLARIZING_2Q, ChannelKind.PAULI_2Q, ChannelKind.CROSSTALK_ZZ):
            return 2
        return 1

    def kraus(self) -> list[np.ndarray]:
        p = self.params
        k = self.kind
        if k in (ChannelKind.DEPOLARIZING_1Q, ChannelKind.DEPOLARIZING_2Q):
            ops = depolarizing_1q(p["q"])
        elif k in (ChannelKind.PAULI_1Q, ChannelKind.PAULI_2Q):
            ops = pauli_1q(p["p_x"], p["p_y"], p["p_z"])
        elif k is ChannelKind.CROSSTALK_ZZ:
            return [crosstalk_zz(p["zeta"], p["tau"])]
        elif k is ChannelKind.THERMAL_T1:
            return thermal_t1(p["t1"], p["tau"])
        else:
            return dephasing_t2(p["t2"], p["tau"])
        if k in (ChannelKind.DEPOLARIZING_2Q, ChannelKind.PAULI_2Q):
            return lift_2q(ops)
        return ops

    def as_two_qubit(self) -> "ChannelSpec":
        """The lifted counterpart of a 1q gate-error spec (identity for 2q kinds)."""
        lift = {
            ChannelKind.DEPOLARIZING_1Q: ChannelKind.DEPOLARIZING_2Q,
            ChannelKind.PAULI_1Q: ChannelKind.PAULI_2Q,
        }
        if self.kind in lift:
            return ChannelSpec(lift[self.kind], self.params)
        if self.kind in lift.values():
            return self
        raise InputError(f"{self.kind.value} is not a gate-error channel")

    def as_one_qubit(self) -> "ChannelSpec":
        lower = {
            ChannelKind.DEPOLARIZING_2Q: ChannelKind.DEPOLARIZING_1Q,
            ChannelKind.PAULI_2Q: ChannelKind.PAULI_1Q,
        }
        if self.kind in lower:
            return ChannelSpec(lower[self.kind], self.params)
        if self.kind in lower.values():
            return self
        raise InputError(f"{self.kind.value} is not a gate-error channel")

    def completeness_error(self) -> float:
        return completeness_error(self.kraus())

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, **self.params}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ChannelSpec":
        data = dict(data)
        kind = data.pop("kind")
        return cls(ChannelKind(kind), data)
