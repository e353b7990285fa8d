"""Gate set and the two-qubit XY interaction block.

The XY block is the circuit

    (H S^dagger H) x2 . CNOT . (Rx(theta) x Rz(theta)) . CNOT . (H S H) x2

which composes to ``exp(-i theta/2 (XX + YY))`` up to a global phase.  The
basis changes ``H S^dagger H`` and ``H S H`` equal ``Rx(-pi/2)`` and
``Rx(pi/2)``; :class:`BasisChange` selects whether they are scheduled as one
native pulse each or as three separate gates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError

# Durations used when a caller does not supply its own (seconds).
DEFAULT_L1Q = 35.5e-9
DEFAULT_L2Q = 340e-9

_SQ2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = _SQ2 * np.array([[1, 1], [1, -1]], dtype=np.complex128)
S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
SDG = S.conj().T
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128
    )


class GateKind(str, enum.Enum):
    H = "H"
    S = "S"
    SDG = "Sdg"
    RX = "Rx"
    RZ = "Rz"
    CNOT = "CNOT"

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.CNOT else 1

    @property
    def parametric(self) -> bool:
        return self in (GateKind.RX, GateKind.RZ)


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    targets: tuple[int, ...]
    duration: float
    theta: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != kind.arity:
            raise InputError(f"{kind.value} needs {kind.arity} targets, got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise InputError(f"duplicate targets {self.targets}")
        if not self.duration > 0:
            raise InputError(f"gate duration must be positive, got {self.duration}")
        if kind.parametric and self.theta is None:
            raise InputError(f"{kind.value} requires an angle")
        if not kind.parametric and self.theta is not None:
            raise InputError(f"{kind.value} takes no angle")

    @property
    def arity(self) -> int:
        return self.kind.arity


def gate_matrix(g: GateOp) -> np.ndarray:
    """Unitary of ``g`` on its own targets (``targets[0]`` most significant)."""
    if g.kind is GateKind.H:
        return H.copy()
    if g.kind is GateKind.S:
        return S.copy()
    if g.kind is GateKind.SDG:
        return SDG.copy()
    if g.kind is GateKind.RX:
        return rx(g.theta)
    if g.kind is GateKind.RZ:
        return rz(g.theta)
    return CNOT.copy()


@dataclass(frozen=True)
class CircuitLayer:
    """Gates that run simultaneously; targets are pairwise disjoint."""

    gates: tuple[GateOp, ...]
    duration: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise InputError("a layer needs at least one gate")
        seen: set[int] = set()
        for g in self.gates:
            if seen.intersection(g.targets):
                raise InputError(f"qubit used twice in one layer: {g.targets}")
            seen.update(g.targets)
        object.__setattr__(self, "duration", max(g.duration for g in self.gates))

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for g in self.gates for q in g.targets)

    @property
    def parametric(self) -> bool:
        return any(g.kind.parametric for g in self.gates)


@dataclass(frozen=True)
class AngleConvention:
    """Maps a bond coupling and Trotter step to the XY block angle.

    ``theta = sign * scale * J * dt``, and the block realizes
    ``exp(-i dt c (XX + YY))`` with ``c = sign * scale * J / 2``.

    With the default ``scale=0.5`` a bond of coupling ``J`` moves an excitation
    at amplitude rate ``J/2``; a three-site chain with ``J = 2 sqrt(2)``
    (``C = 2``) then transfers perfectly at ``t = pi/2`` and returns at
    ``t = pi``.
    """

    scale: float = 0.5
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        if not self.scale > 0:
            raise InputError("scale must be positive")

    def theta(self, coupling, dt):
        return self.sign * self.scale * coupling * dt

    def generator_coefficient(self, coupling: float) -> float:
        """``c`` such that the block equals ``exp(-i dt c (XX + YY))``."""
        return self.sign * self.scale * coupling / 2


class BasisChange(str, enum.Enum):
    # H S^dagger H -> Rx(-pi/2), H S H -> Rx(pi/2): one pulse, one error, one L1q
    NATIVE = "native"
    # three separate gates, each with its own error and duration
    EXPANDED = "expanded"


def xy_block_layers(
    theta: float,
    q_pair: Sequence[int],
    l1q: float = DEFAULT_L1Q,
    l2q: float = DEFAULT_L2Q,
    basis_change: BasisChange | str = BasisChange.NATIVE,
) -> list[CircuitLayer]:
    """The XY block on an adjacent pair as scheduled layers.

    Five layers with native basis changes, nine when they are expanded.
    """
    a, b = (int(q) for q in q_pair)
    if b != a + 1 or a < 0:
        raise InputError(f"XY block needs an adjacent pair (i, i+1), got {tuple(q_pair)}")
    basis_change = BasisChange(basis_change)

    def both(kind, angle=None):
        return CircuitLayer(
            (GateOp(kind, (a,), l1q, theta=angle), GateOp(kind, (b,), l1q, theta=angle))
        )

    cnot = CircuitLayer((GateOp(GateKind.CNOT, (a, b), l2q),))
    rot = CircuitLayer(
        (
            GateOp(GateKind.RX, (a,), l1q, theta=theta),
            GateOp(GateKind.RZ, (b,), l1q, theta=theta),
        )
    )
    if basis_change is BasisChange.NATIVE:
        return [both(GateKind.RX, -np.pi / 2), cnot, rot, cnot, both(GateKind.RX, np.pi / 2)]
    return [
        both(GateKind.H),
        both(GateKind.SDG),
        both(GateKind.H),
        cnot,
        rot,
        cnot,
        both(GateKind.H),
        both(GateKind.S),
        both(GateKind.H),
    ]


def xy_block(
    theta: float,
    q_pair: Sequence[int],
    l1q: float = DEFAULT_L1Q,
    l2q: float = DEFAULT_L2Q,
    basis_change: BasisChange | str = BasisChange.EXPANDED,
) -> list[GateOp]:
    """Flat gate list of the XY block, in application order (expanded by default)."""
    layers = xy_block_layers(theta, q_pair, l1q, l2q, basis_change)
    return [g for layer in layers for g in layer.gates]


def layer_unitary(layer: CircuitLayer, n_qubits: int) -> np.ndarray:
    """Full ``2^n`` unitary of one layer."""
    from .core import embed

    u = np.eye(2**n_qubits, dtype=np.complex128)
    for g in layer.gates:
        u = embed(gate_matrix(g), g.targets, n_qubits) @ u
    return u


def compose(gates: Sequence[GateOp], n_qubits: int) -> np.ndarray:
    """Product of gate unitaries applied in list order."""
    from .core import embed

    u = np.eye(2**n_qubits, dtype=np.complex128)
    for g in gates:
        u = embed(gate_matrix(g), g.targets, n_qubits) @ u
    return u
