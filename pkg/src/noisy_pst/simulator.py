"""Trotterized state transfer on a qubit chain under configurable noise.

Two evaluation paths share one noise schedule:

* :func:`simulate` walks a :class:`TrotterCircuit` layer by layer, applying
  Kraus sets with the local kernel.  It is the reference semantics.
* :func:`fidelity_series` compiles one Trotter step into fused Liouville
  superoperators plus angle-dependent unitaries and propagates the whole time
  grid at once.  Tests pin it to :func:`simulate`.

Per layer the schedule is: gate unitaries, gate-error channel on every gated
qubit (lifted channel after CNOTs), T1 then T2 on the decohering qubits for
the layer duration, then ZZ crosstalk on every neighbouring pair.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import channels as ch
from .core import apply_kraus, apply_unitary, basis_state, embed, n_qubits_of
from .errors import InputError
from .gates import (
    DEFAULT_L1Q,
    DEFAULT_L2Q,
    AngleConvention,
    BasisChange,
    CircuitLayer,
    GateKind,
    gate_matrix,
    layer_unitary,
    rx,
    rz,
    xy_block_layers,
)

__all__ = [
    "build_couplings",
    "ChainSpec",
    "CrosstalkMode",
    "Crosstalk",
    "Decoherence",
    "NoiseModel",
    "TrotterCircuit",
    "build_circuit",
    "initial_state",
    "transfer_observable",
    "simulate",
    "fidelity_series",
    "StepProgram",
]

# Largest register for which full superoperators (4^n x 4^n) are built.
MAX_TRANSFER_QUBITS = 5
# Offset of the placeholder angles that tag each Trotter rotation with its bond.
_BOND_MARK = 1000.0


def build_couplings(n_qubits: int, C: float) -> list[float]:
    """Mirror-symmetric couplings ``J_i = C sqrt(i (n - i))`` for ``i = 1..n-1``."""
    if n_qubits < 2:
        raise InputError(f"a chain needs at least 2 qubits, got {n_qubits}")
    if not C > 0:
        raise InputError(f"coupling scale must be positive, got {C}")
    return [C * math.sqrt(i * (n_qubits - i)) for i in range(1, n_qubits)]


@dataclass(frozen=True)
class ChainSpec:
    n_qubits: int
    couplings: tuple[float, ...]

    def __post_init__(self):
        if self.n_qubits < 2:
            raise InputError(f"a chain needs at least 2 qubits, got {self.n_qubits}")
        couplings = tuple(float(j) for j in self.couplings)
        if len(couplings) != self.n_qubits - 1:
            raise InputError(
                f"{self.n_qubits} qubits need {self.n_qubits - 1} couplings, got {len(couplings)}"
            )
        object.__setattr__(self, "couplings", couplings)

    @classmethod
    def pst(cls, n_qubits: int, C: float) -> "ChainSpec":
        return cls(n_qubits, tuple(build_couplings(n_qubits, C)))

    @classmethod
    def uniform(cls, n_qubits: int, J: float) -> "ChainSpec":
        return cls(n_qubits, (float(J),) * (n_qubits - 1))

    @property
    def bonds(self) -> list[tuple[int, int]]:
        return [(i, i + 1) for i in range(self.n_qubits - 1)]

    @property
    def is_mirror_symmetric(self) -> bool:
        return np.allclose(self.couplings, self.couplings[::-1])


class CrosstalkMode(str, enum.Enum):
    # phase = zeta [rad/s] * layer duration [s]
    PHYSICAL = "physical"
    # phase = zeta [model frequency] * (layer duration / step wall clock) * dt
    MODEL = "model"


@dataclass(frozen=True)
class Crosstalk:
    zeta: float
    mode: CrosstalkMode = CrosstalkMode.PHYSICAL
    pairs: tuple[tuple[int, int], ...] | None = None  # None: all neighbours

    def __post_init__(self):
        object.__setattr__(self, "mode", CrosstalkMode(self.mode))
        if self.pairs is not None:
            object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def pairs_for(self, n_qubits: int) -> tuple[tuple[int, int], ...]:
        if self.pairs is None:
            return tuple((i, i + 1) for i in range(n_qubits - 1))
        return self.pairs


@dataclass(frozen=True)
class Decoherence:
    t1: float
    t2: float
    # Decohere every qubit each layer (True) or only the qubits a layer acts on.
    idle: bool = False

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise InputError("T1 and T2 must be positive")
        if self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise InputError(f"T2={self.t2} exceeds 2*T1={2 * self.t1}")


@dataclass(frozen=True)
class NoiseModel:
    gate_error_1q: ch.ChannelSpec | None = None
    gate_error_2q: ch.ChannelSpec | None = None
    crosstalk: Crosstalk | None = None
    decoherence: Decoherence | None = None
    l1q: float = DEFAULT_L1Q
    l2q: float = DEFAULT_L2Q

    def __post_init__(self):
        if not (self.l1q > 0 and self.l2q > 0):
            raise InputError("gate durations must be positive")
        if self.gate_error_1q is not None and self.gate_error_1q.arity != 1:
            raise InputError("gate_error_1q must be a single-qubit gate-error spec")
        if self.gate_error_2q is not None:
            # a 1q spec given for CNOTs is lifted
            object.__setattr__(self, "gate_error_2q", self.gate_error_2q.as_two_qubit())

    @property
    def is_noiseless(self) -> bool:
        return (
            self.gate_error_1q is None
            and self.gate_error_2q is None
            and (self.crosstalk is None or self.crosstalk.zeta == 0)
            and self.decoherence is None
        )


@dataclass(frozen=True)
class TrotterCircuit:
    """``n_steps`` repetitions of one Trotter step for model time ``model_time``."""

    n_qubits: int
    step_layers: tuple[CircuitLayer, ...]
    n_steps: int
    model_time: float

    @property
    def dt(self) -> float:
        return self.model_time / self.n_steps

    @property
    def layers(self) -> list[CircuitLayer]:
        return list(self.step_layers) * self.n_steps

    @property
    def step_wall_clock(self) -> float:
        return sum(layer.duration for layer in self.step_layers)

    @property
    def wall_clock(self) -> float:
        return self.step_wall_clock * self.n_steps


def _step_layers(
    chain: ChainSpec,
    thetas: Sequence[float],
    l1q: float,
    l2q: float,
    basis_change: BasisChange = BasisChange.NATIVE,
) -> tuple[CircuitLayer, ...]:
    # Bonds (0,1), (2,3), ... then (1,2), (3,4), ...; bonds of one group run in parallel.
    groups = [chain.bonds[0::2], chain.bonds[1::2]]
    layers: list[CircuitLayer] = []
    for group in groups:
        if not group:
            continue
        per_bond = [
            xy_block_layers(thetas[a], (a, b), l1q, l2q, basis_change) for a, b in group
        ]
        for stage in zip(*per_bond):
            layers.append(CircuitLayer(tuple(g for layer in stage for g in layer.gates)))
    return tuple(layers)


def build_circuit(
    chain: ChainSpec,
    t: float,
    n_steps: int,
    convention: AngleConvention = AngleConvention(),
    l1q: float = DEFAULT_L1Q,
    l2q: float = DEFAULT_L2Q,
    basis_change: BasisChange | str = BasisChange.NATIVE,
) -> TrotterCircuit:
    if t < 0:
        raise InputError(f"model time must be non-negative, got {t}")
    if n_steps < 1:
        raise InputError(f"need at least one Trotter step, got {n_steps}")
    dt = t / n_steps
    thetas = [convention.theta(j, dt) for j in chain.couplings]
    layers = _step_layers(chain, thetas, l1q, l2q, BasisChange(basis_change))
    return TrotterCircuit(chain.n_qubits, layers, n_steps, t)


def initial_state(n_qubits: int) -> np.ndarray:
    """``|10...0><10...0|``: one excitation on the first site."""
    return basis_state(n_qubits, "1" + "0" * (n_qubits - 1))


def transfer_observable(n_qubits: int, kind: str = "last_qubit") -> np.ndarray:
    """Observable whose expectation is the transfer fidelity.

    ``"last_qubit"``: ``(I - Z_last) / 2``, the excitation of the last qubit
    whatever the rest of the register holds.
    ``"projector"``: ``|0...01><0...01|``, excitation on the last site only.
    """
    d = 2**n_qubits
    if kind == "projector":
        return basis_state(n_qubits, "0" * (n_qubits - 1) + "1")
    if kind == "last_qubit":
        diag = np.array([i & 1 for i in range(d)], dtype=np.complex128)
        return np.diag(diag)
    raise InputError(f"unknown observable {kind!r}")


# ---------------------------------------------------------------------------
# Noise schedule shared by both paths


def _layer_phase(noise: NoiseModel, duration: float, step_wall_clock: float, dt: float) -> float:
    xt = noise.crosstalk
    if xt.mode is CrosstalkMode.PHYSICAL:
        return xt.zeta * duration
    return xt.zeta * (duration / step_wall_clock) * dt


def _layer_noise_kraus(
    layer: CircuitLayer, noise: NoiseModel, n_qubits: int
) -> list[tuple[list[np.ndarray], tuple[int, ...]]]:
    """Gate-error and decoherence channels of one layer, in application order."""
    out = []
    for g in layer.gates:
        if g.kind is GateKind.CNOT:
            if noise.gate_error_2q is not None:
                out.append((noise.gate_error_2q.kraus(), g.targets))
        elif noise.gate_error_1q is not None:
            out.append((noise.gate_error_1q.kraus(), g.targets))
    dec = noise.decoherence
    if dec is not None:
        qubits = range(n_qubits) if dec.idle else sorted(layer.qubits)
        t1 = ch.thermal_t1(dec.t1, layer.duration)
        t2 = ch.dephasing_t2(dec.t2, layer.duration)
        for q in qubits:
            out.append((t1, (q,)))
            out.append((t2, (q,)))
    return out


def simulate(
    circuit: TrotterCircuit,
    noise: NoiseModel,
    rho0: np.ndarray,
) -> np.ndarray:
    """Evolve ``rho0`` through ``circuit`` layer by layer."""
    n = circuit.n_qubits
    if n_qubits_of(rho0) != n:
        raise InputError(f"state has {n_qubits_of(rho0)} qubits, circuit has {n}")
    rho = np.array(rho0, dtype=np.complex128)
    wall = circuit.step_wall_clock
    noise_cache = {}
    for layer in circuit.layers:
        for g in layer.gates:
            rho = apply_unitary(rho, gate_matrix(g), g.targets, strict=False)
        key = id(layer)
        if key not in noise_cache:
            noise_cache[key] = _layer_noise_kraus(layer, noise, n)
        for kraus, targets in noise_cache[key]:
            rho = apply_kraus(rho, kraus, targets, check=False)
        if noise.crosstalk is not None and noise.crosstalk.zeta != 0:
            phi = _layer_phase(noise, layer.duration, wall, circuit.dt)
            u = ch.crosstalk_zz(phi, 1.0)
            for pair in noise.crosstalk.pairs_for(n):
                rho = apply_unitary(rho, u, pair, strict=False)
    return rho


# ---------------------------------------------------------------------------
# Transfer-map engine


def _superop(kraus: Sequence[np.ndarray], targets: Sequence[int], n: int) -> np.ndarray:
    # Row-major vectorization: vec(E rho E^dagger) = (E kron conj(E)) vec(rho).
    d = 2**n
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for E in kraus:
        full = embed(E, targets, n)
        s += np.kron(full, full.conj())
    return s


@dataclass
class _Fixed:
    matrix: np.ndarray


@dataclass
class _Variable:
    # maps (thetas per bond [B, n_bonds], dt [B]) -> unitaries [B, d, d]
    build: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _diag_zz_batch(n: int, pairs, phases: np.ndarray) -> np.ndarray:
    # diagonal of prod_pairs U_ZZ(phase) over the register, per batch entry
    idx = np.arange(2**n)
    sign = np.zeros(2**n)
    for a, b in pairs:
        za = 1 - 2 * ((idx >> (n - 1 - a)) & 1)
        zb = 1 - 2 * ((idx >> (n - 1 - b)) & 1)
        sign += za * zb
    # U_ZZ = exp(-i phi Z_a Z_b)
    return np.exp(-1j * phases[:, None] * sign[None, :])


class StepProgram:
    """One Trotter step compiled for a chain and noise model.

    Fixed maps between angle-dependent gates are fused into single
    ``4^n x 4^n`` superoperators; angle-dependent layers stay as batched
    unitaries so a whole time grid is propagated together.
    """

    def __init__(
        self,
        chain: ChainSpec,
        noise: NoiseModel,
        convention: AngleConvention = AngleConvention(),
        basis_change: BasisChange | str = BasisChange.NATIVE,
    ):
        n = chain.n_qubits
        if n > MAX_TRANSFER_QUBITS:
            raise InputError(f"transfer engine supports up to {MAX_TRANSFER_QUBITS} qubits")
        self.chain = chain
        self.noise = noise
        self.convention = convention
        self.n = n
        d = 2**n
        # Placeholder angles mark which bond drives each Trotter rotation.
        markers = [_BOND_MARK + i for i in range(n - 1)]
        marker_layers = _step_layers(chain, markers, noise.l1q, noise.l2q, BasisChange(basis_change))
        self.step_wall_clock = sum(layer.duration for layer in marker_layers)
        xt = noise.crosstalk if (noise.crosstalk and noise.crosstalk.zeta != 0) else None
        pairs = xt.pairs_for(n) if xt else ()

        ops: list = []

        def push_fixed(m):
            if ops and isinstance(ops[-1], _Fixed):
                ops[-1] = _Fixed(m @ ops[-1].matrix)
            else:
                ops.append(_Fixed(m))

        for layer in marker_layers:
            tagged = [g for g in layer.gates if g.theta is not None and g.theta >= _BOND_MARK]
            if tagged:
                gates = [(g.kind, int(g.theta - _BOND_MARK), g.targets[0]) for g in tagged]
                other = [g for g in layer.gates if g not in tagged]
                ops.append(_Variable(self._rotation_builder(gates, other)))
            else:
                u = layer_unitary(layer, n)
                push_fixed(np.kron(u, u.conj()))
            for kraus, targets in _layer_noise_kraus(layer, noise, n):
                push_fixed(_superop(kraus, targets, n))
            if xt is not None:
                if xt.mode is CrosstalkMode.PHYSICAL:
                    diag = _diag_zz_batch(n, pairs, np.array([xt.zeta * layer.duration]))[0]
                    push_fixed(np.diag(np.kron(diag, diag.conj())))
                else:
                    frac = layer.duration / self.step_wall_clock

                    def build(thetas, dt, frac=frac):
                        diag = _diag_zz_batch(n, pairs, xt.zeta * frac * dt)
                        return diag[:, :, None] * np.eye(d)[None]

                    ops.append(_Variable(build))
        self.ops = ops

    def _rotation_builder(self, gates, other):
        n = self.n

        def build(thetas, dt):
            batch = thetas.shape[0]
            u = np.broadcast_to(np.eye(2**n, dtype=np.complex128), (batch, 2**n, 2**n)).copy()
            for kind, bond, q in gates:
                th = thetas[:, bond]
                c, s = np.cos(th / 2), np.sin(th / 2)
                local = np.zeros((batch, 2, 2), dtype=np.complex128)
                if kind is GateKind.RX:
                    local[:, 0, 0] = c
                    local[:, 1, 1] = c
                    local[:, 0, 1] = -1j * s
                    local[:, 1, 0] = -1j * s
                else:
                    local[:, 0, 0] = np.exp(-0.5j * th)
                    local[:, 1, 1] = np.exp(0.5j * th)
                u = _embed_batch(local, q, n) @ u
            for g in other:
                u = embed(gate_matrix(g), g.targets, n)[None] @ u
            return u

        return build

    def angles(self, dt: np.ndarray) -> np.ndarray:
        return np.stack(
            [self.convention.theta(j, dt) for j in self.chain.couplings], axis=1
        )

    def evolve(self, rho0: np.ndarray, t_grid: Sequence[float], n_steps: int) -> np.ndarray:
        """Density matrices after ``n_steps`` steps for each model time, ``[B, d, d]``."""
        if n_steps < 1:
            raise InputError(f"need at least one Trotter step, got {n_steps}")
        t = np.asarray(t_grid, dtype=float)
        dt = t / n_steps
        thetas = self.angles(dt)
        d = 2**self.n
        prepared = []
        for op in self.ops:
            if isinstance(op, _Fixed):
                prepared.append((True, np.ascontiguousarray(op.matrix.T)))
            else:
                u = op.build(thetas, dt)
                prepared.append((False, (u, np.conj(np.swapaxes(u, 1, 2)))))
        rho = np.broadcast_to(np.asarray(rho0, dtype=np.complex128), (len(t), d, d)).copy()
        for _ in range(n_steps):
            for fixed, payload in prepared:
                if fixed:
                    rho = (rho.reshape(len(t), d * d) @ payload).reshape(len(t), d, d)
                else:
                    u, udag = payload
                    rho = u @ rho @ udag
        return rho


def _embed_batch(local: np.ndarray, q: int, n: int) -> np.ndarray:
    """Batch of single-qubit operators embedded on qubit ``q``."""
    left = np.eye(2**q)
    right = np.eye(2 ** (n - q - 1))
    return np.einsum("ab,xij,cd->xaicbjd", left, local, right).reshape(
        local.shape[0], 2**n, 2**n
    )


def fidelity_series(
    chain: ChainSpec,
    noise: NoiseModel,
    t_grid: Sequence[float],
    n_steps: int,
    *,
    convention: AngleConvention = AngleConvention(),
    basis_change: BasisChange | str = BasisChange.NATIVE,
    observable: str = "last_qubit",
    program: StepProgram | None = None,
) -> np.ndarray:
    """Transfer fidelity ``Tr[P rho(t)]`` at each grid time for depth ``n_steps``."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise InputError("time grid is empty")
    if np.any(np.diff(t) < 0):
        raise InputError("time grid must be sorted ascending")
    n = chain.n_qubits
    rho0 = initial_state(n)
    obs = transfer_observable(n, observable)
    if n <= MAX_TRANSFER_QUBITS:
        program = program or StepProgram(chain, noise, convention, basis_change)
        rhos = program.evolve(rho0, t, n_steps)
    else:
        rhos = np.stack(
            [
                simulate(
                    build_circuit(chain, ti, n_steps, convention, noise.l1q, noise.l2q, basis_change),
                    noise,
                    rho0,
                )
                for ti in t
            ]
        )
    values = np.einsum("ij,bji->b", obs, rhos).real
    return np.clip(values, 0.0, 1.0)
