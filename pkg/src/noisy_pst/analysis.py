"""Hitting times and sweep comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ComparisonError, InputError

__all__ = [
    "TransferRecord",
    "SweepResult",
    "hitting_time",
    "delta_fidelity",
    "delta_hitting",
    "dynamics_error",
]


def hitting_time(t_grid: Sequence[float], fidelity: Sequence[float]) -> tuple[float, float]:
    """Grid time of maximal fidelity and that fidelity; ties go to the earliest time."""
    t = np.asarray(t_grid, dtype=float)
    f = np.asarray(fidelity, dtype=float)
    if f.size == 0:
        raise InputError("empty fidelity series")
    if t.shape != f.shape:
        raise InputError("time grid and fidelity series differ in length")
    i = int(np.argmax(f))  # first occurrence of the maximum
    return float(t[i]), float(f[i])


@dataclass(frozen=True)
class TransferRecord:
    n_steps: int
    t_grid: np.ndarray
    fidelity: np.ndarray
    hitting_time: float = field(init=False)
    peak_fidelity: float = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        f = np.asarray(self.fidelity, dtype=float)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "fidelity", f)
        th, fp = hitting_time(t, f)
        object.__setattr__(self, "hitting_time", th)
        object.__setattr__(self, "peak_fidelity", fp)


@dataclass(frozen=True)
class SweepResult:
    """Transfer records for increasing Trotter depth."""

    records: tuple[TransferRecord, ...]
    label: str = ""

    def __post_init__(self):
        records = tuple(self.records)
        ns = [r.n_steps for r in records]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InputError(f"depths must be strictly increasing, got {ns}")
        object.__setattr__(self, "records", records)

    @property
    def n_steps(self) -> np.ndarray:
        return np.array([r.n_steps for r in self.records])

    @property
    def hitting_times(self) -> np.ndarray:
        return np.array([r.hitting_time for r in self.records])

    @property
    def peak_fidelities(self) -> np.ndarray:
        return np.array([r.peak_fidelity for r in self.records])

    def record(self, n_steps: int) -> TransferRecord:
        for r in self.records:
            if r.n_steps == n_steps:
                return r
        raise KeyError(n_steps)

    @classmethod
    def from_arrays(cls, n_steps, t_grid, fidelity, label: str = "") -> "SweepResult":
        """Build from a ``[len(n_steps), len(t_grid)]`` fidelity table."""
        fidelity = np.asarray(fidelity, dtype=float)
        return cls(
            tuple(TransferRecord(int(n), t_grid, row) for n, row in zip(n_steps, fidelity)),
            label,
        )


def _check_same_depths(a: SweepResult, b: SweepResult) -> None:
    if not np.array_equal(a.n_steps, b.n_steps):
        raise ComparisonError(
            f"depth ranges differ: {a.n_steps.tolist()} vs {b.n_steps.tolist()}"
        )


def delta_fidelity(a: SweepResult, b: SweepResult) -> float:
    """Depth-averaged absolute difference of peak fidelities."""
    _check_same_depths(a, b)
    return float(np.mean(np.abs(a.peak_fidelities - b.peak_fidelities)))


def delta_hitting(a: SweepResult, b: SweepResult) -> float:
    """``|sum_N (T_a(N) - T_b(N))| / n_depths``; the absolute value wraps the sum."""
    _check_same_depths(a, b)
    return float(abs(np.sum(a.hitting_times - b.hitting_times)) / len(a.records))


def dynamics_error(reference: Sequence[float], noisy: Sequence[float]) -> float:
    """Unnormalized L1 distance between two series on the same grid."""
    r = np.asarray(reference, dtype=float)
    n = np.asarray(noisy, dtype=float)
    if r.shape != n.shape:
        raise ComparisonError(f"series lengths differ: {r.shape} vs {n.shape}")
    return float(np.sum(np.abs(r - n)))
