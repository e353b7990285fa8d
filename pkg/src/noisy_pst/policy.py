"""Numeric tolerances used by contract checks.

A single mutable record is consulted by every check so tests and callers can
tighten or loosen all tolerances in one place.
"""

from __future__ import annotations

import contextlib
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class NumericPolicy:
    trace_tol: float = 1e-10
    hermitian_tol: float = 1e-10
    unitary_tol: float = 1e-12
    completeness_tol: float = 1e-10
    psd_tol: float = 1e-8
    imag_tol: float = 1e-10
    # Contract checks (unitarity, completeness, Hermitian observables).
    strict: bool = True


_policy = NumericPolicy()


def get_policy() -> NumericPolicy:
    return _policy


def set_policy(policy: NumericPolicy) -> None:
    global _policy
    _policy = policy


@contextlib.contextmanager
def policy_override(**changes):
    """Temporarily replace fields of the active policy."""
    global _policy
    saved = _policy
    _policy = dataclasses.replace(saved, **changes)
    try:
        yield _policy
    finally:
        _policy = saved
