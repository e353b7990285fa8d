"""Post-processing mitigation from observed fidelity sweeps.

The noisy signal at depth ``N`` is modelled as

    F_N(t) = c1**N * f(t - c2 * N) + alpha * (1 - c1**N)

with ``f`` the error-free dynamics.  Everything here is estimated from the
observed series alone; nothing about the underlying noise is consulted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import SweepResult, TransferRecord, dynamics_error
from .errors import FitError, InputError, UnmitigatableDepthError

__all__ = [
    "FitResult",
    "RescaleResult",
    "MitigationResult",
    "estimate_alpha",
    "fit_c1",
    "rescale",
    "fit_c2",
    "shift_time",
    "resample",
    "mitigate",
    "ErrorRow",
    "error_table",
]

# Points with F - alpha at or below this are left out of the c1 fit.
ALPHA_MARGIN = 1e-4
# Smallest retained weight c1**N that rescaling will invert.
MIN_RETAINED_WEIGHT = 1e-6


@dataclass(frozen=True)
class FitResult:
    alpha: float
    c1: float
    c2: float
    t_ideal: float
    fit_window: tuple[int, int]
    c1_residual: float
    c2_residual: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise FitError(f"alpha={self.alpha} outside [0, 1]")
        if not 0.0 < self.c1 <= 1.0 + 1e-9:
            raise FitError(f"c1={self.c1} outside (0, 1]")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c1": self.c1,
            "c2": self.c2,
            "t_ideal": self.t_ideal,
            "fit_window": list(self.fit_window),
            "c1_residual": self.c1_residual,
            "c2_residual": self.c2_residual,
        }


def estimate_alpha(series: Sequence[float]) -> float:
    """Time average of the deepest available series."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise InputError("cannot estimate alpha from an empty series")
    return float(np.clip(s.mean(), 0.0, 1.0))


def _window(n_steps: np.ndarray, n_min: int, n_max: int | None) -> np.ndarray:
    upper = n_steps.max() if n_max is None else n_max
    return (n_steps >= n_min) & (n_steps <= upper)


def fit_c1(
    n_steps: Sequence[int],
    peaks: Sequence[float],
    alpha: float,
    *,
    n_min: int = 6,
    n_max: int | None = None,
    free_intercept: bool = False,
) -> tuple[float, float]:
    """Fit ``F(N) = (1 - alpha) c1**N + alpha`` on the log scale.

    Returns ``(c1, rms_residual)`` where the residual is measured on
    ``log(F - alpha)``.  With ``free_intercept=False`` the line is pinned to
    ``log(1 - alpha)`` at ``N = 0``; otherwise the intercept is fitted too.
    """
    n = np.asarray(n_steps, dtype=float)
    f = np.asarray(peaks, dtype=float)
    if n.shape != f.shape:
        raise InputError("depths and peaks differ in length")
    mask = _window(n, n_min, n_max) & (f - alpha > ALPHA_MARGIN)
    if mask.sum() < 3:
        raise FitError(f"need at least 3 usable depths for c1, have {int(mask.sum())}")
    x = n[mask]
    y = np.log(f[mask] - alpha)
    if free_intercept:
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
    else:
        if alpha >= 1.0:
            raise FitError("alpha = 1 leaves no room for decay")
        y0 = np.log1p(-alpha)
        slope = float(np.dot(x, y - y0) / np.dot(x, x))
        pred = slope * x + y0
    c1 = float(np.exp(slope))
    residual = float(np.sqrt(np.mean((y - pred) ** 2)))
    return c1, residual


@dataclass(frozen=True)
class RescaleResult:
    values: np.ndarray
    n_clamped: int


def rescale(series: Sequence[float], c1: float, alpha: float, n_steps: int) -> RescaleResult:
    """Invert the affine damping ``F -> (F - alpha (1 - c1**N)) / c1**N``, clamped to [0, 1]."""
    if not c1 > 0:
        raise InputError(f"c1 must be positive, got {c1}")
    weight = c1**n_steps
    if weight < MIN_RETAINED_WEIGHT:
        raise UnmitigatableDepthError(
            f"retained weight c1**N = {weight:.3g} at N={n_steps} is below {MIN_RETAINED_WEIGHT}"
        )
    s = np.asarray(series, dtype=float)
    raw = (s - alpha * (1 - weight)) / weight
    clipped = np.clip(raw, 0.0, 1.0)
    return RescaleResult(clipped, int(np.count_nonzero(clipped != raw)))


def fit_c2(
    n_steps: Sequence[int],
    hitting_times: Sequence[float],
    *,
    n_min: int = 6,
    n_max: int | None = None,
) -> tuple[float, float, float]:
    """Least-squares line ``T(N) = t_ideal + c2 N``; returns ``(c2, t_ideal, rms_residual)``."""
    n = np.asarray(n_steps, dtype=float)
    t = np.asarray(hitting_times, dtype=float)
    if n.shape != t.shape:
        raise InputError("depths and hitting times differ in length")
    mask = _window(n, n_min, n_max)
    if mask.sum() < 3:
        raise FitError(f"need at least 3 depths for c2, have {int(mask.sum())}")
    slope, intercept = np.polyfit(n[mask], t[mask], 1)
    residual = float(np.sqrt(np.mean((t[mask] - (slope * n[mask] + intercept)) ** 2)))
    return float(slope), float(intercept), residual


def shift_time(t_grid: Sequence[float], c2: float, n_steps: int) -> np.ndarray:
    """Relabel model times ``t -> t - c2 N``."""
    return np.asarray(t_grid, dtype=float) - c2 * n_steps


def resample(t_source: Sequence[float], values: Sequence[float], t_target: Sequence[float]) -> np.ndarray:
    """Linear interpolation onto ``t_target``; NaN where the target lies outside the source range."""
    ts = np.asarray(t_source, dtype=float)
    tt = np.asarray(t_target, dtype=float)
    out = np.interp(tt, ts, np.asarray(values, dtype=float))
    eps = 1e-12 * max(1.0, float(np.abs(ts).max()))
    out[(tt < ts[0] - eps) | (tt > ts[-1] + eps)] = np.nan
    return out


@dataclass(frozen=True)
class MitigationResult:
    fit: FitResult
    rescaled: SweepResult
    # records on the shifted time axis t - c2 N
    mitigated: SweepResult
    clamped: dict[int, int] = field(default_factory=dict)

    def on_grid(self, n_steps: int, t_target: Sequence[float]) -> np.ndarray:
        """Mitigated depth-``n_steps`` series interpolated onto ``t_target`` (NaN outside)."""
        rec = self.mitigated.record(n_steps)
        return resample(rec.t_grid, rec.fidelity, t_target)


def mitigate(
    sweep: SweepResult,
    *,
    n_min: int = 6,
    n_max: int | None = None,
    free_intercept: bool = False,
    skip_unmitigatable: bool = False,
) -> MitigationResult:
    """Estimate ``alpha``, ``c1`` and ``c2`` from ``sweep`` and undo damping and drift.

    Depths whose retained weight is too small raise
    :class:`UnmitigatableDepthError` unless ``skip_unmitigatable`` is set,
    in which case they are left out of the corrected sweeps.
    """
    if not sweep.records:
        raise InputError("empty sweep")
    deepest = sweep.records[-1]
    alpha = estimate_alpha(deepest.fidelity)
    c1, c1_res = fit_c1(
        sweep.n_steps, sweep.peak_fidelities, alpha,
        n_min=n_min, n_max=n_max, free_intercept=free_intercept,
    )
    # a retained weight cannot grow with depth
    c1 = min(c1, 1.0)
    c2, t_ideal, c2_res = fit_c2(sweep.n_steps, sweep.hitting_times, n_min=n_min, n_max=n_max)
    upper = int(sweep.n_steps.max()) if n_max is None else int(n_max)
    fit = FitResult(alpha, c1, c2, t_ideal, (int(n_min), upper), c1_res, c2_res)

    rescaled, shifted, clamped = [], [], {}
    for rec in sweep.records:
        try:
            r = rescale(rec.fidelity, c1, alpha, rec.n_steps)
        except UnmitigatableDepthError:
            if skip_unmitigatable:
                continue
            raise
        clamped[rec.n_steps] = r.n_clamped
        rescaled.append(TransferRecord(rec.n_steps, rec.t_grid, r.values))
        shifted.append(TransferRecord(rec.n_steps, shift_time(rec.t_grid, c2, rec.n_steps), r.values))
    return MitigationResult(
        fit,
        SweepResult(tuple(rescaled), sweep.label),
        SweepResult(tuple(shifted), sweep.label),
        clamped,
    )


@dataclass(frozen=True)
class ErrorRow:
    n_steps: int
    raw: float
    rescaled: float
    mitigated: float
    points: int  # grid points shared by all three comparisons


def error_table(reference: SweepResult, noisy: SweepResult, result: MitigationResult) -> list[ErrorRow]:
    """Dynamics error of raw, rescaled and mitigated series against ``reference``.

    The mitigated series lives on a shifted axis and is interpolated back onto
    the reference grid; grid points it does not cover are dropped from all
    three sums so the columns stay comparable.
    """
    rows = []
    for rec in result.mitigated.records:
        n = rec.n_steps
        ref = reference.record(n)
        raw = noisy.record(n)
        if not np.array_equal(ref.t_grid, raw.t_grid):
            raise InputError(f"reference and noisy grids differ at N={n}")
        mit = result.on_grid(n, ref.t_grid)
        keep = ~np.isnan(mit)
        rows.append(
            ErrorRow(
                n,
                dynamics_error(ref.fidelity[keep], raw.fidelity[keep]),
                dynamics_error(ref.fidelity[keep], result.rescaled.record(n).fidelity[keep]),
                dynamics_error(ref.fidelity[keep], mit[keep]),
                int(keep.sum()),
            )
        )
    return rows
