import numpy as np
import pytest

from noisy_pst import channels as ch
from noisy_pst.analysis import SweepResult, TransferRecord
from noisy_pst.errors import FitError, InputError, UnmitigatableDepthError
from noisy_pst.mitigation import (
    FitResult,
    error_table,
    estimate_alpha,
    fit_c1,
    fit_c2,
    mitigate,
    rescale,
    resample,
    shift_time,
)
from noisy_pst.simulator import ChainSpec, NoiseModel, fidelity_series

BASE = np.linspace(0, np.pi, 101)


def ideal(t):
    return np.sin(t) ** 2


def model_sweep(alpha, c1, c2, depths, base=BASE):
    """Sweep generated exactly from the damping-plus-drift model.

    Each depth is sampled on its own grid ``base + c2 N`` so the ideal peak
    lands on a grid point at every depth.
    """
    records = []
    for n in depths:
        w = c1**n
        records.append(TransferRecord(n, base + c2 * n, w * ideal(base) + alpha * (1 - w)))
    return SweepResult(tuple(records), "synthetic")


def test_alpha_of_constant_series():
    assert estimate_alpha(np.full(11, 0.5)) == 0.5
    with pytest.raises(InputError):
        estimate_alpha([])


def test_alpha_of_gate_error_fixed_point():
    # a strongly depolarized chain relaxes to I/2^n, where the last qubit is excited half the time
    noise = NoiseModel(ch.ChannelSpec.depolarizing(0.2), ch.ChannelSpec.depolarizing(0.3))
    f = fidelity_series(ChainSpec.pst(3, 2.0), noise, np.linspace(0, np.pi, 21), 30)
    assert estimate_alpha(f) == pytest.approx(0.5, abs=1e-3)


def test_fit_c1_exact_on_model_data():
    n = np.arange(1, 31)
    peaks = 0.3 + 0.7 * 0.95**n
    c1, res = fit_c1(n, peaks, 0.3)
    assert c1 == pytest.approx(0.95, abs=1e-9) and res < 1e-9


def test_fit_c1_free_intercept_exact():
    n = np.arange(1, 31)
    peaks = 0.3 + 0.6 * 0.93**n  # intercept off log(1 - alpha)
    c1, _ = fit_c1(n, peaks, 0.3, free_intercept=True)
    assert c1 == pytest.approx(0.93, abs=1e-9)
    pinned, res = fit_c1(n, peaks, 0.3)
    assert pinned != pytest.approx(0.93, abs=1e-4) and res > 1e-3


def test_fit_c1_noiseless_is_one():
    n = np.arange(1, 31)
    c1, _ = fit_c1(n, np.ones(30), 0.4)
    assert c1 == pytest.approx(1.0, abs=1e-12)


def test_fit_c1_needs_enough_points():
    with pytest.raises(FitError):
        fit_c1([6, 7], [0.9, 0.8], 0.3)
    with pytest.raises(FitError):
        fit_c1(np.arange(6, 12), np.full(6, 0.3), 0.3)  # nothing above alpha
    with pytest.raises(InputError):
        fit_c1([1, 2, 3], [0.9, 0.8], 0.3)


def test_rescale_identity_when_c1_is_one():
    s = np.array([0.1, 0.6, 0.9])
    r = rescale(s, 1.0, 0.4, 17)
    np.testing.assert_array_equal(r.values, s)
    assert r.n_clamped == 0


def test_rescale_inverts_damping_and_counts_clamps():
    w = 0.8**5
    s = w * np.array([0.0, 0.5, 1.0]) + 0.4 * (1 - w)
    np.testing.assert_allclose(rescale(s, 0.8, 0.4, 5).values, [0, 0.5, 1.0], atol=1e-12)
    r = rescale([0.0, 1.0], 0.8, 0.4, 5)
    assert r.n_clamped == 2 and list(r.values) == [0.0, 1.0]


def test_rescale_refuses_vanishing_weight():
    with pytest.raises(UnmitigatableDepthError):
        rescale([0.5], 0.5, 0.4, 40)
    with pytest.raises(InputError):
        rescale([0.5], 0.0, 0.4, 1)


def test_fit_c2_trivial_lines():
    n = np.arange(1, 31)
    c2, t0, res = fit_c2(n, 0.55 + 0.01 * n)
    assert c2 == pytest.approx(0.01, abs=1e-9) and t0 == pytest.approx(0.55, abs=1e-9)
    assert fit_c2(n, np.full(30, 1.2))[0] == pytest.approx(0, abs=1e-12)
    with pytest.raises(FitError):
        fit_c2([1, 2, 7], [0.1, 0.2, 0.3])


def test_shift_and_resample():
    t = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(shift_time(t, 0.0, 9), t)
    np.testing.assert_allclose(shift_time(t, 0.01, 10), t - 0.1)
    out = resample(t - 0.1, t, t)
    assert np.isnan(out[-1])
    np.testing.assert_allclose(out[:-1], t[:-1] + 0.1)


def test_fit_result_validation():
    FitResult(0.4, 1.0, 0.0, 1.5, (6, 30), 0.0, 0.0)
    with pytest.raises(FitError):
        FitResult(1.2, 0.9, 0.0, 1.5, (6, 30), 0.0, 0.0)
    with pytest.raises(FitError):
        FitResult(0.4, 0.0, 0.0, 1.5, (6, 30), 0.0, 0.0)


def test_round_trip_recovers_model_parameters():
    alpha, c1, c2 = 0.42, 0.95, 0.0123
    depths = list(range(1, 31)) + [2000]
    s = model_sweep(alpha, c1, c2, depths)
    # the deepest record only feeds alpha; the fits use the modelled range
    result = mitigate(s, n_max=30, skip_unmitigatable=True)
    assert result.fit.alpha == pytest.approx(alpha, abs=1e-6)
    assert result.fit.c1 == pytest.approx(c1, abs=1e-6)
    assert result.fit.c2 == pytest.approx(c2, abs=1e-6)
    assert 2000 not in result.mitigated.n_steps
    for n in (6, 15, 30):
        rec = result.mitigated.record(n)
        np.testing.assert_allclose(rec.t_grid, BASE, atol=1e-12)
        np.testing.assert_allclose(rec.fidelity, ideal(BASE), atol=1e-9)


def test_round_trip_on_shared_grid():
    # a drift of one grid step per depth keeps every sample on the shared grid
    h = BASE[1] - BASE[0]
    alpha, c1 = 0.5, 0.9
    big = h * np.arange(151)  # [0, 1.5 pi]: one peak per depth
    rows = [c1**n * ideal(big - h * n) + alpha * (1 - c1**n) for n in range(1, 21)]
    s = SweepResult.from_arrays(range(1, 21), big, rows)
    s = SweepResult(s.records + (TransferRecord(400, big, np.full(big.size, alpha)),))
    result = mitigate(s, n_max=20, skip_unmitigatable=True)
    assert result.fit.c2 == pytest.approx(h, abs=1e-9)
    assert result.fit.c1 == pytest.approx(c1, abs=1e-9)
    ref = SweepResult.from_arrays(range(1, 21), big, [ideal(big)] * 20)
    noisy = SweepResult(s.records[:-1])
    for row in error_table(ref, noisy, result):
        assert row.mitigated < 1e-9
        assert row.points == big.size - row.n_steps


def test_unmitigatable_depth_raises_by_default():
    s = model_sweep(0.4, 0.9, 0.0, list(range(1, 21)) + [500])
    with pytest.raises(UnmitigatableDepthError):
        mitigate(s)


def test_mitigate_rejects_empty():
    with pytest.raises(InputError):
        mitigate(SweepResult(()))


def test_error_table_grid_mismatch():
    s = model_sweep(0.4, 0.9, 0.0, range(1, 11))
    other = model_sweep(0.4, 0.9, 0.01, range(1, 11))
    with pytest.raises(InputError):
        error_table(other, s, mitigate(s))
