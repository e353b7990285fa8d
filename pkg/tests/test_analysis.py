import numpy as np
import pytest

from noisy_pst.analysis import (
    SweepResult,
    TransferRecord,
    delta_fidelity,
    delta_hitting,
    dynamics_error,
    hitting_time,
)
from noisy_pst.errors import ComparisonError, InputError
from noisy_pst.simulator import ChainSpec, NoiseModel, fidelity_series


def sweep(rows, t=None, n=None, label=""):
    rows = np.asarray(rows, dtype=float)
    t = np.linspace(0, 1, rows.shape[1]) if t is None else t
    n = range(1, len(rows) + 1) if n is None else n
    return SweepResult.from_arrays(list(n), t, rows, label)


def test_hitting_time_takes_first_maximum():
    assert hitting_time([0, 1, 2, 3], [0.1, 0.9, 0.9, 0.2]) == (1.0, 0.9)


def test_hitting_time_input_checks():
    with pytest.raises(InputError):
        hitting_time([], [])
    with pytest.raises(InputError):
        hitting_time([0, 1], [0.3])


def test_two_site_hitting_time_is_analytic():
    t = np.linspace(0, np.pi, 201)
    f = fidelity_series(ChainSpec.uniform(2, 2.0), NoiseModel(), t, 5)
    th, peak = hitting_time(t, f)
    assert th == pytest.approx(np.pi / 2, abs=1e-12)
    assert peak == pytest.approx(1.0, abs=1e-12)


def test_record_derived_fields():
    r = TransferRecord(4, [0.0, 0.5, 1.0], [0.2, 0.7, 0.1])
    assert r.hitting_time == 0.5 and r.peak_fidelity == 0.7


def test_sweep_accessors():
    s = sweep([[0, 1, 0], [0, 0, 0.5]], n=[2, 5])
    np.testing.assert_array_equal(s.n_steps, [2, 5])
    np.testing.assert_allclose(s.hitting_times, [0.5, 1.0])
    np.testing.assert_allclose(s.peak_fidelities, [1.0, 0.5])
    assert s.record(5).peak_fidelity == 0.5
    with pytest.raises(KeyError):
        s.record(3)


def test_sweep_requires_increasing_depths():
    with pytest.raises(InputError):
        sweep([[0, 1], [1, 0]], n=[3, 3])


def test_identical_sweeps_score_zero():
    s = sweep(np.random.default_rng(0).random((4, 9)))
    assert delta_fidelity(s, s) == 0
    assert delta_hitting(s, s) == 0
    assert dynamics_error(s.records[0].fidelity, s.records[0].fidelity) == 0


def test_delta_fidelity_is_mean_absolute_peak_gap():
    a = sweep([[0, 1.0], [0, 0.8]])
    b = sweep([[0, 0.9], [0, 0.9]])
    assert delta_fidelity(a, b) == pytest.approx(0.1)


def test_delta_hitting_sums_before_absolute_value():
    t = np.array([0.0, 1.0, 2.0])
    a = sweep([[1, 0, 0], [0, 0, 1]], t=t)
    b = sweep([[0, 1, 0], [0, 1, 0]], t=t)
    # offsets -1 and +1 cancel
    assert delta_hitting(a, b) == 0
    c = sweep([[0, 0, 1], [0, 0, 1]], t=t)
    assert delta_hitting(c, b) == pytest.approx(1.0)


def test_mismatched_depths_raise():
    with pytest.raises(ComparisonError):
        delta_fidelity(sweep([[0, 1]]), sweep([[0, 1], [1, 0]]))
    with pytest.raises(ComparisonError):
        dynamics_error([0, 1], [0, 1, 2])


def test_dynamics_error_is_l1():
    assert dynamics_error([0.1, 0.5, 0.9], [0.2, 0.5, 0.6]) == pytest.approx(0.4)
