import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings, strategies as st

from squeezedmech.errors import StiffnessError
from squeezedmech.integrate import dopri5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linear_system_matches_expm(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A -= (np.abs(np.linalg.eigvals(A).real).max() + 0.1) * np.eye(4)
    y0 = rng.normal(size=4) + 0j
    times = np.linspace(0.0, 3.0, 7)
    ys, stats = dopri5(lambda t, y: A @ y, y0, times, rtol=1e-10, atol=1e-12)
    for t, y in zip(times, ys):
        np.testing.assert_allclose(y, sl.expm(A * t) @ y0, atol=1e-8)
    assert stats.nfev >= 6 * stats.steps


def test_time_dependent_scalar():
    ys, _ = dopri5(lambda t, y: 2 * t * y, np.array([1.0 + 0j]), [0.0, 1.0, 2.0])
    np.testing.assert_allclose([y[0].real for y in ys], np.exp([0.0, 1.0, 4.0]), rtol=1e-7)


def test_hits_output_times_exactly():
    seen = []
    dopri5(lambda t, y: -y, np.array([1.0 + 0j]), [0.0, 0.1, 0.35, 2.0],
           callback=lambda k, t, y: seen.append(t))
    assert seen == [0.0, 0.1, 0.35, 2.0]


def test_single_time():
    ys, stats = dopri5(lambda t, y: -y, np.array([2.0 + 0j]), [1.0])
    assert ys[0][0] == 2.0 and stats.steps == 0


def test_stiff_budget():
    with pytest.raises(StiffnessError):
        dopri5(lambda t, y: -1e6 * y, np.array([1.0 + 0j]), [0.0, 10.0], max_steps=50)


def test_step_underflow():
    # finite-time blow-up forces the step size to collapse
    with pytest.raises(StiffnessError):
        dopri5(lambda t, y: y ** 2, np.array([1.0 + 0j]), [0.0, 2.0])


@pytest.mark.parametrize("times", [[], [0.0, 0.0], [1.0, 0.5]])
def test_bad_times(times):
    with pytest.raises(ValueError):
        dopri5(lambda t, y: y, np.array([1.0 + 0j]), times)
