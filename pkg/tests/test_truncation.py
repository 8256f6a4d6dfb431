import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcov import (
    clamp_interval,
    norm_truncate,
    norm_truncation_radius,
    one_sided_process,
    psi,
    psi_band,
    truncated_process,
)
from robustcov.errors import InvalidInputError, InvalidParameterError

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_psi_interior():
    assert psi(0.5) == 0.5


def test_psi_sign_branch():
    assert psi(2.0) == 1.0
    assert psi(-3.0) == -1.0


def test_psi_boundary():
    assert psi(1.0) == 1.0
    assert psi(-1.0) == -1.0


@given(finite)
def test_psi_odd(x):
    assert psi(-x) == -psi(x)


@given(finite, finite)
def test_psi_lipschitz(x, y):
    assert abs(psi(x) - psi(y)) <= abs(x - y) * (1.0 + 1e-15) + 1e-300


def test_psi_grid_properties():
    x = np.linspace(-5.0, 5.0, 100_001)
    y = psi(x)
    assert np.all(np.abs(y) <= 1.0)
    inner = np.abs(x) <= 1.0
    assert np.array_equal(y[inner], x[inner])
    assert np.array_equal(psi(-x), -y)


@given(st.floats(-1e12, 1e12), st.floats(1e-12, 1e12))
def test_psi_band_agrees_with_psi(x, lam):
    # two float roundings keep the forms within 1e-15 relative
    lhs = psi_band(x, lam, lam)
    rhs = (1.0 / lam) * psi(lam * x)
    assert abs(lhs - rhs) <= 1e-15 * max(1.0, abs(x))


def test_psi_band_interior():
    assert psi_band(0.3, 1.0, 1.0) == 0.3


def test_psi_band_upper_branch():
    assert psi_band(5.0, 1.0, 0.5) == 2.0


def test_psi_band_rejects_bad_levels():
    with pytest.raises(InvalidParameterError):
        psi_band(0.0, 0.5, 1.0)


def test_clamp_interval_general():
    assert clamp_interval(7.0, -1.0, 5.0) == 5.0
    assert clamp_interval(-7.0, -1.0, 5.0) == -1.0
    with pytest.raises(InvalidParameterError):
        clamp_interval(0.0, 1.0, -1.0)


def test_truncated_process_interior_regime():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 3))
    v = np.array([1.0, 0.0, 0.0])
    lam = 0.9 / ((X @ v) ** 2).max()
    expect = ((X @ v) ** 2).mean()
    assert truncated_process(X, v, lam) == pytest.approx(expect, rel=1e-12)


def test_truncated_process_hand_evaluation():
    X = np.array([[2.0, 0.0], [0.0, 1.0]])
    assert truncated_process(X, [1.0, 0.0], 1.0) == pytest.approx(0.5)


def test_truncated_process_orthogonal_rows():
    X = np.array([[0.0, 2.0], [0.0, -1.0]])
    assert truncated_process(X, [1.0, 0.0], 0.5) == 0.0


def test_truncated_process_range_and_nonunit_error():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((30, 2)) * 5.0
    for lam in (0.01, 0.5, 3.0):
        val = truncated_process(X, [1.0, 0.0], lam)
        assert 0.0 <= val <= 1.0 / lam
    with pytest.raises(InvalidInputError):
        truncated_process(X, [1.0, 1.0], 1.0)


def test_one_sided_process_trim_level():
    # q_v = 1, Q = 3 -> lam_v = 0.25; single row with projection^2 = 2
    from robustcov.truncation import trim_level

    assert trim_level(1.0, 3.0) == pytest.approx(0.25)
    X = np.array([[np.sqrt(2.0), 0.0]])
    assert one_sided_process(X, [1.0, 0.0], 1.0, 3.0) == pytest.approx(2.0)


def test_one_sided_process_saturated():
    X = np.array([[3.0, 0.0], [-4.0, 0.0]])
    assert one_sided_process(X, [1.0, 0.0], 1.0, 3.0) == pytest.approx(4.0)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_one_sided_process_monotone_in_Q(q_v, Q, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((40, 2)) * 3.0
    v = np.array([0.0, 1.0])
    lo = one_sided_process(X, v, q_v, Q)
    hi = one_sided_process(X, v, q_v, 2.0 * Q)
    assert hi >= lo - 1e-12


def test_norm_truncate_noop_when_radius_large():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((10, 3))
    R = np.linalg.norm(X, axis=1).max()
    assert np.array_equal(norm_truncate(X, R), X)


def test_norm_truncate_zeroes_large_rows():
    X = np.array([[3.0, 0.0], [0.0, 1.0]])
    out = norm_truncate(X, 2.0)
    assert np.array_equal(out, np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_norm_truncation_radius_paper_arithmetic():
    assert norm_truncation_radius(16, 1.0, 1.0) == pytest.approx(2.0)


def test_norm_truncate_idempotent_and_contractive():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((25, 4)) * 2.0
    out = norm_truncate(X, 2.5)
    assert np.all(np.linalg.norm(out, axis=1) <= np.linalg.norm(X, axis=1) + 1e-15)
    assert np.array_equal(norm_truncate(out, 2.5), out)
