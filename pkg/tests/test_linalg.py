import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcov import effective_rank, op_norm, psd_project, sample_covariance
from robustcov.errors import InvalidInputError


def rand_sym(rng, d, scale=1.0):
    M = scale * rng.uniform(-1.0, 1.0, size=(d, d))
    return 0.5 * (M + M.T)


def test_op_norm_identity():
    assert op_norm(np.eye(3)) == pytest.approx(1.0)


def test_op_norm_diagonal():
    assert op_norm(np.diag([1.0, 2.0, 5.0])) == pytest.approx(5.0)


def test_op_norm_2x2_characteristic_polynomial_oracle():
    # closed-form eigenvalues of [[a, b], [b, c]]
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b, c = rng.uniform(-1, 1, size=3)
        half_gap = np.hypot(0.5 * (a - c), b)
        lam1 = 0.5 * (a + c) + half_gap
        lam2 = 0.5 * (a + c) - half_gap
        expect = max(abs(lam1), abs(lam2))
        assert op_norm([[a, b], [b, c]]) == pytest.approx(expect, rel=1e-10, abs=1e-12)


def test_op_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        op_norm([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        op_norm([[0.0, 1.0], [2.0, 0.0]])


@given(st.floats(-100.0, 100.0), st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_op_norm_absolute_homogeneity(c, seed):
    M = rand_sym(np.random.default_rng(seed), 3)
    assert op_norm(c * M) == pytest.approx(abs(c) * op_norm(M), rel=1e-9, abs=1e-12)


def test_psd_project_fixed_point():
    rng = np.random.default_rng(1)
    B = rng.standard_normal((4, 4))
    P = B @ B.T
    assert np.abs(psd_project(P) - P).max() < 1e-12


def test_psd_project_clips_eigenvalues():
    out = psd_project(np.diag([1.0, -2.0]))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_psd_project_idempotent():
    rng = np.random.default_rng(2)
    for _ in range(20):
        M = rand_sym(rng, 5)
        once = psd_project(M)
        assert np.abs(psd_project(once) - once).max() < 1e-12


def test_psd_project_2x2_grid_oracle():
    # Frobenius-nearest over a dense grid of 2x2 PSD matrices
    rng = np.random.default_rng(3)
    thetas = np.linspace(0.0, np.pi, 60)
    lams = np.linspace(0.0, 3.0, 60)
    for _ in range(5):
        M = rand_sym(rng, 2)
        P = psd_project(M)
        ours = np.linalg.norm(P - M)
        best = np.inf
        for th in thetas:
            c, s = np.cos(th), np.sin(th)
            R = np.array([[c, -s], [s, c]])
            for l1 in lams:
                for l2 in lams:
                    C = R @ np.diag([l1, l2]) @ R.T
                    best = min(best, np.linalg.norm(C - M))
        assert ours <= best + 1e-6


def test_effective_rank_isotropic():
    assert effective_rank(np.eye(7)) == pytest.approx(7.0)


def test_effective_rank_rank_one():
    assert effective_rank(np.diag([1.0, 0.0, 0.0])) == pytest.approx(1.0)


def test_effective_rank_direct_formula():
    assert effective_rank(np.diag([2.0, 1.0, 1.0])) == pytest.approx(2.0)


def test_effective_rank_zero_matrix_errors():
    with pytest.raises(InvalidInputError):
        effective_rank(np.zeros((3, 3)))


@given(st.floats(1e-6, 1e6), st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_effective_rank_scale_invariant(c, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((4, 4))
    S = B @ B.T + 1e-3 * np.eye(4)
    assert effective_rank(c * S) == pytest.approx(effective_rank(S), rel=1e-8)


def test_sample_covariance_single_row():
    assert np.allclose(sample_covariance([[1.0, 0.0]]), [[1.0, 0.0], [0.0, 0.0]])


def test_sample_covariance_orthogonal_pair():
    S = sample_covariance([[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(S, 0.5 * np.eye(2))


def test_sample_covariance_outer_product_oracle():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((5, 3))
    direct = sum(np.outer(x, x) for x in X) / 5.0
    assert np.abs(sample_covariance(X) - direct).max() < 1e-12


def test_sample_covariance_row_permutation_invariant():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((20, 4))
    perm = rng.permutation(20)
    assert np.allclose(sample_covariance(X), sample_covariance(X[perm]), atol=1e-12)
