"""Dense LU solve and its singularity reporting."""

import numpy as np
import pytest

from airnet.linalg import lu_solve


def test_identity():
    b = np.array([3.0, -1.0, 7.0])
    report = lu_solve(np.eye(3), b)
    assert not report.singular
    assert np.allclose(report.solution, b)


def test_zero_row_is_singular():
    a = np.array([[1.0, 2.0], [0.0, 0.0]])
    report = lu_solve(a, np.array([1.0, 1.0]))
    assert report.singular
    assert report.solution is None
    assert report.pivot_ratio < 1e-12


def test_all_zero_matrix_is_singular():
    report = lu_solve(np.zeros((3, 3)), np.zeros(3))
    assert report.singular
    assert report.pivot_ratio == 0.0


def test_random_multiply_back():
    rng = np.random.default_rng(8)
    a = rng.uniform(-1, 1, (5, 5)) + 5 * np.eye(5)
    x_true = rng.uniform(-10, 10, 5)
    report = lu_solve(a, a @ x_true)
    assert not report.singular
    assert np.allclose(report.solution, x_true, rtol=1e-9)


def test_residual_bound_on_many_random_systems():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        a = rng.uniform(-1, 1, (n, n)) + n * np.eye(n)
        b = rng.uniform(-1, 1, n)
        report = lu_solve(a, b)
        assert not report.singular
        x = report.solution
        bound = 1e-9 * (
            np.linalg.norm(a, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
        )
        assert np.linalg.norm(a @ x - b, np.inf) <= bound


def test_row_permutation_invariance():
    rng = np.random.default_rng(12)
    a = rng.uniform(-1, 1, (6, 6)) + 6 * np.eye(6)
    b = rng.uniform(-1, 1, 6)
    x = lu_solve(a, b).solution
    perm = rng.permutation(6)
    x_perm = lu_solve(a[perm], b[perm]).solution
    assert np.allclose(x, x_perm, rtol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        lu_solve(np.eye(3), np.zeros(2))
    with pytest.raises(ValueError):
        lu_solve(np.zeros((2, 3)), np.zeros(2))


def test_near_singular_pivot_ratio_reported():
    a = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]])
    report = lu_solve(a, np.array([1.0, 1.0]))
    assert report.singular
    assert 0.0 < report.pivot_ratio < 1e-12
