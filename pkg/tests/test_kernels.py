import numpy as np
import pytest

from mdplab import _pykernels, kernels
from mdplab.kernels import SingularSystemError


def _random_problem(seed, n=7, m=3):
    rng = np.random.default_rng(seed)
    P = rng.random((n, m, n))
    P /= P.sum(axis=2, keepdims=True)
    return P, rng.random((n, m)), rng.normal(size=n)


def test_backend_selection_roundtrip():
    names = kernels.available_backends()
    assert "python" in names
    for name in names:
        prev = kernels.use_backend(name)
        assert kernels.backend() == name
        kernels.use_backend(prev)
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@pytest.mark.parametrize("seed", range(5))
def test_backup_matches_einsum(backend, seed):
    P, C, v = _random_problem(seed)
    best, q = kernels.backup(P, C, 0.9, v)
    expected = C + 0.9 * np.einsum("ikj,j->ik", P, v)
    np.testing.assert_allclose(q, expected, atol=1e-13)
    np.testing.assert_allclose(best, expected.min(axis=1), atol=1e-13)


def test_policy_sweeps(backend):
    P, C, v = _random_problem(3)
    P_pi, c_pi = P[:, 0, :], C[:, 0]
    out = kernels.policy_sweeps(P_pi, c_pi, 0.7, v, 4)
    w = v.copy()
    for _ in range(4):
        w = c_pi + 0.7 * P_pi @ w
    np.testing.assert_allclose(out, w, atol=1e-13)
    # input untouched
    np.testing.assert_array_equal(v, _random_problem(3)[2])


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_gauss_solve_against_lapack(backend, n):
    rng = np.random.default_rng(n)
    A = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    np.testing.assert_allclose(kernels.gauss_solve(A, b), np.linalg.solve(A, b), atol=1e-12)


def test_gauss_solve_needs_row_exchange(backend):
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(kernels.gauss_solve(A, [2.0, 3.0]), [3.0, 2.0])


def test_gauss_solve_singular(backend):
    with pytest.raises(SingularSystemError):
        kernels.gauss_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))


def test_pivot_in_place(backend):
    T = np.array([[2.0, 1.0, 4.0], [1.0, 3.0, 5.0], [-1.0, -1.0, 0.0]])
    ref = T.copy()
    _pykernels.pivot(ref, 0, 0)
    kernels.pivot(T, 0, 0)
    np.testing.assert_allclose(T, ref)
    np.testing.assert_allclose(T[:, 0], [1.0, 0.0, 0.0])
    np.testing.assert_allclose(T[0], [1.0, 0.5, 2.0])


def test_backends_agree_bitwise_on_solve():
    if "cython" not in kernels.available_backends():
        pytest.skip("compiled kernels not built")
    from mdplab import _ckernels

    rng = np.random.default_rng(11)
    A = rng.normal(size=(6, 6)) + 3 * np.eye(6)
    b = rng.normal(size=6)
    np.testing.assert_allclose(_ckernels.gauss_solve(A, b), _pykernels.gauss_solve(A, b), rtol=1e-14)
