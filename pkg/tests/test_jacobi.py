import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modfold import NumericalError, _mp
from modfold.jacobi import jacobi_eigh, round_robin


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
def test_round_robin_covers_each_pair_once(n):
    seen = set()
    for p, q in round_robin(n):
        idx = list(p) + list(q)
        assert len(idx) == len(set(idx))  # rotations within a round are disjoint
        for a, b in zip(p, q):
            seen.add(frozenset((int(a), int(b))))
    assert len(seen) == n * (n - 1) // 2


@settings(max_examples=30)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    A = M + M.T
    w, V, _ = jacobi_eigh(A, eigenvectors=True)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-12 * max(1, np.abs(A).max()) * n)
    np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(A @ V, V * w, atol=1e-11 * max(1, np.abs(A).max()) * n)


def test_jacobi_multiprecision_resolves_tiny_eigenvalue():
    # eigenvalues 1 and 1e-40 in a rotated basis; double precision cannot see the small one
    with _mp.precision(256):
        c, s = gmpy2.mpfr("0.6"), gmpy2.mpfr("0.8")
        small = gmpy2.mpfr("1e-40")
        A = np.array([[c * c + small * s * s, c * s - small * c * s], [c * s - small * c * s, s * s + small * c * c]], dtype=object)
        w, _ = jacobi_eigh(A)
        assert abs(w[0] - 1) < gmpy2.mpfr("1e-70")
        assert abs(w[1] / small - 1) < gmpy2.mpfr("1e-30")


def test_jacobi_validation_and_nonconvergence():
    with pytest.raises(ValueError):
        jacobi_eigh(np.ones((2, 3)))
    with pytest.raises(ValueError):
        jacobi_eigh(np.eye(2), threshold="bogus")
    rng = np.random.default_rng(0)
    M = rng.normal(size=(20, 20))
    with pytest.raises(NumericalError, match="did not converge"):
        jacobi_eigh(M + M.T, max_sweeps=1)


def test_jacobi_relative_threshold():
    A = np.diag([1.0, 1e-12]) + np.array([[0, 1e-15], [1e-15, 0]])
    w, _ = jacobi_eigh(A, threshold="relative")
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], rtol=1e-10)
