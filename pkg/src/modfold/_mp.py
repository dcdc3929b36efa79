"""Multiprecision helpers built on gmpy2 ``mpfr`` and numpy object arrays.

Prolate matrices have eigenvalues far below double-precision round-off and
integer certificates have norms that cancel over many orders of magnitude,
so several routines run in an explicit working precision (in bits).
"""

from __future__ import annotations

import contextlib
import math

import gmpy2
import numpy as np
from gmpy2 import mpfr

_sqrt = np.frompyfunc(gmpy2.sqrt, 1, 1)
_log = np.frompyfunc(gmpy2.log, 1, 1)
_to_float = np.frompyfunc(float, 1, 1)


@contextlib.contextmanager
def precision(bits):
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)) as ctx:
        yield ctx


def digits_to_bits(digits):
    return int(math.ceil(digits * math.log2(10))) + 8


def to_mp(x):
    """Object array of ``mpfr`` in the current precision (exact for doubles/ints)."""
    arr = np.asarray(x)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1).tolist()):
        flat[i] = mpfr(v)
    return out


def to_float(a):
    return np.asarray(_to_float(a), dtype=float) if isinstance(a, np.ndarray) else float(a)


def sqrt(a):
    return _sqrt(a) if isinstance(a, np.ndarray) else gmpy2.sqrt(a)


def log(a):
    return _log(a) if isinstance(a, np.ndarray) else gmpy2.log(a)


def sinc_lags(alpha, max_lag):
    """``alpha * sinc(alpha * d)`` for ``d = 0..max_lag`` with ``alpha`` taken exactly."""
    a = mpfr(float(alpha))
    pi = gmpy2.const_pi()
    out = np.empty(max_lag + 1, dtype=object)
    out[0] = a
    for d in range(1, max_lag + 1):
        out[d] = gmpy2.sin(pi * a * d) / (pi * d)
    return out


def sinc_toeplitz(alpha, n):
    lags = sinc_lags(alpha, n - 1)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return lags[idx]


def int_autocorrelation(n):
    """Exact ``r(d) = sum_k n_k n_{k+d}`` for an integer sequence."""
    n = [int(v) for v in n]
    L = len(n)
    return [sum(n[k] * n[k + d] for k in range(L - d)) for d in range(L)]


def _int_quad_form_at(r, alpha, bits):
    with precision(bits):
        lags = sinc_lags(alpha, len(r) - 1)
        total = lags[0] * r[0]
        for d in range(1, len(r)):
            if r[d]:
                total += 2 * lags[d] * r[d]
        return total


def int_quad_form(n, alpha, rel_tol=1e-15, start_bits=192, max_bits=1 << 16):
    """``n^T (alpha sinc(alpha (j-k)))_{jk} n`` for an integer vector, to ``rel_tol``.

    The sum is formed from the exact integer autocorrelation, so the only
    rounding comes from the sinc values; precision is doubled until two
    successive evaluations agree.
    """
    r = int_autocorrelation(n)
    bits = max(start_bits, 4 * max(abs(v) for v in r).bit_length() + 64)
    prev = _int_quad_form_at(r, alpha, bits)
    while True:
        bits *= 2
        cur = _int_quad_form_at(r, alpha, bits)
        if cur == prev or abs(cur - prev) <= rel_tol * abs(cur):
            return cur, bits
        if bits > max_bits:
            from .exceptions import NumericalError

            raise NumericalError(f"quadratic form did not stabilise below {max_bits} bits")
        prev = cur


def cholesky_logdet(A):
    """Log-determinant of a symmetric positive definite object array via Cholesky.

    Returns ``(logdet, min_pivot)``; raises ``ValueError`` on a non-positive pivot.
    """
    A = A.copy()
    n = A.shape[0]
    logdet = mpfr(0)
    min_pivot = None
    for k in range(n):
        piv = A[k, k]
        if not piv > 0:
            raise ValueError(f"non-positive pivot at step {k}")
        min_pivot = piv if min_pivot is None or piv < min_pivot else min_pivot
        logdet += gmpy2.log(piv)
        if k + 1 < n:
            col = A[k + 1 :, k] / piv
            A[k + 1 :, k + 1 :] -= np.outer(col, A[k, k + 1 :])
    return logdet, min_pivot
