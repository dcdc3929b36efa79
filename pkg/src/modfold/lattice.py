"""Shortest vectors of integer lattices given by a positive definite Gram matrix.

The lattice is ``Z^N`` with the quadratic form ``n^T G n``; no square root of
``G`` is ever formed.  Basis transforms are exact (Python integers); the
Gram-Schmidt data run in the ambient gmpy2 precision.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np

from .exceptions import NumericalError, UsageError

__all__ = ["lll_reduce", "enumerate_shortest", "ldl"]


def ldl(G):
    """``G = L D L^T`` for a symmetric positive definite (object or float) matrix.

    Returns ``(mu, d)`` with ``mu`` unit lower triangular.
    """
    n = G.shape[0]
    mu = np.zeros((n, n), dtype=G.dtype)
    d = np.zeros(n, dtype=G.dtype)
    for i in range(n):
        for j in range(i):
            s = G[i, j]
            for k in range(j):
                s -= mu[i, k] * mu[j, k] * d[k]
            mu[i, j] = s / d[j]
        s = G[i, i]
        for k in range(i):
            s -= mu[i, k] * mu[i, k] * d[k]
        if not s > 0:
            raise NumericalError(f"Gram matrix not positive definite (pivot {float(s):.3e} at {i})")
        d[i] = s
        mu[i, i] = 1
    return mu, d


def _round(x):
    return int(gmpy2.rint(x)) if isinstance(x, type(gmpy2.mpfr(0))) else int(round(x))


def lll_reduce(G, delta=0.75):
    """LLL-reduce the standard basis of ``Z^N`` under the form ``G``.

    Parameters
    ----------
    G : ndarray of mpfr
        Symmetric positive definite Gram matrix (object array).
    delta : float
        Lovasz parameter in ``(1/4, 1)``.

    Returns
    -------
    B : list of list of int
        Reduced basis, one row per vector.
    norms2 : list of mpfr
        ``b_i^T G b_i`` for each row.
    """
    if not 0.25 < delta < 1:
        raise UsageError("delta must lie in (1/4, 1)")
    n = G.shape[0]
    B = [[int(i == j) for j in range(n)] for i in range(n)]
    H = np.array(G, copy=True)  # Gram of the current basis rows
    mu = np.zeros((n, n), dtype=object)
    r = np.zeros(n, dtype=object)

    def gso_row(i):
        for j in range(i):
            s = H[i, j]
            for k in range(j):
                s -= mu[j, k] * mu[i, k] * r[k]
            mu[i, j] = s / r[j]
        s = H[i, i]
        for k in range(i):
            s -= mu[i, k] * mu[i, k] * r[k]
        if not s > 0:
            raise NumericalError("lost positive definiteness in Gram-Schmidt; raise the precision")
        r[i] = s

    def sub(k, j, q):
        # b_k <- b_k - q b_j
        bk, bj = B[k], B[j]
        for t in range(n):
            bk[t] -= q * bj[t]
        hkk = H[k, k] - 2 * q * H[k, j] + q * q * H[j, j]
        H[k, :] -= q * H[j, :]
        H[:, k] = H[k, :]
        H[k, k] = hkk
        for t in range(j):
            mu[k, t] -= q * mu[j, t]
        mu[k, j] -= q

    gso_row(0)
    k = 1
    while k < n:
        gso_row(k)
        for j in range(k - 1, -1, -1):
            q = _round(mu[k, j])
            if q:
                sub(k, j, q)
        if r[k] >= (delta - mu[k, k - 1] ** 2) * r[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            H[[k, k - 1], :] = H[[k - 1, k], :]
            H[:, [k, k - 1]] = H[:, [k - 1, k]]
            k = max(k - 1, 1)
            gso_row(k - 1)
    norms2 = [H[i, i] for i in range(n)]
    return B, norms2


def enumerate_shortest(G, bound, radius2=None):
    """Exact shortest nonzero vector of ``Z^N`` in the box ``|n_i| <= bound``.

    Schnorr-Euchner enumeration on ``G = L D L^T`` (computed in the ambient
    precision and rounded to double for the search).  Returns
    ``(vector, nodes)``; ``vector`` is ``None`` if nothing lies inside
    ``radius2``.
    """
    mu_mp, d_mp = ldl(G)
    n = G.shape[0]
    mu = np.array([[float(v) for v in row] for row in mu_mp])
    d = np.array([float(v) for v in d_mp])
    if radius2 is None:
        radius2 = float(min(G[i, i] for i in range(n)))
    R = float(radius2) * (1 + 1e-9)
    best = None
    x = [0] * n
    nodes = 0

    # Depth-first over i = n-1 .. 0; centre c_i = -sum_{j>i} mu[j, i] x_j.
    def centre(i):
        return -sum(mu[j, i] * x[j] for j in range(i + 1, n))

    def rec(i, partial):
        nonlocal R, best, nodes
        c = centre(i)
        budget = R - partial
        if budget < 0:
            return
        w = math.sqrt(budget / d[i])
        lo = max(-bound, math.ceil(c - w))
        hi = min(bound, math.floor(c + w))
        if lo > hi:
            return
        # zig-zag from the nearest integer outwards
        start = min(max(round(c), lo), hi)
        order = [start]
        for step in range(1, hi - lo + 1):
            for v in (start + step, start - step):
                if lo <= v <= hi:
                    order.append(v)
        for v in order:
            nodes += 1
            p = partial + d[i] * (v - c) ** 2
            if p > R:
                continue
            x[i] = v
            if i == 0:
                if any(x):
                    R = p
                    best = list(x)
            else:
                rec(i - 1, p)
            x[i] = 0

    rec(n - 1, 0.0)
    return best, nodes
