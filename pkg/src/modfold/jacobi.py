"""Cyclic Jacobi eigensolver for symmetric matrices.

Works on float64 arrays and on numpy object arrays of ``gmpy2.mpfr``.  Pairs
are visited in round-robin order so each round applies disjoint rotations at
once.

Two rotation thresholds are offered.  ``"absolute"`` skips ``a_pq`` once
``|a_pq| <= tol ||A||_F``, so every eigenvalue is accurate to about
``n tol ||A||_F``; with enough working bits this resolves tiny eigenvalues
and converges quadratically.  ``"relative"`` skips once
``|a_pq| <= tol sqrt(|a_pp a_qq|)``, which gives relative accuracy in the
working precision for positive definite matrices but can need many sweeps
on strongly graded spectra.
"""

from __future__ import annotations

import math

import numpy as np

from . import _mp
from .exceptions import NumericalError

__all__ = ["jacobi_eigh", "round_robin"]


def round_robin(n):
    """Rounds of disjoint index pairs covering every pair of ``range(n)`` once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _sqrt(x, is_obj):
    return _mp.sqrt(x) if is_obj else np.sqrt(x)


def jacobi_eigh(A, tol=None, max_sweeps=50, eigenvectors=False, threshold="absolute"):
    """Eigenvalues (descending) and optionally eigenvectors of a symmetric matrix.

    Parameters
    ----------
    A : ndarray
        Symmetric float64 or object (mpfr) matrix.  Object arrays are
        processed in the ambient gmpy2 precision.
    tol : float or mpfr, optional
        Relative rotation threshold.  Defaults to ``4 eps`` of the working
        precision.
    threshold : {"absolute", "relative"}
        Rotation test, see the module docstring.
    max_sweeps : int
        Sweeps before :class:`NumericalError` is raised.

    Returns
    -------
    w : ndarray
        Eigenvalues in descending order, same dtype as ``A``.
    V : ndarray, optional
        Matching eigenvectors as columns.
    sweeps : int
        Number of sweeps performed.
    """
    A = np.array(A, copy=True)
    is_obj = A.dtype == object
    if not is_obj:
        A = A.astype(float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if tol is None:
        if is_obj:
            import gmpy2

            tol = 4 * gmpy2.mpfr(2) ** (1 - gmpy2.get_context().precision)
        else:
            tol = 4 * np.finfo(float).eps
    if threshold not in ("absolute", "relative"):
        raise ValueError(f"unknown threshold {threshold!r}")
    relative = threshold == "relative"
    if not relative:
        fro = _sqrt(np.sum(A * A), is_obj)
    if is_obj:
        V = _mp.to_mp(np.eye(n)) if eigenvectors else None
    else:
        V = np.eye(n) if eigenvectors else None
    rounds = round_robin(n)
    sweeps = 0
    history = []
    while True:
        rotated = False
        worst = 0.0
        for p_all, q_all in rounds:
            if p_all.size == 0:
                continue
            app = A[p_all, p_all]
            aqq = A[q_all, q_all]
            apq = A[p_all, q_all]
            scale = _sqrt(np.abs(app * aqq), is_obj) if relative else np.full(apq.shape, fro, dtype=A.dtype)
            mask = np.asarray(np.abs(apq) > tol * scale, dtype=bool)
            if mask.any():
                worst = max(worst, max(float(abs(a) / b) if b else math.inf for a, b in zip(apq[mask], scale[mask])))
            if not mask.any():
                continue
            rotated = True
            p, q = p_all[mask], q_all[mask]
            app, aqq, apq = app[mask], aqq[mask], apq[mask]
            theta = (aqq - app) / (2 * apq)
            sgn = np.where(np.asarray(theta >= 0, dtype=bool), 1, -1)
            t = sgn / (np.abs(theta) + _sqrt(theta * theta + 1, is_obj))
            c = 1 / _sqrt(t * t + 1, is_obj)
            s = t * c
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
            A[p, q] = 0 * apq
            A[q, p] = 0 * apq
            if V is not None:
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
        if not rotated:
            break
        sweeps += 1
        history.append(worst)
        if sweeps >= max_sweeps:
            tail = ", ".join(f"{h:.2e}" for h in history[-5:])
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps (n={n}); "
                f"max relative off-diagonal over the last sweeps: {tail}"
            )
    w = np.array([A[i, i] for i in range(n)], dtype=A.dtype)
    order = sorted(range(n), key=lambda i: w[i], reverse=True)
    w = w[order]
    if eigenvectors:
        return w, V[:, order], sweeps
    return w, sweeps
