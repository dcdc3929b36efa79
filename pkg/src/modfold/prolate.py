"""Prolate matrices ``Q_{alpha,N} = (alpha sinc(alpha (j-k)))_{j,k<N}`` and their spectra.

The smallest eigenvalues decay like ``exp(-c N)`` and fall far below double
precision, so spectra and determinants are computed in gmpy2 multiprecision
with a working precision chosen from an a priori decay estimate and doubled
until the smallest eigenvalue (or Cholesky pivot) is resolved.
"""

from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass, replace

import numpy as np

from . import _mp
from .exceptions import NumericalError, UsageError
from .jacobi import jacobi_eigh

__all__ = [
    "ProlateMatrix",
    "SpectrumReport",
    "prolate_matrix",
    "spectrum",
    "plunge_fit",
    "log_det",
    "minkowski_bound",
    "commuting_tridiagonal",
]

GUARD_BITS = 64

_cache_lock = threading.Lock()
_mp_cache: dict = {}


def _mp_toeplitz(alpha, n, bits):
    """Cached multiprecision prolate entries; concurrent reads, locked insertion."""
    key = (float(alpha), int(n), int(bits))
    hit = _mp_cache.get(key)
    if hit is not None:
        return hit
    with _cache_lock:
        hit = _mp_cache.get(key)
        if hit is None:
            with _mp.precision(bits):
                hit = _mp.sinc_toeplitz(alpha, n)
            hit.setflags(write=False)
            _mp_cache[key] = hit
    return hit


def clear_cache():
    with _cache_lock:
        _mp_cache.clear()


@dataclass(frozen=True)
class ProlateMatrix:
    alpha: float
    N: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise UsageError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.N < 1:
            raise UsageError("N must be at least 1")

    @property
    def entries(self):
        d = np.arange(self.N)
        return self.alpha * np.sinc(self.alpha * (d[:, None] - d[None, :]))

    def mp_entries(self, bits):
        return _mp_toeplitz(self.alpha, self.N, bits)

    @property
    def trace(self):
        return self.alpha * self.N

    def quad_form(self, c):
        c = np.asarray(c)
        return float(np.real(np.conj(c) @ self.entries @ c))

    def decay_bits(self):
        """A priori estimate of ``-log2`` of the smallest eigenvalue (~ tan(pi alpha/4)^(2N))."""
        return -2.0 * self.N * math.log2(math.tan(0.25 * math.pi * self.alpha))


def prolate_matrix(alpha, N):
    return ProlateMatrix(float(alpha), int(N))


@dataclass(frozen=True)
class SpectrumReport:
    alpha: float
    N: int
    epsilon: float
    eigenvalues: np.ndarray
    log_eigenvalues: np.ndarray
    log_det: float
    plunge_index: int
    bits: int
    sweeps: int
    fitted_decay_rate: float | None = None

    @property
    def plunge_value(self):
        if self.plunge_index >= self.N:
            return None
        return float(self.eigenvalues[self.plunge_index])

    @property
    def log_plunge_value(self):
        if self.plunge_index >= self.N:
            return None
        return float(self.log_eigenvalues[self.plunge_index])

    @property
    def minkowski_bound(self):
        return math.sqrt(self.N) * math.exp(self.log_det / (2 * self.N))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "mu_k", "log_mu_k"])
            for k, (mu, lmu) in enumerate(zip(self.eigenvalues, self.log_eigenvalues)):
                w.writerow([k, repr(float(mu)), repr(float(lmu))])

    def summary(self):
        return {
            "alpha": self.alpha,
            "N": self.N,
            "epsilon": self.epsilon,
            "plunge_index": self.plunge_index,
            "log_det": self.log_det,
            "minkowski_bound": self.minkowski_bound,
            "fitted_decay_rate": self.fitted_decay_rate,
            "bits": self.bits,
        }

    def to_json(self):
        return json.dumps(self.summary(), sort_keys=True, indent=2)


def _parity_blocks(A):
    """Even/odd blocks of a centrosymmetric matrix; their spectra partition ``A``'s."""
    n = A.shape[0]
    h = n // 2
    i = np.arange(h)
    flip = n - 1 - i
    even = A[np.ix_(i, i)] + A[np.ix_(i, flip)]
    odd = A[np.ix_(i, i)] - A[np.ix_(i, flip)]
    if n % 2:
        m = h
        root2 = _mp.sqrt(A[m, m] * 0 + 2) if A.dtype == object else math.sqrt(2.0)
        E = np.empty((h + 1, h + 1), dtype=A.dtype)
        E[:h, :h] = even
        E[:h, h] = root2 * A[i, m]
        E[h, :h] = E[:h, h]
        E[h, h] = A[m, m]
        even = E
    return even, odd


def commuting_tridiagonal(alpha, N, dtype=float):
    """Tridiagonal matrix commuting with ``Q_{alpha,N}``, with a simple spectrum.

    Diagonal ``((N-1)/2 - j)^2 cos(pi alpha)``, off-diagonal ``j (N-j) / 2``.
    """
    if dtype == object:
        import gmpy2

        cos = gmpy2.cos(gmpy2.const_pi() * gmpy2.mpfr(float(alpha)))
        T = _mp.to_mp(np.zeros((N, N)))
        half = gmpy2.mpfr(N - 1) / 2
    else:
        cos = math.cos(math.pi * alpha)
        T = np.zeros((N, N))
        half = (N - 1) / 2
    for j in range(N):
        T[j, j] = (half - j) ** 2 * cos
    for j in range(1, N):
        T[j - 1, j] = T[j, j - 1] = j * (N - j) / 2 if dtype != object else _mp.to_mp(j * (N - j)).item() / 2
    return T


def _block_eigs(A, T, max_sweeps):
    """Jacobi on ``T`` gives near-eigenvectors of ``A``; Jacobi then finishes ``V^T A V``.

    Plain Jacobi on ``A`` stalls in a long linear phase because the tiny
    eigenvalues are separated by gaps comparable to themselves, whereas the
    gaps of ``T`` are of order one.
    """
    if A.shape[0] == 0:
        return np.empty(0, dtype=A.dtype), 0
    _, V, s1 = jacobi_eigh(T, max_sweeps=max_sweeps, eigenvectors=True)
    B = V.T.dot(A).dot(V)
    B = (B + B.T) / 2
    w, s2 = jacobi_eigh(B, max_sweeps=max_sweeps)
    return w, s1 + s2


def _centro_eigs(A, T, max_sweeps=50):
    even, odd = _parity_blocks(A)
    teven, todd = _parity_blocks(T)
    we, se = _block_eigs(even, teven, max_sweeps)
    wo, so = _block_eigs(odd, todd, max_sweeps)
    w = np.concatenate([we, wo])
    order = sorted(range(w.size), key=lambda k: w[k], reverse=True)
    return w[order], max(se, so)


def _check_eps(alpha, epsilon):
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    if (1 + epsilon) * alpha >= 1:
        raise UsageError(f"plunge check needs (1+epsilon)*alpha < 1, got {(1 + epsilon) * alpha:g}")


def spectrum(Q, epsilon=0.1, precision="auto", max_sweeps=50):
    """Eigenvalues of ``Q`` (descending) with log-determinant and plunge index.

    Parameters
    ----------
    Q : ProlateMatrix
    epsilon : float
        Plunge offset; the plunge index is ``floor(alpha N (1+epsilon))``.
    precision : {"auto", "double"} or int
        ``"auto"`` starts from the decay estimate and doubles the working
        bits until the smallest eigenvalue exceeds the precision floor by
        ``GUARD_BITS``.  An int fixes the working bits.  ``"double"`` uses
        float64 Jacobi (adequate only while the spectrum stays above 1e-14).
    """
    _check_eps(Q.alpha, epsilon)
    plunge = int(math.floor(Q.alpha * Q.N * (1 + epsilon)))
    if precision == "double":
        w, sweeps = _centro_eigs(Q.entries, commuting_tridiagonal(Q.alpha, Q.N), max_sweeps)
        if w[-1] <= 0:
            raise NumericalError(f"non-positive eigenvalue {w[-1]:.3e} in double precision; use multiprecision")
        logs = np.log(w)
        return SpectrumReport(Q.alpha, Q.N, float(epsilon), w, logs, float(np.sum(logs)), plunge, 53, sweeps)
    fixed = isinstance(precision, int) and not isinstance(precision, bool)
    if fixed:
        bits = int(precision)
    elif precision == "auto":
        bits = int(1.1 * Q.decay_bits()) + 2 * GUARD_BITS + int(math.log2(Q.N + 1))
    else:
        raise UsageError(f"unknown precision {precision!r}")
    while True:
        with _mp.precision(bits):
            A = np.array(Q.mp_entries(bits), copy=True)
            T = commuting_tridiagonal(Q.alpha, Q.N, dtype=object)
            w, sweeps = _centro_eigs(A, T, max_sweeps)
            lo = w[-1]
            floor_bits = bits - GUARD_BITS - int(math.log2(Q.N + 1))
            resolved = lo > 0 and math.log2(float(lo)) > -floor_bits if float(lo) > 0 else False
            if resolved or fixed:
                if not lo > 0:
                    raise NumericalError(f"non-positive eigenvalue at {bits} bits")
                logs = _mp.log(w)
                ld = float(sum(logs))
                return SpectrumReport(
                    Q.alpha, Q.N, float(epsilon), _mp.to_float(w), _mp.to_float(logs), ld, plunge, bits, sweeps
                )
        bits *= 2
        if bits > 1 << 15:
            raise NumericalError("smallest eigenvalue not resolved below 32768 bits")


def plunge_fit(alpha, Ns, epsilon=0.1, precision="auto"):
    """Least-squares slope of ``log mu_{plunge}`` against ``N``.

    Returns ``(slope, reports)``; each report carries the slope as
    ``fitted_decay_rate``.  The fit window is exactly ``Ns``.
    """
    Ns = [int(n) for n in Ns]
    if len(Ns) < 2:
        raise UsageError("plunge fit needs at least two sizes")
    reports = [spectrum(prolate_matrix(alpha, n), epsilon, precision) for n in Ns]
    pts = [(r.N, r.log_plunge_value) for r in reports if r.log_plunge_value is not None]
    if len(pts) < 2:
        raise UsageError("plunge index exceeds N for too many sizes")
    x, y = np.array(pts).T
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, [replace(r, fitted_decay_rate=slope) for r in reports]


def log_det(Q, rel_tol=1e-12):
    """``log det Q`` by multiprecision Cholesky with adaptive precision.

    Returns ``(logdet, bits)``.  Precision doubles until the smallest pivot
    is resolved and two successive evaluations agree to ``rel_tol``.
    """
    bits = int(Q.decay_bits()) + 2 * GUARD_BITS
    prev = None
    while bits <= 1 << 15:
        with _mp.precision(bits):
            try:
                ld, piv = _mp.cholesky_logdet(Q.mp_entries(bits))
            except ValueError:
                ld = None
            if ld is not None and math.log2(float(piv)) > -(bits - GUARD_BITS):
                val = float(ld)
                if prev is not None and abs(val - prev) <= rel_tol * max(1.0, abs(val)):
                    return val, bits
                prev = val
        bits *= 2
    raise NumericalError("Cholesky log-determinant did not stabilise")


def minkowski_bound(Q, report=None):
    """``sqrt(N) det(Q)^{1/(2N)}``, the Minkowski bound for the lattice with Gram ``Q``.

    Uses ``report.log_det`` when a spectrum is supplied, otherwise the
    Cholesky log-determinant.
    """
    if report is not None:
        if report.N != Q.N or report.alpha != Q.alpha:
            raise UsageError("spectrum report does not belong to this matrix")
        if not np.all(report.eigenvalues > 0):
            raise NumericalError("non-positive eigenvalue in spectrum")
        ld = report.log_det
    else:
        ld, _ = log_det(Q)
    return math.sqrt(Q.N) * math.exp(ld / (2 * Q.N))
