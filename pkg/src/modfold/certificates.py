"""Integer sequences close to the sampling range of ``alpha Z`` and their critical functions.

A certificate is a nonzero integer sequence ``n`` together with its residual
``||P_{1-alpha} n||``, the distance from ``U n`` to the range of sampling on
``alpha Z`` (``(U n)_k = (-1)^k n_k``).  Residuals are computed from the exact
integer autocorrelation in multiprecision, because the sequences have
entries many orders of magnitude larger than the residual.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from . import _mp
from .core import BandlimitedSignal, fold
from .exceptions import NumericalError, UsageError
from .frames import band_energy
from .lattice import enumerate_shortest, lll_reduce
from .prolate import prolate_matrix

__all__ = [
    "IntegerCertificate",
    "certificate_from_coeffs",
    "binomial_sequence",
    "binomial_bound",
    "binomial_certificate",
    "chebyshev_expand",
    "chebyshev_certificate",
    "svp_certificate",
    "DeltaPoint",
    "delta_estimate",
    "CriticalFunction",
    "critical_function",
    "WitnessNotFound",
    "instability_witness",
    "write_decay_csv",
]


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _ints(seq):
    out = []
    for v in seq:
        iv = int(v)
        if iv != v:
            raise UsageError(f"certificate entry {v!r} is not an integer")
        out.append(iv)
    return tuple(out)


def _sq_residual(coeffs, alpha):
    """``||P_{1-alpha} n||^2`` as an mpfr, exact up to the working precision."""
    if not any(coeffs):
        return gmpy2.mpfr(0)
    val, _ = _mp.int_quad_form(coeffs, 1.0 - alpha)
    return val


def _norm2(coeffs):
    return sum(v * v for v in coeffs)


@dataclass(frozen=True)
class IntegerCertificate:
    """Nonzero finitely supported integer sequence with its range residual.

    ``coeffs[i]`` is the entry at index ``start + i``; ``imag`` holds the
    imaginary parts of a Gaussian-integer sequence.  ``N`` is the
    construction parameter (binomial order, polynomial degree or lattice
    dimension).
    """

    coeffs: tuple
    alpha: float
    residual: float
    construction: str
    N: int
    start: int = 0
    imag: tuple | None = None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not any(self.coeffs) and not (self.imag and any(self.imag)):
            raise UsageError("certificate sequence must be nonzero")
        if self.imag is not None and len(self.imag) != len(self.coeffs):
            raise UsageError("real and imaginary parts differ in length")
        if self.residual < 0:
            raise UsageError("residual must be non-negative")

    @property
    def length(self):
        return len(self.coeffs)

    @property
    def indices(self):
        return np.arange(self.start, self.start + self.length)

    @property
    def is_real(self):
        return self.imag is None or not any(self.imag)

    def array(self):
        return np.array(self.coeffs, dtype=object)

    def norm2(self):
        """Exact ``||n||^2`` (Python int)."""
        return _norm2(self.coeffs) + (_norm2(self.imag) if self.imag else 0)

    def residual_quadratic_form(self):
        r2 = _sq_residual(self.coeffs, self.alpha)
        if self.imag:
            r2 += _sq_residual(self.imag, self.alpha)
        return math.sqrt(float(r2))

    def residual_band_energy(self):
        """Residual recomputed as ``sqrt(int_{|t|<(1-alpha)/2} |n^(t)|^2 dt)``."""
        bits = self._bits()
        w = 0.5 * (1.0 - self.alpha)
        e = band_energy(np.array(self.coeffs, dtype=object), w, bits=bits)
        if self.imag:
            e += band_energy(np.array(self.imag, dtype=object), w, bits=bits)
        return math.sqrt(e)

    def _bits(self):
        big = max(1, self.norm2()).bit_length()
        small = max(0, -math.floor(math.log2(max(self.residual, 1e-300)))) * 2
        return big + small + 96

    def to_dict(self):
        d = {
            "alpha": self.alpha,
            "construction": self.construction,
            "N": self.N,
            "start": self.start,
            "coeffs": list(self.coeffs),
            "residual": self.residual,
            "energy": self.details.get("energy"),
            "folded_norm": self.details.get("folded_norm"),
        }
        if self.imag is not None:
            d["coeffs_imag"] = list(self.imag)
        extra = {k: v for k, v in self.details.items() if k not in ("energy", "folded_norm")}
        if extra:
            d["details"] = extra
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        return certificate_from_coeffs(
            d["coeffs"],
            d["alpha"],
            construction=d.get("construction", "explicit"),
            N=d.get("N"),
            start=d.get("start", 0),
            imag=d.get("coeffs_imag"),
        )


def certificate_from_coeffs(coeffs, alpha, construction="explicit", N=None, start=0, imag=None, details=None):
    """Build a certificate from integer coefficients, computing its residual."""
    alpha = _check_alpha(alpha)
    c = _ints(coeffs)
    im = _ints(imag) if imag is not None else None
    r2 = _sq_residual(c, alpha)
    if im:
        r2 += _sq_residual(im, alpha)
    return IntegerCertificate(
        c,
        alpha,
        math.sqrt(float(r2)),
        construction,
        len(c) if N is None else int(N),
        int(start),
        im,
        dict(details or {}),
    )


# -- binomial construction ---------------------------------------------------


def binomial_sequence(N):
    """``n_k = (-1)^(N-k) C(N, N-k)`` for ``k = 0..N``; its spectrum has modulus ``(2 sin pi t)^N``."""
    if N < 0:
        raise UsageError("binomial order must be non-negative")
    return tuple((-1) ** (N - k) * math.comb(N, N - k) for k in range(N + 1))


def binomial_bound(N, alpha):
    """``sqrt(1-alpha) (2 sin(pi (1-alpha)/2))^N``, an upper bound for the binomial residual."""
    return math.sqrt(1.0 - alpha) * (2.0 * math.sin(0.5 * math.pi * (1.0 - alpha))) ** N


def binomial_certificate(N, alpha):
    """Binomial certificate of order ``N``, indexed from ``-floor(N/2)``.

    The decay ``residual ~ (2 sin(pi (1-alpha)/2))^N`` only holds for
    ``alpha > 2/3``; other ``alpha`` in ``(0, 1)`` are accepted.
    """
    N = int(N)
    if N < 1:
        raise UsageError("binomial order must be at least 1")
    return certificate_from_coeffs(
        binomial_sequence(N), alpha, construction="binomial", N=N, start=-(N // 2),
        details={"bound": binomial_bound(N, _check_alpha(alpha))},
    )


# -- integer Chebyshev construction ------------------------------------------


def chebyshev_expand(poly):
    """Integer sequence of ``p(z + 1/z)`` for ``p(x) = sum_i poly[i] x^i``.

    The result has length ``2d+1`` and is indexed from ``-d`` (``d`` = degree),
    i.e. the Fourier coefficients of ``p(2 cos 2 pi t)``.
    """
    p = _ints(poly)
    d = len(p) - 1
    out = [0] * (2 * d + 1)
    for i, a in enumerate(p):
        if a:
            for j in range(i + 1):
                out[d + i - 2 * j] += a * math.comb(i, j)
    return tuple(out)


def _expansion_matrix(d):
    E = np.zeros((2 * d + 1, d + 1))
    for i in range(d + 1):
        for j in range(i + 1):
            E[d + i - 2 * j, i] += math.comb(i, j)
    return E


def _sup_on(poly, a, b, grid=4001):
    p = np.polynomial.Polynomial(np.asarray(poly, dtype=float))
    xs = np.linspace(a, b, grid)
    crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-12 and a <= r.real <= b] if p.degree() > 1 else []
    xs = np.concatenate([xs, crit])
    return float(np.max(np.abs(p(xs))))


def chebyshev_certificate(N, alpha, coeff_bound=2, objective="residual", poly=None, max_candidates=5_000_000):
    """Integer polynomial of degree at most ``N`` that is small on ``[2 cos(pi(1-alpha)), 2]``.

    Parameters
    ----------
    N : int
        Maximal degree; the sequence has length ``2N+1``.
    coeff_bound : int
        Search box ``|p_i| <= coeff_bound``.
    objective : {"residual", "sup"}
        ``"residual"`` minimises the certificate residual, which is the
        weighted L2 norm of ``p`` on the interval; ``"sup"`` minimises the
        sup norm there (the integer Chebyshev problem).
    poly : sequence of int, optional
        Skip the search and use this polynomial (ascending powers).
    """
    alpha = _check_alpha(alpha)
    N = int(N)
    if N < 0:
        raise UsageError("degree must be non-negative")
    a = 2.0 * math.cos(math.pi * (1.0 - alpha))
    if poly is None:
        if coeff_bound < 1:
            raise UsageError("coeff_bound must be at least 1")
        if objective not in ("residual", "sup"):
            raise UsageError(f"unknown objective {objective!r}")
        K = (2 * coeff_bound + 1) ** (N + 1)
        if K > max_candidates:
            raise UsageError(f"search box holds {K} candidates (> {max_candidates}); lower N or coeff_bound")
        poly = _chebyshev_search(N, alpha, coeff_bound, objective, a)
    poly = list(_ints(poly))
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    if not any(poly):
        raise UsageError("zero polynomial; raise coeff_bound")
    seq = chebyshev_expand(poly)
    d = len(poly) - 1
    return certificate_from_coeffs(
        seq, alpha, construction="chebyshev", N=d, start=-d,
        details={"polynomial": poly, "sup_norm": _sup_on(poly, a, 2.0), "interval": [a, 2.0]},
    )


def _chebyshev_search(N, alpha, B, objective, a):
    box = np.arange(-B, B + 1)
    cands = np.array(list(itertools.product(box, repeat=N + 1)), dtype=float)
    cands = cands[np.any(cands != 0, axis=1)]
    # p and -p give the same residual: keep the half with positive leading nonzero entry
    lead = cands[np.arange(len(cands)), np.argmax(cands != 0, axis=1)]
    cands = cands[lead > 0]
    if objective == "residual":
        E = _expansion_matrix(N)
        Q = prolate_matrix(1.0 - alpha, 2 * N + 1).entries
        M = E.T @ Q @ E
        score = np.einsum("ij,jk,ik->i", cands, M, cands)
    else:
        xs = np.linspace(a, 2.0, 64 * (N + 1) + 1)
        V = np.vander(xs, N + 1, increasing=True)
        score = np.concatenate(
            [np.max(np.abs(cands[i : i + 20000] @ V.T), axis=1) for i in range(0, len(cands), 20000)]
        )
    top = cands[np.argsort(score, kind="stable")[:32]]
    if objective == "residual":
        best = min(top.tolist(), key=lambda p: (_sq_residual(chebyshev_expand(p), alpha), p))
    else:
        best = min(top.tolist(), key=lambda p: (_sup_on(p, a, 2.0), p))
    return [int(v) for v in best]


# -- shortest vector searches -------------------------------------------------


def _lattice_gram(alpha, N):
    Q = prolate_matrix(1.0 - alpha, N)
    bits = int(1.1 * Q.decay_bits()) + 160
    return Q, bits


def svp_certificate(alpha, N, method="bruteforce", bound=3, delta=0.75):
    """Shortest integer vector for the form ``Q_{1-alpha,N}``.

    ``method="bruteforce"`` is exact inside the box ``|n_i| <= bound``;
    ``method="lll"`` returns the shortest reduced-basis vector, within
    ``2^((N-1)/2)`` of the lattice minimum; ``method="exact"`` enumerates
    without a box in LLL-reduced coordinates and returns the lattice
    minimum itself.  Residuals are recomputed exactly from the returned
    vector.
    """
    alpha = _check_alpha(alpha)
    N = int(N)
    if N < 1:
        raise UsageError("lattice dimension must be at least 1")
    Q, bits = _lattice_gram(alpha, N)
    if method == "bruteforce":
        if N > 14 or bound > 3 or bound < 1:
            raise UsageError("brute-force search needs N <= 14 and 1 <= bound <= 3")
        with _mp.precision(bits):
            G = Q.mp_entries(bits)
            start = [list(b) for b in lll_reduce(G, delta)[0] if max(abs(v) for v in b) <= bound]
            start.append([1] + [0] * (N - 1))
            r0 = min(float(_sq_residual(tuple(v), alpha)) for v in start)
            vec, nodes = enumerate_shortest(G, bound, radius2=r0)
        if vec is None:
            vec = min(start, key=lambda v: _sq_residual(tuple(v), alpha))
        return certificate_from_coeffs(vec, alpha, "svp_bruteforce", N, details={"bound": bound, "nodes": nodes})
    if method == "exact":
        if N > 40:
            raise UsageError("exact enumeration is limited to N <= 40")
        with _mp.precision(bits):
            G = Q.mp_entries(bits)
            B, norms2 = lll_reduce(G, delta)
            Bm = np.array(B, dtype=object)
            H = Bm.dot(G).dot(Bm.T)
            coords, nodes = enumerate_shortest(H, 1 << 40, radius2=min(norms2))
        vec = B[int(np.argmin([float(v) for v in norms2]))] if coords is None else [
            int(v) for v in np.array(coords, dtype=object).dot(Bm)
        ]
        return certificate_from_coeffs(vec, alpha, "svp_exact", N, details={"nodes": nodes})
    if method == "lll":
        if N > 512:
            raise UsageError("LLL is limited to N <= 512")
        with _mp.precision(bits):
            B, norms2 = lll_reduce(Q.mp_entries(bits), delta)
        order = sorted(range(N), key=lambda i: norms2[i])[: min(N, 4)]
        vec = min((B[i] for i in order), key=lambda v: _sq_residual(tuple(v), alpha))
        return certificate_from_coeffs(vec, alpha, "svp_lll", N, details={"delta": delta})
    raise UsageError(f"unknown SVP method {method!r}")


# -- distance estimates ---------------------------------------------------------


@dataclass(frozen=True)
class DeltaPoint:
    N: int
    residual: float
    construction: str
    found_at: int


def _candidates(alpha, L, constructions, coeff_bound, svp_bound):
    out = []
    for name in constructions:
        if name == "binomial" and L >= 2:
            out.append(binomial_certificate(L - 1, alpha))
        elif name == "chebyshev" and L >= 3:
            d = (L - 1) // 2
            if (2 * coeff_bound + 1) ** (d + 1) <= 5_000_000:
                out.append(chebyshev_certificate(d, alpha, coeff_bound))
        elif name == "svp_bruteforce" and L <= 14:
            out.append(svp_certificate(alpha, L, "bruteforce", svp_bound))
        elif name == "svp_lll":
            out.append(svp_certificate(alpha, L, "lll"))
        elif name == "svp_exact" and L <= 40:
            out.append(svp_certificate(alpha, L, "exact"))
        elif name not in ("binomial", "chebyshev", "svp_bruteforce", "svp_lll", "svp_exact"):
            raise UsageError(f"unknown construction {name!r}")
    out.append(certificate_from_coeffs((1,), alpha, "unit", 1))
    return out


def delta_estimate(alpha, schedule, constructions=("binomial",), coeff_bound=2, svp_bound=3):
    """Best residual over sequences supported on ``N`` consecutive indices.

    For each window length ``N`` in ``schedule`` the enabled constructions
    are sized to fit the window (binomial order ``N-1``, Chebyshev degree
    ``(N-1)//2``, lattice dimension ``N``).  Because a sequence fitting in a
    window also fits in every larger one, the reported value is the running
    minimum and is non-increasing.
    """
    alpha = _check_alpha(alpha)
    schedule = [int(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise UsageError("schedule must be a strictly increasing list of positive window lengths")
    out = []
    best = None
    for L in schedule:
        for cert in _candidates(alpha, L, constructions, coeff_bound, svp_bound):
            if best is None or cert.residual < best[0]:
                best = (cert.residual, cert.construction, L)
        out.append(DeltaPoint(L, best[0], best[1], best[2]))
    return out


def write_decay_csv(path, rows, header=("N", "residual", "bound")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])


# -- critical functions -----------------------------------------------------------


@dataclass(frozen=True)
class CriticalFunction:
    """Bandlimited ``g = 2 lam alpha C*_{alpha Z} (U n)`` whose samples lie near ``2 lam Z``.

    For ``lam = 1/2`` this is ``f_N = alpha C*_{alpha Z} m`` with ``m = U n``.
    ``samples`` are the exact sample values on ``window`` (rounded to
    double) and ``tail_norm`` the l2 norm of all samples outside it.
    """

    signal: BandlimitedSignal
    folded_norm: float
    energy: float
    alpha: float
    lam: float
    certificate: IntegerCertificate
    window: tuple
    samples: np.ndarray
    tail_norm: float

    @property
    def N(self):
        return self.certificate.N

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "lambda": self.lam,
            "construction": self.certificate.construction,
            "N": self.N,
            "start": self.certificate.start,
            "coeffs": list(self.certificate.coeffs),
            "residual": self.certificate.residual,
            "energy": self.energy,
            "folded_norm": self.folded_norm,
            "window": list(self.window),
            "tail_norm": self.tail_norm,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _range_defect(m, start, alpha, lo, hi, bits):
    """``(P_alpha m - m)_j`` for ``j = lo..hi`` in multiprecision."""
    with _mp.precision(bits):
        span = max(hi - start, start + len(m) - 1 - lo) + 1
        lags = _mp.sinc_lags(alpha, span)
        out = []
        for j in range(lo, hi + 1):
            s = gmpy2.mpfr(0)
            for i, v in enumerate(m):
                if v:
                    s += lags[abs(j - start - i)] * v
            k = j - start
            if 0 <= k < len(m):
                s -= m[k]
            out.append(s)
        return out


def critical_function(cert, lam, guard=4.0):
    """Critical function of a real certificate at folding threshold ``lam``.

    Samples on ``alpha Z`` equal ``2 lam P_alpha m``, which sits within the
    certificate residual of ``2 lam m`` in ``2 lam Z``.  The folded norm is
    exact: inside the guard window entries are folded individually, and the
    part outside it (where ``m = 0``) contributes its l2 norm once that norm
    is below ``lam``.
    """
    lam = float(lam)
    if not lam > 0:
        raise UsageError("folding threshold must be positive")
    if not cert.is_real:
        raise UsageError("critical functions are built from real certificates")
    if guard < 1:
        raise UsageError("guard band too small: the window must cover the support")
    alpha = cert.alpha
    L = cert.length
    idx = cert.indices
    m = [(-1) ** (int(k) % 2) * v for k, v in zip(idx, cert.coeffs)]
    norm2 = _norm2(m)
    bits = cert._bits()
    with _mp.precision(bits):
        total = _sq_residual(cert.coeffs, alpha)
    pad = max(8, int(math.ceil(0.5 * (guard - 1) * L)))
    while True:
        lo, hi = cert.start - pad, cert.start + L - 1 + pad
        defect = _range_defect(m, cert.start, alpha, lo, hi, bits)
        with _mp.precision(bits):
            inside = sum((d * d for d in defect), gmpy2.mpfr(0))
            tail2 = max(total - inside, gmpy2.mpfr(0))
        tail = math.sqrt(float(tail2))
        if 2 * lam * tail < lam:
            break
        pad *= 2
        if pad > 1 << 16:
            raise NumericalError("range defect does not decay outside the support")
    scale = 2 * lam
    r = np.array([float(d) for d in defect])
    mm = np.zeros(hi - lo + 1)
    mm[cert.start - lo : cert.start - lo + L] = np.array(m, dtype=float)
    samples = scale * (mm + r)
    folded2 = float(np.sum(np.abs(fold(scale * r, lam)) ** 2)) + (scale * tail) ** 2
    with _mp.precision(bits):
        energy = float(scale * gmpy2.sqrt(alpha * (norm2 - total)))
    signal = BandlimitedSignal(1.0, alpha * idx.astype(float), scale * alpha * np.array(m, dtype=float))
    check = signal(alpha * np.arange(lo, hi + 1, dtype=float))
    if np.max(np.abs(check - samples)) > 1e-8 * max(1.0, scale * math.sqrt(norm2)):
        raise NumericalError("synthesised samples disagree with the projected sequence")
    return CriticalFunction(
        signal, math.sqrt(folded2), energy, alpha, lam, cert, (lo, hi), samples, scale * tail
    )


class WitnessNotFound(NumericalError):
    """Schedule exhausted without meeting the witness targets."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def instability_witness(alpha, lam, target_folded_norm, floor_energy, schedule=range(1, 201), construction="binomial"):
    """First ``N`` in ``schedule`` whose critical function ``g`` has ``||M g|| < target`` and ``||g|| > floor``.

    Since ``M 0 = 0``, the pair ``(g, 0)`` has folded samples closer than
    ``target`` while the signals are more than ``floor`` apart.
    """
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}; at alpha = 1 use g = 2 lam sinc")
    if target_folded_norm <= 0 or floor_energy <= 0:
        raise UsageError("targets must be positive")
    best = None
    for N in schedule:
        if construction == "binomial":
            cert = binomial_certificate(N, alpha)
        elif construction == "chebyshev":
            cert = chebyshev_certificate(N, alpha)
        else:
            raise UsageError(f"unknown construction {construction!r}")
        if best is not None and 2 * lam * cert.residual >= 1e3 * best.folded_norm and cert.residual > 1:
            continue
        cf = critical_function(cert, lam)
        if best is None or cf.folded_norm < best.folded_norm:
            best = cf
        if cf.folded_norm < target_folded_norm and cf.energy > floor_energy:
            return cf
    msg = "no witness in schedule"
    if best is not None:
        msg += f"; best folded norm {best.folded_norm:.3e} at N={best.N} (energy {best.energy:.3e})"
    raise WitnessNotFound(msg, best)
