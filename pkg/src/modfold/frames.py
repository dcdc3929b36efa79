"""Sampling/synthesis operators, Gram matrices, frame bounds and range projections.

Finitely supported sequences are numpy arrays together with the integer index
``start`` of their first entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _mp
from .core import BandlimitedSignal, SeparatedSet
from .exceptions import UsageError

__all__ = [
    "GramMatrix",
    "gram",
    "analyze",
    "synthesize",
    "NyquistModel",
    "FrameBounds",
    "frame_bounds_estimate",
    "ProjectionOperator",
    "ProjectionResult",
    "projection_apply",
    "projection_quadratic_form",
    "spectrum_eval",
    "band_energy",
    "flip_signs",
]


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    omega: float
    points: np.ndarray

    @property
    def size(self):
        return self.entries.shape[0]

    def to_csv(self, path):
        header = f"gram N={self.size} omega={self.omega!r}"
        np.savetxt(path, self.entries, delimiter=",", header=header, fmt="%.17g")


def gram(X, omega, psd_tol=1e-10):
    """Gram matrix ``omega * sinc(omega (x_j - x_k))`` of the kernels at ``X``."""
    pts = X.points if isinstance(X, SeparatedSet) else np.asarray(X, dtype=float)
    if pts.size == 0:
        raise UsageError("empty sampling window")
    G = omega * np.sinc(omega * (pts[:, None] - pts[None, :]))
    G = 0.5 * (G + G.T)
    lo = np.linalg.eigvalsh(G)[0]
    if lo < -psd_tol * max(1.0, omega * pts.size):
        raise UsageError(f"Gram matrix is not positive semi-definite (min eigenvalue {lo:.3e})")
    G.setflags(write=False)
    return GramMatrix(G, float(omega), pts)


def analyze(f, X):
    """Samples ``(f(x_k))_k`` of a signal on the sampling window."""
    pts = X.points if isinstance(X, SeparatedSet) else np.asarray(X, dtype=float)
    return np.asarray(f(pts))


def synthesize(c, X, omega):
    """``sum_k c_k * omega * sinc(omega (. - x_k))``: the adjoint of :func:`analyze`."""
    pts = X.points if isinstance(X, SeparatedSet) else np.asarray(X, dtype=float)
    c = np.asarray(c)
    if c.shape != pts.shape:
        raise UsageError("coefficient and point counts differ")
    return BandlimitedSignal(omega, pts, c)


@dataclass(frozen=True)
class NyquistModel:
    """Finite-dimensional subspace of PW_omega spanned by Nyquist-rate kernels.

    The kernels ``k_m(x) = omega sinc(omega x - m)`` at ``m / omega`` are
    mutually orthogonal with squared norm ``omega``; the model uses the
    orthonormal basis ``k_m / sqrt(omega)`` so coordinate vectors carry the
    L2 norm of the signal.
    """

    omega: float
    indices: np.ndarray

    @classmethod
    def covering(cls, omega, lo, hi):
        m = np.arange(int(np.ceil(lo * omega - 1e-12)), int(np.floor(hi * omega + 1e-12)) + 1)
        if m.size == 0:
            raise UsageError("model support contains no Nyquist point")
        return cls(float(omega), m)

    @classmethod
    def for_window(cls, X, omega, fraction=0.5):
        """Model supported on the central ``fraction`` of the window span."""
        c = 0.5 * (X.points[0] + X.points[-1])
        half = 0.5 * fraction * X.span
        return cls.covering(omega, c - half, c + half)

    @property
    def centers(self):
        return self.indices / self.omega

    @property
    def dim(self):
        return self.indices.size

    def basis(self, points):
        pts = points.points if isinstance(points, SeparatedSet) else np.asarray(points, dtype=float)
        return np.sqrt(self.omega) * np.sinc(self.omega * pts[:, None] - self.indices[None, :])

    def signal(self, b):
        """Signal with orthonormal coordinates ``b``."""
        b = np.asarray(b)
        return BandlimitedSignal(self.omega, self.centers, b / np.sqrt(self.omega))

    def coords(self, f):
        """Coordinates of the orthogonal projection of ``f`` onto the model."""
        return np.asarray(f(self.centers)) / np.sqrt(self.omega)

    def contains(self, f, tol=1e-12):
        b = self.coords(f)
        return abs(f.norm() ** 2 - float(np.sum(np.abs(b) ** 2))) <= tol * max(1.0, f.norm() ** 2)


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    window: int
    model_dim: int
    method: str = "nyquist-model singular values"
    note: str = field(
        default="finite-window surrogate: samples outside the window are missing, "
        "so both bounds are biased low relative to the bi-infinite set"
    )


def frame_bounds_estimate(X, omega, model=None):
    """Frame bounds of ``X`` restricted to a finite Nyquist model of PW_omega.

    ``A`` and ``B`` are the extreme squared singular values of the sampling
    matrix in the model's orthonormal basis, i.e. the optimal constants in
    ``A ||f||^2 <= sum_k |f(x_k)|^2 <= B ||f||^2`` for every model signal.
    """
    if len(X) < 2:
        raise UsageError("frame bounds need at least two sampling points")
    if model is None:
        model = NyquistModel.for_window(X, omega)
    s = np.linalg.svd(model.basis(X), compute_uv=False)
    lower = float(s[-1] ** 2) if model.dim <= len(X) else 0.0
    return FrameBounds(lower, float(s[0] ** 2), len(X), model.dim)


@dataclass(frozen=True)
class ProjectionOperator:
    """Range projection ``alpha sinc(alpha (j-k))`` of the grid ``alpha Z`` (unit bandwidth).

    ``window`` is the closed index range on which results are reported and
    ``guard`` the minimal ratio of window length to input support length.
    """

    alpha: float
    window: tuple[int, int]
    guard: float = 4.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise UsageError("alpha must lie in (0, 1]")
        if self.window[1] < self.window[0]:
            raise UsageError("empty window")

    @classmethod
    def centered(cls, alpha, length, guard=4.0):
        return cls(float(alpha), (-(length // 2), length - 1 - length // 2), guard)

    @property
    def length(self):
        return self.window[1] - self.window[0] + 1

    def kernel(self, lags):
        return self.alpha * np.sinc(self.alpha * np.asarray(lags, dtype=float))

    def matrix(self):
        idx = np.arange(self.length)
        return self.kernel(idx[:, None] - idx[None, :])


@dataclass(frozen=True)
class ProjectionResult:
    values: np.ndarray
    window: tuple[int, int]
    tail_norm: float


def projection_quadratic_form(c, alpha):
    """``<P_alpha c, c> = ||P_alpha c||^2`` for a finitely supported ``c`` (exact finite sum)."""
    c = np.asarray(c)
    idx = np.arange(c.size)
    T = alpha * np.sinc(alpha * (idx[:, None] - idx[None, :]))
    return float(np.real(np.conj(c) @ T @ c))


def projection_apply(P, c, start=0):
    """Apply the bi-infinite projection to a finitely supported sequence.

    Returns the values on ``P.window`` and the exact l2 norm of the part of
    ``P c`` falling outside the window.
    """
    c = np.asarray(c)
    lo, hi = P.window
    s0, s1 = start, start + c.size - 1
    if s0 <= lo or s1 >= hi:
        raise UsageError(f"support [{s0}, {s1}] touches the window edge [{lo}, {hi}]")
    if P.length < P.guard * c.size:
        raise UsageError(f"window of length {P.length} is shorter than {P.guard:g} x support {c.size}")
    k = np.arange(lo, hi + 1)
    j = np.arange(s0, s1 + 1)
    vals = P.kernel(k[:, None] - j[None, :]) @ c
    total = projection_quadratic_form(c, P.alpha)
    inside = float(np.sum(np.abs(vals) ** 2))
    tail = float(np.sqrt(max(total - inside, 0.0)))
    return ProjectionResult(vals, P.window, tail)


def flip_signs(c, start=0):
    """``(U c)_k = (-1)^k c_k``."""
    c = np.asarray(c)
    k = np.arange(start, start + c.size)
    return np.where(k % 2 == 0, 1, -1) * c


def spectrum_eval(c, t, start=0, bits=None):
    """Fourier series ``sum_k c_k exp(-2 pi i k t)``.

    With ``bits`` set, the sum runs in that many bits of working precision
    (useful for integer sequences whose terms cancel heavily); the result is
    still returned as a Python/numpy complex.
    """
    c = np.asarray(c)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    k = np.arange(start, start + c.size)
    if bits is None:
        out = np.exp(-2j * np.pi * np.outer(t_arr, k)) @ c
    else:
        out = np.array([_spectrum_mp(c, k, tt, bits) for tt in t_arr])
    return out.item() if np.ndim(t) == 0 else out


def _mp_components(c):
    if c.dtype.kind in "iuO":
        return [int(v) for v in c.tolist()], None
    if np.iscomplexobj(c):
        return np.real(c).tolist(), np.imag(c).tolist()
    return c.tolist(), None


def _spectrum_mp_parts(c, k, tt):
    import gmpy2

    pi2 = 2 * gmpy2.const_pi()
    t = gmpy2.mpfr(float(tt))
    re = gmpy2.mpfr(0)
    im = gmpy2.mpfr(0)
    creal, cimag = _mp_components(c)
    for i, kk in enumerate(k.tolist()):
        ang = pi2 * kk * t
        cs, sn = gmpy2.cos(ang), gmpy2.sin(ang)
        re += creal[i] * cs
        im -= creal[i] * sn
        if cimag is not None and cimag[i]:
            re += cimag[i] * sn
            im += cimag[i] * cs
    return re, im


def _spectrum_mp(c, k, tt, bits):
    with _mp.precision(bits):
        re, im = _spectrum_mp_parts(c, k, tt)
        return complex(float(re), float(im))


def _gl_nodes(lo, hi, degree, nodes_per_panel=24):
    panels = max(1, int(np.ceil((hi - lo) * max(degree, 1))))
    x, w = leggauss(nodes_per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def band_energy(c, band_halfwidth, start=0, bits=None):
    """``int_{-w}^{w} |c^(t)|^2 dt`` by composite Gauss-Legendre quadrature.

    Panels are sized so that each holds at most one period of the highest
    frequency present in ``|c^|^2``.  ``bits`` switches the evaluation of the
    Fourier series (not the quadrature rule) to multiprecision.
    """
    w = float(band_halfwidth)
    if not 0 < w <= 0.5:
        raise UsageError("band half-width must lie in (0, 1/2]")
    c = np.asarray(c)
    if c.size == 0:
        return 0.0
    nodes, weights = _gl_nodes(-w, w, c.size - 1)
    k = np.arange(start, start + c.size)
    if bits is None:
        vals = np.abs(np.exp(-2j * np.pi * np.outer(nodes, k)) @ c) ** 2
        return float(weights @ vals)
    with _mp.precision(bits):
        import gmpy2

        total = gmpy2.mpfr(0)
        for tt, ww in zip(nodes.tolist(), weights.tolist()):
            re, im = _spectrum_mp_parts(c, k, tt)
            total += gmpy2.mpfr(ww) * (re * re + im * im)
        return float(total)
