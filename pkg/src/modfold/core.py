"""Folding arithmetic, toral metric, sampling sets and sinc-atom signals.

Scalars are plain Python/numpy numbers: real mode uses floats, complex mode
uses complex values which are folded componentwise.  All containers are
immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, UsageError

__all__ = [
    "fold",
    "fold_counts",
    "toral_dist",
    "toral_seq_dist",
    "SeparatedSet",
    "BandlimitedSignal",
    "FoldedSamples",
    "DensityReport",
    "density_report",
    "eval_signal",
]


def _check_threshold(lam):
    if np.ndim(lam):
        arr = np.asarray(lam, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("folding thresholds must be positive finite numbers")
        return arr
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0:
        raise DomainError(f"folding threshold must be a positive finite number, got {lam!r}")
    return lam


def _fold_real(x, lam):
    two = 2.0 * lam
    r = x - np.floor(x / two + 0.5) * two
    # one correction step absorbs rounding in floor(); the clamp only fires
    # when r + 2*lam itself rounds onto +lam
    r = np.where(r >= lam, r - two, r)
    r = np.where(r < -lam, r + two, r)
    return np.where(r >= lam, -lam, r)


def fold(x, lam):
    """Centered folding of ``x`` into ``[-lam, lam)``.

    Complex input is folded componentwise.  The result is congruent to ``x``
    modulo ``2*lam`` (modulo ``2*lam*(Z + iZ)`` for complex input) and values
    with ``{x/(2 lam) + 1/2} = 0`` land exactly on ``-lam``.

    Parameters
    ----------
    x : scalar or array_like
        Finite real or complex values.
    lam : float or array_like
        Positive folding threshold (arrays broadcast against ``x``).

    Returns
    -------
    scalar or ndarray
        Same shape and kind (real/complex) as ``x``.
    """
    lam = _check_threshold(lam)
    arr = np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise DomainError("cannot fold non-finite values")
    if np.iscomplexobj(arr):
        out = _fold_real(arr.real.astype(float), lam) + 1j * _fold_real(arr.imag.astype(float), lam)
    else:
        out = _fold_real(arr.astype(float), lam)
    if np.ndim(x) == 0:
        return out.item()
    return out


def fold_counts(x, lam):
    """Integer (Gaussian-integer) counts ``n`` with ``x = fold(x) + 2*lam*n``."""
    lam = _check_threshold(lam)
    arr = np.asarray(x)
    n = (arr - np.asarray(fold(arr, lam))) / (2.0 * lam)
    if np.iscomplexobj(n):
        out = np.rint(n.real) + 1j * np.rint(n.imag)
    else:
        out = np.rint(n).astype(np.int64)
    if np.ndim(x) == 0:
        return out.item()
    return out


def toral_dist(z, w, lam):
    """Distance ``inf_n |z - w - 2 lam n|`` on the torus of period ``2 lam``."""
    d = np.abs(np.asarray(fold(np.asarray(z) - np.asarray(w), lam)))
    if np.ndim(d) == 0:
        return float(d)
    return d


def toral_seq_dist(a, b, lam):
    """Toral l2 distance between two equally long sample sequences."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise UsageError(f"sequence shapes differ: {a.shape} vs {b.shape}")
    d = np.abs(np.asarray(fold(a - b, lam)))
    return float(np.sqrt(np.sum(d**2)))


def _frozen(arr, dtype=None):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SeparatedSet:
    """Finite window of a uniformly separated set of sampling locations.

    Use :meth:`uniform`, :meth:`from_points` or :meth:`jittered` rather than
    calling the constructor directly.
    """

    points: np.ndarray
    separation: float
    alpha: float | None = None
    index_range: tuple[int, int] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise UsageError("a sampling set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("sampling locations must be finite")
        if not self.separation > 0:
            raise UsageError("separation must be positive")
        if pts.size > 1:
            gaps = np.diff(pts)
            if np.any(gaps <= 0):
                raise UsageError("sampling locations must be strictly increasing")
            if gaps.min() < self.separation * (1 - 1e-12):
                raise UsageError(
                    f"minimal gap {gaps.min():.6g} is below the declared separation {self.separation:.6g}"
                )
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def uniform(cls, alpha, kmin, kmax):
        """Points ``alpha*k`` for ``kmin <= k <= kmax``."""
        alpha = float(alpha)
        if not alpha > 0:
            raise UsageError("grid step must be positive")
        if kmax < kmin:
            raise UsageError("empty index range")
        k = np.arange(int(kmin), int(kmax) + 1)
        return cls(alpha * k, alpha, alpha, (int(kmin), int(kmax)))

    @classmethod
    def centered(cls, alpha, n):
        """Uniform window of ``n`` points ``alpha*k``, ``k = -(n//2) .. n-1-n//2``."""
        return cls.uniform(alpha, -(n // 2), n - 1 - n // 2)

    @classmethod
    def from_points(cls, points, separation=None):
        pts = np.sort(np.asarray(points, dtype=float))
        if separation is None:
            separation = float(np.diff(pts).min()) if pts.size > 1 else 1.0
        return cls(pts, float(separation))

    @classmethod
    def jittered(cls, alpha, n, jitter, rng, min_separation):
        """Centered uniform window with i.i.d. ``U(-jitter, jitter)`` displacements.

        Draws are repeated until the minimal gap is at least ``min_separation``.
        """
        base = cls.centered(alpha, n).points
        for _ in range(1000):
            pts = base + rng.uniform(-jitter, jitter, size=base.size)
            if np.diff(pts).min() >= min_separation:
                return cls(pts, float(min_separation))
        raise UsageError("could not draw a jittered set with the requested separation")

    @property
    def is_uniform(self):
        return self.alpha is not None

    def __len__(self):
        return self.points.size

    @property
    def span(self):
        return float(self.points[-1] - self.points[0])

    def without(self, indices):
        """The set with the given positional indices removed."""
        keep = np.ones(len(self), dtype=bool)
        keep[np.asarray(list(indices), dtype=int)] = False
        if not keep.any():
            raise UsageError("cannot remove every point")
        return SeparatedSet(self.points[keep], self.separation)

    def to_dict(self):
        if self.is_uniform:
            return {"alpha": self.alpha, "range": list(self.index_range)}
        return {"points": self.points.tolist(), "separation": self.separation}

    @classmethod
    def from_dict(cls, d):
        if "alpha" in d:
            kmin, kmax = d["range"]
            return cls.uniform(d["alpha"], kmin, kmax)
        if "points" in d:
            return cls.from_points(d["points"], d.get("separation"))
        raise UsageError("sampling set needs either 'alpha'+'range' or 'points'")


@dataclass(frozen=True)
class BandlimitedSignal:
    """Finite expansion ``f(x) = sum_j c_j * omega * sinc(omega * (x - x_j))``.

    Each atom is a reproducing kernel of the Paley-Wiener space of bandwidth
    ``omega``, so inner products and norms are exact finite sums.
    """

    omega: float
    centers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise DomainError("bandwidth must be positive and finite")
        centers = np.atleast_1d(np.asarray(self.centers, dtype=float))
        coeffs = np.atleast_1d(np.asarray(self.coeffs))
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        if centers.shape != coeffs.shape or centers.ndim != 1:
            raise UsageError("centers and coefficients must be 1-d and equally long")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(coeffs))):
            raise DomainError("atoms must be finite")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "centers", _frozen(centers))
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @classmethod
    def zero(cls, omega):
        return cls(omega, np.zeros(0), np.zeros(0))

    @classmethod
    def atom(cls, omega, center=0.0, coeff=1.0):
        return cls(omega, [center], [coeff])

    @property
    def is_real(self):
        return not np.iscomplexobj(self.coeffs) or not np.any(self.coeffs.imag)

    def kernel_matrix(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.omega * np.sinc(self.omega * (x[:, None] - self.centers[None, :]))

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        vals = self.kernel_matrix(x) @ self.coeffs if self.coeffs.size else np.zeros(np.size(x))
        return vals.item() if scalar else vals

    def gram(self):
        d = self.centers[:, None] - self.centers[None, :]
        return self.omega * np.sinc(self.omega * d)

    def inner(self, other):
        """L2 inner product ``<self, other>`` (linear in the first argument)."""
        self._same_band(other)
        d = self.centers[:, None] - other.centers[None, :]
        k = self.omega * np.sinc(self.omega * d)
        val = self.coeffs @ k @ np.conj(other.coeffs)
        return complex(val) if np.iscomplexobj(val) else float(val)

    def norm(self):
        if self.coeffs.size == 0:
            return 0.0
        q = np.real(np.conj(self.coeffs) @ self.gram() @ self.coeffs)
        return float(np.sqrt(max(q, 0.0)))

    def _same_band(self, other):
        if not isinstance(other, BandlimitedSignal):
            return NotImplemented
        if other.omega != self.omega:
            raise UsageError("signals live in different Paley-Wiener spaces")
        return True

    def __add__(self, other):
        if self._same_band(other) is NotImplemented:
            return NotImplemented
        return BandlimitedSignal(
            self.omega,
            np.concatenate([self.centers, other.centers]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __neg__(self):
        return BandlimitedSignal(self.omega, self.centers, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        if not np.isscalar(s):
            return NotImplemented
        return BandlimitedSignal(self.omega, self.centers, self.coeffs * s)

    __rmul__ = __mul__

    def simplified(self):
        """Merge atoms sharing a center; drop exact zeros."""
        if self.centers.size == 0:
            return self
        uc, inv = np.unique(self.centers, return_inverse=True)
        c = np.zeros(uc.size, dtype=self.coeffs.dtype)
        np.add.at(c, inv, self.coeffs)
        keep = c != 0
        return BandlimitedSignal(self.omega, uc[keep], c[keep])

    def to_dict(self):
        c = np.asarray(self.coeffs, dtype=complex)
        return {
            "omega": self.omega,
            "atoms": [[float(x), float(v.real), float(v.imag)] for x, v in zip(self.centers, c)],
        }

    @classmethod
    def from_dict(cls, d):
        atoms = np.asarray(d.get("atoms", []), dtype=float).reshape(-1, 3)
        coeffs = atoms[:, 1] + 1j * atoms[:, 2]
        if not np.any(atoms[:, 2]):
            coeffs = atoms[:, 1].copy()
        return cls(d["omega"], atoms[:, 0], coeffs)

    def to_json(self):
        return json.dumps(self.to_dict())


def eval_signal(f, x):
    """Evaluate ``f`` at ``x`` (scalar or array)."""
    return f(x)


@dataclass(frozen=True)
class FoldedSamples:
    """Folded sample values on a sampling set; every component in ``[-lam, lam)``."""

    threshold: float
    values: np.ndarray
    points: np.ndarray | None = None

    def __post_init__(self):
        lam = _check_threshold(self.threshold)
        vals = np.atleast_1d(np.asarray(self.values))
        parts = [vals.real, vals.imag] if np.iscomplexobj(vals) else [vals]
        for p in parts:
            if np.any(p < -lam) or np.any(p >= lam):
                raise DomainError("folded values must lie in [-lam, lam)")
        object.__setattr__(self, "threshold", lam)
        object.__setattr__(self, "values", _frozen(vals))
        if self.points is not None:
            object.__setattr__(self, "points", _frozen(np.asarray(self.points, dtype=float)))

    def __len__(self):
        return self.values.size

    def dist(self, other):
        """Toral l2 distance to another folded sequence with the same threshold."""
        if other.threshold != self.threshold:
            raise UsageError("thresholds differ")
        return toral_seq_dist(self.values, other.values, self.threshold)


@dataclass(frozen=True)
class DensityReport:
    min_count_rate: float
    max_count_rate: float
    separation: float
    r: float
    argmin_center: float


def density_report(X, r):
    """Finite-window lower density ``min_t #X∩[t-r, t+r] / 2r``.

    The infimum runs over window centres ``t`` for which the closed window
    stays inside the span of ``X``.  The count is piecewise constant in ``t``
    with jumps at ``x_k ± r``, so evaluating at every breakpoint and every
    midpoint between consecutive breakpoints gives the exact extremes.
    """
    r = float(r)
    if not r > 0:
        raise UsageError("window radius must be positive")
    pts = X.points
    lo, hi = pts[0] + r, pts[-1] - r
    if lo > hi:
        raise UsageError(f"window diameter {2 * r:g} exceeds the span {X.span:g} of the set")
    br = np.concatenate([pts - r, pts + r, [lo, hi]])
    br = np.unique(br[(br >= lo) & (br <= hi)])
    cand = np.concatenate([br, 0.5 * (br[1:] + br[:-1])]) if br.size > 1 else br
    counts = np.searchsorted(pts, cand + r, side="right") - np.searchsorted(pts, cand - r, side="left")
    i = int(np.argmin(counts))
    return DensityReport(
        min_count_rate=float(counts[i] / (2 * r)),
        max_count_rate=float(counts.max() / (2 * r)),
        separation=float(np.diff(pts).min()) if pts.size > 1 else float("inf"),
        r=r,
        argmin_center=float(cand[i]),
    )
