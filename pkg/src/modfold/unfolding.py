"""Recovery of bandlimited signals from folded samples under an energy bound.

Signals live in a finite Nyquist model of PW_omega covering the middle of the
sampling window, so the sampling operator is a tall matrix ``S`` with
orthonormal-coordinate columns.  Unfolding searches for integer fold counts
``a`` such that ``y + 2 lam a`` lies in the range of ``S``: a greedy pass
over the indices where the range residual concentrates, then exhaustive
enumeration over small supports.  The fold counts are nonzero only on the
peak set, whose size the energy bound limits.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BandlimitedSignal, FoldedSamples, SeparatedSet, density_report, fold, toral_seq_dist
from .exceptions import InfeasibleError, UsageError
from .frames import NyquistModel, frame_bounds_estimate

__all__ = [
    "UnfoldConfig",
    "RecoveryReport",
    "fold_samples",
    "peak_budget",
    "unfold",
    "reduced_lower_bound",
    "StabilityTable",
    "stability_probe",
    "random_model_signal",
]


@dataclass(frozen=True)
class UnfoldConfig:
    """Problem data for unfolding.

    ``max_peaks=None`` derives the budget from the energy bound; ``model``
    defaults to the Nyquist model on the central half of the window.
    """

    lam: float
    energy_bound: float
    omega: float
    X: SeparatedSet
    residual_tolerance: float = 1e-8
    max_peaks: int | None = None
    model: NyquistModel | None = None
    search_width: int = 3

    def __post_init__(self):
        if not self.lam > 0 or not self.energy_bound > 0 or not self.omega > 0:
            raise UsageError("lam, energy_bound and omega must be positive")
        if self.residual_tolerance <= 0:
            raise UsageError("residual_tolerance must be positive")
        if self.model is None:
            object.__setattr__(self, "model", NyquistModel.for_window(self.X, self.omega))
        if self.model.dim >= len(self.X):
            raise UsageError("model dimension must be smaller than the number of samples")
        if self.max_peaks is None:
            object.__setattr__(self, "max_peaks", peak_budget(self))

    @property
    def upper_frame_bound(self):
        return frame_bounds_estimate(self.X, self.omega, self.model).upper

    def sampling_matrix(self):
        return self.model.basis(self.X)

    def to_dict(self):
        return {
            "lambda": self.lam,
            "energy_bound": self.energy_bound,
            "omega": self.omega,
            "X": self.X.to_dict(),
            "residual_tolerance": self.residual_tolerance,
            "max_peaks": self.max_peaks,
            "model_indices": [int(self.model.indices[0]), int(self.model.indices[-1])],
        }


def peak_budget(cfg):
    """``ceil(lam^-2 B M^2)``: the most samples a signal of energy ``M`` can fold.

    Folding changes a sample by ``2 lam a_k`` with ``|a_k| >= 1`` on the peak
    set, and ``||a|| <= 2 sqrt(B) M / (2 lam)`` since both the raw and the
    folded samples have norm at most ``sqrt(B) M``.
    """
    B = frame_bounds_estimate(cfg.X, cfg.omega, cfg.model).upper
    x = B * cfg.energy_bound**2 / cfg.lam**2
    return max(0, int(math.ceil(x - 1e-9)))


def fold_samples(f, X, lam):
    """Folded samples ``(M_lam f(x_k))_k``."""
    pts = X.points if isinstance(X, SeparatedSet) else np.asarray(X, dtype=float)
    return FoldedSamples(lam, fold(f(pts), lam), pts)


def reduced_lower_bound(S, removed=()):
    """Lower frame bound of the sampling matrix with the rows ``removed`` dropped."""
    keep = np.ones(S.shape[0], dtype=bool)
    keep[list(removed)] = False
    s = np.linalg.svd(S[keep], compute_uv=False)
    return float(s[-1] ** 2) if keep.sum() >= S.shape[1] else 0.0


@dataclass(frozen=True)
class RecoveryReport:
    recovered: BandlimitedSignal
    coords: np.ndarray
    fold_counts: np.ndarray
    peak_set: tuple
    residual: float
    lipschitz_estimate: float
    reduced_lower_bound: float
    window: int
    energy: float
    flags: tuple = field(default_factory=tuple)

    @property
    def peaks_used(self):
        return len(self.peak_set)

    def to_dict(self):
        a = self.fold_counts
        counts = [[int(v.real), int(v.imag)] for v in a] if np.iscomplexobj(a) else [int(v) for v in a]
        return {
            "fold_counts": counts,
            "peak_set": [int(k) for k in self.peak_set],
            "peaks_used": self.peaks_used,
            "residual": self.residual,
            "lipschitz_estimate": self.lipschitz_estimate,
            "reduced_lower_bound": self.reduced_lower_bound,
            "window": self.window,
            "energy": self.energy,
            "flags": list(self.flags),
            "recovered": self.recovered.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


class _RangeTest:
    """Residual of ``y`` against the range of the sampling matrix."""

    def __init__(self, S):
        self.S = S
        self.Qo, _ = np.linalg.qr(S)
        self.lev = 1.0 - np.sum(self.Qo**2, axis=1)  # ||(I - Pi) e_k||^2

    def residual(self, y):
        return y - self.Qo @ (self.Qo.T @ y)

    def complement_columns(self, idx):
        E = np.zeros((self.S.shape[0], len(idx)))
        E[list(idx), np.arange(len(idx))] = 1.0
        return E - self.Qo @ (self.Qo.T @ E)


def _search(y, rt, two_lam, max_peaks, tol, width, max_combos=20000):
    """Integer corrections ``a`` with ``||(I-Pi)(y + two_lam a)|| <= tol``.

    Returns ``(a, residual_norm, tried)``; ``a`` is ``None`` on failure.
    """
    n = y.size
    a = np.zeros(n, dtype=int)
    r = rt.residual(y)
    best = (float(np.linalg.norm(r)), a.copy())
    if best[0] <= tol:
        return a, best[0], 0
    tried = 0
    if max_peaks == 0:
        return None, best[0], tried
    # greedy: each step adds the single integer correction that reduces the residual most
    for _ in range(max_peaks):
        lev = np.maximum(rt.lev, 1e-15)
        t = np.rint(-r / (two_lam * lev))
        # ||r + c u_k||^2 - ||r||^2 = 2 c r_k + c^2 lev_k for u_k = (I - Pi) e_k
        gain = -(2 * two_lam * t * r + (two_lam * t) ** 2 * lev)
        gain[t == 0] = -np.inf
        k = int(np.argmax(gain))
        if not gain[k] > 0:
            break
        a[k] += int(t[k])
        r = rt.residual(y + two_lam * a)
        tried += 1
        nr = float(np.linalg.norm(r))
        if nr < best[0]:
            best = (nr, a.copy())
        if nr <= tol:
            if np.count_nonzero(a) <= max_peaks:
                return a, nr, tried
            break
    # enumeration over supports among the indices where the residual concentrates
    r0 = rt.residual(y)
    score = np.abs(r0) / np.sqrt(np.maximum(rt.lev, 1e-15))
    m = min(n, 2 * max_peaks + 6)
    cand = np.argsort(-score, kind="stable")[:m]
    combos = 0
    for s in range(1, max_peaks + 1):
        for S in itertools.combinations(sorted(cand.tolist()), s):
            combos += 1
            if combos > max_combos:
                return None, best[0], tried
            U = rt.complement_columns(S)
            t_real, *_ = np.linalg.lstsq(two_lam * U, -r0, rcond=None)
            base = np.rint(t_real).astype(int)
            shifts = itertools.product((-1, 0, 1), repeat=s) if s <= 3 else [(0,) * s]
            for sh in shifts:
                t = base + np.array(sh, dtype=int)
                if not np.all(t) or np.max(np.abs(t)) > width:
                    continue
                tried += 1
                res = r0 + two_lam * (U @ t)
                nr = float(np.linalg.norm(res))
                if nr < best[0]:
                    cand_a = np.zeros(n, dtype=int)
                    cand_a[list(S)] = t
                    best = (nr, cand_a)
                if nr <= tol:
                    out = np.zeros(n, dtype=int)
                    out[list(S)] = t
                    return out, nr, tried
    return None, best[0], tried


def _unfold_real(y, cfg, rt):
    two_lam = 2.0 * cfg.lam
    tol = cfg.residual_tolerance * (1.0 + float(np.linalg.norm(y)))
    width = max(cfg.search_width, int(math.ceil(math.sqrt(cfg.upper_frame_bound) * cfg.energy_bound / two_lam)) + 1)
    a, res, tried = _search(y, rt, two_lam, cfg.max_peaks, tol, width)
    if a is None:
        raise InfeasibleError(
            f"no integer fold correction on at most {cfg.max_peaks} samples brings the residual "
            f"below {tol:.3e} (best {res:.3e}); the energy bound is likely violated",
            best_residual=res,
            peaks_tried=tried,
        )
    z = y + two_lam * a
    coords, *_ = np.linalg.lstsq(rt.S, z, rcond=None)
    resid = float(np.linalg.norm(rt.S @ coords - z))
    return a, coords, resid


def unfold(samples, cfg):
    """Recover a model signal from its folded samples.

    Raises :class:`InfeasibleError` when no admissible fold-count vector
    exists.  The report's ``flags`` record an energy above the bound and a
    reduced set whose density falls below ``omega``.
    """
    y = np.asarray(samples.values)
    if y.size != len(cfg.X):
        raise UsageError("sample count does not match the sampling set")
    if samples.threshold != cfg.lam:
        raise UsageError("samples were folded at a different threshold")
    S = cfg.sampling_matrix()
    rt = _RangeTest(S)
    if np.iscomplexobj(y):
        ar, cr, rr = _unfold_real(y.real.astype(float), cfg, rt)
        ai, ci, ri = _unfold_real(y.imag.astype(float), cfg, rt)
        a = ar + 1j * ai
        coords = cr + 1j * ci
        resid = math.hypot(rr, ri)
    else:
        a, coords, resid = _unfold_real(y.astype(float), cfg, rt)
    peaks = tuple(int(k) for k in np.flatnonzero(a))
    A_red = reduced_lower_bound(S, peaks)
    lip = 1.0 / math.sqrt(A_red) if A_red > 0 else math.inf
    energy = float(np.linalg.norm(coords))
    flags = []
    if energy > cfg.energy_bound * (1 + 1e-9):
        flags.append("energy_bound_exceeded")
    if A_red <= 0:
        flags.append("reduced_set_not_sampling")
    Xr = cfg.X.without(peaks) if peaks else cfg.X
    r = 0.25 * cfg.X.span
    if r > 0 and len(Xr) > 1 and 2 * r <= Xr.span and density_report(Xr, r).min_count_rate < cfg.omega:
        flags.append("reduced_density_below_bandwidth")
    return RecoveryReport(
        cfg.model.signal(coords), coords, a, peaks, resid, lip, A_red, len(cfg.X), energy, tuple(flags)
    )


def random_model_signal(model, radius, rng, spikes=3):
    """Random model signal of norm ``radius`` with a few dominant coordinates.

    Dominant coordinates make samples exceed the threshold often enough for
    folding to matter.
    """
    b = 0.2 * rng.standard_normal(model.dim)
    k = rng.integers(1, spikes + 1)
    b[rng.choice(model.dim, size=k, replace=False)] += rng.standard_normal(k) * 2.0
    b *= radius / np.linalg.norm(b)
    return b


@dataclass(frozen=True)
class StabilityTable:
    seed: int
    rows: tuple
    columns: tuple = (
        "trial",
        "toral_dist",
        "l2_error",
        "ratio",
        "lipschitz_estimate",
        "peaks_used",
        "recovery_error",
        "status",
    )

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in row])

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def stability_probe(cfg, trials, rng_seed):
    """Empirical Lipschitz ratios of the unfolding map on random pairs.

    For each trial two model signals ``f, g`` of norm in ``[M/2, M]`` are
    drawn, folded and unfolded.  ``l2_error`` is ``||f^ - g^||``, ``ratio``
    divides it by the toral distance of the folded samples, and
    ``lipschitz_estimate`` is ``A_{X minus F_h}^{-1/2}`` where ``F_h`` holds the
    samples with ``|h(x_k)| >= lam`` for ``h = f^ - g^``.  ``recovery_error``
    is the larger relative error of the two recoveries and ``status`` is
    ``ok``, ``inexact`` or ``infeasible``.
    """
    trials = int(trials)
    if trials < 1:
        raise UsageError("trials must be at least 1")
    rng = np.random.default_rng(rng_seed)
    S = cfg.sampling_matrix()
    rows = []
    for t in range(trials):
        bf = random_model_signal(cfg.model, cfg.energy_bound * rng.uniform(0.5, 1.0), rng)
        bg = random_model_signal(cfg.model, cfg.energy_bound * rng.uniform(0.5, 1.0), rng)
        yf = FoldedSamples(cfg.lam, fold(S @ bf, cfg.lam))
        yg = FoldedSamples(cfg.lam, fold(S @ bg, cfg.lam))
        d = toral_seq_dist(yf.values, yg.values, cfg.lam)
        try:
            rf, rg = unfold(yf, cfg), unfold(yg, cfg)
        except InfeasibleError:
            rows.append((t, d, math.nan, math.nan, math.nan, -1, math.nan, "infeasible"))
            continue
        err = max(
            np.linalg.norm(rf.coords - bf) / np.linalg.norm(bf),
            np.linalg.norm(rg.coords - bg) / np.linalg.norm(bg),
        )
        h = rf.coords - rg.coords
        Fh = np.flatnonzero(np.abs(S @ h) >= cfg.lam)
        A_red = reduced_lower_bound(S, Fh)
        lip = 1.0 / math.sqrt(A_red) if A_red > 0 else math.inf
        l2 = float(np.linalg.norm(h))
        ratio = l2 / d if d > 0 else (0.0 if l2 == 0 else math.inf)
        status = "ok" if err < 1e-6 else "inexact"
        rows.append((t, d, l2, ratio, lip, max(rf.peaks_used, rg.peaks_used), float(err), status))
    return StabilityTable(int(rng_seed), tuple(rows))
