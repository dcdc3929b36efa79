"""Experiment pipelines producing CSV/JSON artifacts for the figures and tables.

A config is one JSON document ``{"kind": ..., "params": {...}, "seed": ...}``.
Parameters are validated against the kind's schema before any computation;
errors name the offending field path.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .certificates import (
    binomial_bound,
    binomial_certificate,
    chebyshev_certificate,
    critical_function,
    instability_witness,
    svp_certificate,
)
from .core import BandlimitedSignal, SeparatedSet, density_report
from .exceptions import UsageError
from .prolate import minkowski_bound, plunge_fit, prolate_matrix, spectrum
from .unfolding import UnfoldConfig, fold_samples, stability_probe, unfold

__all__ = ["KINDS", "ExperimentConfig", "RunManifest", "load_config", "plan", "run", "render_plotdata"]

SEED_MAX = 2**64 - 1


# -- schema ----------------------------------------------------------------------


def _num(lo=None, hi=None, open_lo=True, open_hi=True, integer=False):
    def check(path, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
            raise UsageError(f"{path}: expected {'an integer' if integer else 'a number'}, got {v!r}")
        if not math.isfinite(v):
            raise UsageError(f"{path}: must be finite")
        if lo is not None and (v <= lo if open_lo else v < lo):
            raise UsageError(f"{path}: must be {'>' if open_lo else '>='} {lo}, got {v}")
        if hi is not None and (v >= hi if open_hi else v > hi):
            raise UsageError(f"{path}: must be {'<' if open_hi else '<='} {hi}, got {v}")
        return v

    return check


def _int_list(lo=1):
    def check(path, v):
        if isinstance(v, int) and not isinstance(v, bool):
            v = [v]
        if not isinstance(v, list) or not v:
            raise UsageError(f"{path}: expected a non-empty list of integers")
        for i, x in enumerate(v):
            _num(lo, None, open_lo=False, integer=True)(f"{path}[{i}]", x)
        if any(b <= a for a, b in zip(v, v[1:])):
            raise UsageError(f"{path}: must be strictly increasing")
        return v

    return check


def _num_list(lo=None, hi=None):
    def check(path, v):
        if not isinstance(v, list) or not v:
            raise UsageError(f"{path}: expected a non-empty list of numbers")
        return [_num(lo, hi)(f"{path}[{i}]", x) for i, x in enumerate(v)]

    return check


def _choice(*opts):
    def check(path, v):
        if v not in opts:
            raise UsageError(f"{path}: must be one of {list(opts)}, got {v!r}")
        return v

    return check


def _set(path, v):
    if not isinstance(v, dict):
        raise UsageError(f"{path}: expected an object")
    try:
        return SeparatedSet.from_dict(v)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _signal(path, v):
    if not isinstance(v, dict):
        raise UsageError(f"{path}: expected an object")
    try:
        return BandlimitedSignal.from_dict(v)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise UsageError(f"{path}: {exc}") from None


_alpha = _num(0, 1)
_pos = _num(0)

SCHEMAS = {
    "decay_curve": {
        "alpha": (_alpha, 0.7),
        "N_min": (_num(1, None, open_lo=False, integer=True), 1),
        "N_max": (_num(1, None, open_lo=False, integer=True), 30),
        "panels": (_int_list(2), [4, 6, 8]),
        "lambda": (_pos, 0.5),
    },
    "prolate_spectrum": {
        "alpha": (_alpha, 0.5),
        "N": (_int_list(1), [32, 64, 128]),
        "epsilon": (_pos, 0.1),
    },
    "svp_compare": {
        "alpha": (_num_list(0, 1), [0.6, 0.7, 0.8]),
        "N_max": (_num(1, 14, open_lo=False, open_hi=False, integer=True), 10),
        "bound": (_num(1, 3, open_lo=False, open_hi=False, integer=True), 3),
        "coeff_bound": (_num(1, 5, open_lo=False, open_hi=False, integer=True), 2),
    },
    "witness": {
        "alpha": (_alpha, 0.7),
        "lambda": (_pos, 0.5),
        "target": (_pos, 1e-3),
        "floor": (_pos, 1.0),
        "N_max": (_num(1, 400, open_lo=False, open_hi=False, integer=True), 60),
    },
    "unfold_demo": {
        "signal": (_signal, {"omega": 1.0, "atoms": [[0.0, 0.9, 0.0]]}),
        "X": (_set, {"alpha": 0.5, "range": [-128, 127]}),
        "lambda": (_pos, 0.5),
        "energy_bound": (_pos, 1.0),
        "trials": (_num(0, None, open_lo=False, integer=True), 0),
        "probe_energy_bound": (_pos, 0.7),
    },
    "density_scan": {
        "X": (_set, {"alpha": 0.7, "range": [-100, 100]}),
        "r": (_num_list(0), [5.0, 10.0, 20.0, 35.0]),
        "remove": (lambda p, v: _int_list(0)(p, v) if v else [], []),
    },
}
KINDS = tuple(SCHEMAS)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: dict
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, d, kind=None, seed=None):
        if not isinstance(d, dict):
            raise UsageError("config: expected a JSON object")
        k = d.get("kind", kind)
        if kind is not None and k != kind:
            raise UsageError(f"kind: config says {k!r} but subcommand is {kind!r}")
        _choice(*KINDS)("kind", k)
        unknown = set(d) - {"kind", "params", "seed"}
        if unknown:
            raise UsageError(f"config: unknown top-level field(s) {sorted(unknown)}")
        params = d.get("params", {})
        if not isinstance(params, dict):
            raise UsageError("params: expected an object")
        schema = SCHEMAS[k]
        extra = set(params) - set(schema)
        if extra:
            raise UsageError(f"params.{sorted(extra)[0]}: unknown field for kind {k!r}")
        merged = {}
        for name, (check, default) in schema.items():
            merged[name] = params.get(name, default)
            check(f"params.{name}", merged[name])
        s = d.get("seed", 0) if seed is None else seed
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s <= SEED_MAX:
            raise UsageError(f"seed: expected an integer in [0, 2^64), got {s!r}")
        if k == "decay_curve" and merged["N_max"] < merged["N_min"]:
            raise UsageError("params.N_max: must be >= params.N_min")
        return cls(k, merged, s, d)

    def parsed(self, name):
        check, _ = SCHEMAS[self.kind][name]
        return check(f"params.{name}", self.params[name])

    def to_dict(self):
        return {"kind": self.kind, "params": self.params, "seed": self.seed}


def load_config(path, kind=None, seed=None):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config: file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(d, kind, seed)


@dataclass
class RunManifest:
    config: dict
    version: str
    timestamp: str
    outputs: list = field(default_factory=list)
    stage_seconds: dict = field(default_factory=dict)
    platform: str = field(default_factory=platform.platform)

    def to_dict(self):
        """Reproducible part: identical for identical config and seed."""
        return {"config": self.config, "version": self.version, "outputs": self.outputs}

    def log_text(self):
        """Volatile run metadata (wall clock, platform, timings)."""
        lines = [f"timestamp {self.timestamp}", f"platform {self.platform}"]
        lines += [f"stage {k} {v:.6f}s" for k, v in self.stage_seconds.items()]
        return "\n".join(lines) + "\n"


# -- output helpers -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


# -- stages ---------------------------------------------------------------------------


def _decay_curve(cfg, out):
    p = cfg.params
    alpha = p["alpha"]
    rows = []
    for N in range(p["N_min"], p["N_max"] + 1):
        c = binomial_certificate(N, alpha)
        norm_p = math.sqrt(max(c.norm2() - c.residual**2, 0.0))
        rows.append((N, norm_p, c.residual, binomial_bound(N, alpha)))
    path = os.path.join(out, "decay.csv")
    _write_csv(path, ["N", "norm_Pm", "residual", "bound"], rows)
    files = [path]
    Ns = np.array([r[0] for r in rows], dtype=float)
    slope = float(np.polyfit(Ns, np.log([r[2] for r in rows]), 1)[0]) if len(rows) > 1 else None
    summary = {
        "alpha": alpha,
        "fitted_log_slope": slope,
        "predicted_log_ratio": math.log(2 * math.sin(0.5 * math.pi * (1 - alpha))),
        "tail_log_ratio": math.log(rows[-1][2] / rows[-2][2]) if len(rows) > 1 else None,
    }
    spath = os.path.join(out, "decay_summary.json")
    _write_json(spath, summary)
    files.append(spath)
    for N in p["panels"]:
        cf = critical_function(binomial_certificate(N, alpha), p["lambda"])
        lo, hi = cf.window
        x = np.linspace(alpha * lo, alpha * hi, 40 * (hi - lo) + 1)
        fx = cf.signal(x)
        ppath = os.path.join(out, f"critical_N{N}.csv")
        _write_csv(ppath, ["x", "f_N"], zip(x, fx))
        spath = os.path.join(out, f"critical_N{N}_samples.csv")
        _write_csv(spath, ["x", "sample"], zip(alpha * np.arange(lo, hi + 1), cf.samples))
        files += [ppath, spath]
    return files


def _prolate_spectrum(cfg, out):
    p = cfg.params
    files = []
    reports = []
    if len(p["N"]) > 1:
        slope, reports = plunge_fit(p["alpha"], p["N"], p["epsilon"])
    else:
        reports = [spectrum(prolate_matrix(p["alpha"], p["N"][0]), p["epsilon"])]
        slope = None
    for r in reports:
        path = os.path.join(out, f"spectrum_N{r.N}.csv")
        r.to_csv(path)
        files.append(path)
    spath = os.path.join(out, "spectrum_summary.json")
    _write_json(spath, {"fitted_decay_rate": slope, "fit_window": p["N"], "reports": [r.summary() for r in reports]})
    return files + [spath]


def _svp_compare(cfg, out):
    p = cfg.params
    rows = []
    for alpha in p["alpha"]:
        for N in range(1, p["N_max"] + 1):
            bf = svp_certificate(alpha, N, "bruteforce", p["bound"])
            ll = svp_certificate(alpha, N, "lll")
            ex = svp_certificate(alpha, N, "exact")
            bi = binomial_certificate(N - 1, alpha).residual if N >= 2 else bf.residual
            ch = chebyshev_certificate((N - 1) // 2, alpha, p["coeff_bound"]).residual if N >= 3 else bi
            mk = minkowski_bound(prolate_matrix(1 - alpha, N))
            rows.append((alpha, N, bf.residual, ll.residual, ex.residual, bi, ch, mk))
    path = os.path.join(out, "svp.csv")
    _write_csv(path, ["alpha", "N", "bruteforce", "lll", "exact", "binomial", "chebyshev", "minkowski"], rows)
    return [path]


def _witness(cfg, out):
    p = cfg.params
    cf = instability_witness(p["alpha"], p["lambda"], p["target"], p["floor"], range(1, p["N_max"] + 1))
    path = os.path.join(out, "witness.json")
    _write_json(path, cf.to_dict())
    return [path]


def _unfold_demo(cfg, out):
    p = cfg.params
    f = cfg.parsed("signal")
    X = cfg.parsed("X")
    ucfg = UnfoldConfig(p["lambda"], p["energy_bound"], f.omega, X)
    rep = unfold(fold_samples(f, X, p["lambda"]), ucfg)
    truth = ucfg.model.coords(f)
    d = rep.to_dict()
    d["relative_error"] = float(np.linalg.norm(rep.coords - truth) / max(np.linalg.norm(truth), 1e-300))
    d["config"] = ucfg.to_dict()
    path = os.path.join(out, "unfold_report.json")
    _write_json(path, d)
    files = [path]
    if p["trials"] > 0:
        pcfg = UnfoldConfig(p["lambda"], p["probe_energy_bound"], f.omega, X)
        tab = stability_probe(pcfg, p["trials"], cfg.seed)
        spath = os.path.join(out, "stability.csv")
        tab.to_csv(spath)
        files.append(spath)
    return files


def _density_scan(cfg, out):
    p = cfg.params
    X = cfg.parsed("X")
    if p["remove"]:
        X = X.without(p["remove"])
    rows = []
    for r in p["r"]:
        d = density_report(X, r)
        rows.append((r, d.min_count_rate, d.max_count_rate, d.separation, d.argmin_center))
    path = os.path.join(out, "density.csv")
    _write_csv(path, ["r", "min_count_rate", "max_count_rate", "separation", "argmin_center"], rows)
    return [path]


STAGES = {
    "decay_curve": [("binomial residuals and critical functions", _decay_curve)],
    "prolate_spectrum": [("multiprecision spectra and plunge fit", _prolate_spectrum)],
    "svp_compare": [("brute force, LLL and exact SVP against explicit constructions", _svp_compare)],
    "witness": [("search for a critical function meeting the targets", _witness)],
    "unfold_demo": [("fold, unfold and stability probe", _unfold_demo)],
    "density_scan": [("finite-window density reports", _density_scan)],
}


def plan(cfg):
    """Planned stage names, for dry runs."""
    return [name for name, _ in STAGES[cfg.kind]]


def run(cfg, out_dir):
    """Run all stages of an experiment and write ``manifest.json`` into ``out_dir``.

    Every CSV and JSON output, the manifest included, depends only on the
    config and seed.  The timestamp and stage timings go to ``run.log``.
    """
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(cfg.to_dict(), __version__, time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    for name, stage in STAGES[cfg.kind]:
        t0 = time.perf_counter()
        files = stage(cfg, out_dir)
        manifest.stage_seconds[name] = round(time.perf_counter() - t0, 6)
        manifest.outputs += [os.path.basename(f) for f in files]
    for f in manifest.outputs:
        path = os.path.join(out_dir, f)
        if not os.path.exists(path) or os.path.getsize(path) == 0:
            raise RuntimeError(f"stage output {f} missing or empty")
    _write_json(os.path.join(out_dir, "manifest.json"), manifest.to_dict())
    with open(os.path.join(out_dir, "run.log"), "w") as fh:
        fh.write(manifest.log_text())
    return manifest


# -- plot data --------------------------------------------------------------------------

_LOG_COLUMNS = {"residual", "bound", "norm_Pm", "mu_k", "bruteforce", "lll", "exact", "binomial", "chebyshev", "minkowski"}


def render_plotdata(csv_path, out_path=None):
    """Turn a result CSV into a plotting-tool-neutral JSON document.

    The first column is the x axis and every other numeric column a series.
    The y axis is logarithmic when any series is a residual, bound or
    eigenvalue column.
    """
    try:
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise UsageError(f"{csv_path}: no such file") from None
    if len(rows) < 2:
        raise UsageError(f"{csv_path}: CSV has no data rows")
    header, data = rows[0], rows[1:]
    if any(len(r) != len(header) for r in data):
        raise UsageError(f"{csv_path}: ragged rows")
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = [float(r[j]) for r in data]
        except ValueError:
            continue
    if header[0] not in cols or len(cols) < 2:
        raise UsageError(f"{csv_path}: need a numeric first column and at least one numeric series")
    series = {k: v for k, v in cols.items() if k != header[0] and k != "log_mu_k"}
    if header[0] == "k" and "mu_k" in series:
        log_y = False
    else:
        log_y = any(k in _LOG_COLUMNS for k in series)
    doc = {"x_label": header[0], "x": cols[header[0]], "series": series, "log_x": False, "log_y": log_y}
    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".plot.json"
    _write_json(out_path, doc)
    return out_path
