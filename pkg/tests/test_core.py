import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modfold import (
    BandlimitedSignal,
    DomainError,
    FoldedSamples,
    SeparatedSet,
    UsageError,
    density_report,
    eval_signal,
    fold,
    fold_counts,
    toral_dist,
    toral_seq_dist,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
lams = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)


def sinc_oracle(x):
    return 1.0 if x == 0 else math.sin(math.pi * x) / (math.pi * x)


# -- fold --------------------------------------------------------------------


def test_fold_examples():
    assert fold(0.3, 0.5) == 0.3
    assert fold(0.75, 0.5) == -0.25
    assert fold(0.75 + 0.3j, 0.5) == pytest.approx(-0.25 + 0.3j, abs=1e-15)


def test_fold_boundary_maps_to_minus_lambda():
    for lam in (0.5, 1.0, 0.125, 3.0):
        assert fold(lam, lam) == -lam
        assert fold(-lam, lam) == -lam
        assert fold(3 * lam, lam) == -lam


def test_fold_rejects_nonfinite_and_bad_threshold():
    with pytest.raises(DomainError):
        fold(float("nan"), 0.5)
    with pytest.raises(DomainError):
        fold(np.array([0.0, np.inf]), 0.5)
    with pytest.raises(DomainError):
        fold(0.1, 0.0)
    with pytest.raises(DomainError):
        fold(0.1, -1.0)


@given(finite, lams)
def test_fold_range_and_congruence(x, lam):
    y = fold(x, lam)
    assert -lam <= y < lam
    k = (x - y) / (2 * lam)
    assert abs(k - round(k)) <= 1e-9 * max(1.0, abs(k))


@given(finite, lams, st.integers(-1000, 1000))
def test_fold_periodic(x, lam, n):
    a, b = fold(x + 2 * lam * n, lam), fold(x, lam)
    # both sides are congruent; compare on the torus to absorb the boundary
    assert toral_dist(a, b, lam) <= 1e-12 * max(1.0, abs(x), abs(2 * lam * n))


@given(finite, finite, lams)
def test_fold_complex_componentwise(x, y, lam):
    z = fold(complex(x, y), lam)
    assert z.real == fold(x, lam)
    assert z.imag == fold(y, lam)


def test_fold_counts_reconstruct_input():
    x = np.array([-3.2, -0.4, 0.0, 0.9, 2.6])
    a = fold_counts(x, 0.5)
    np.testing.assert_allclose(fold(x, 0.5) + a, x, atol=1e-15)
    assert a.tolist() == [-3, 0, 0, 1, 3]


# -- toral metric ------------------------------------------------------------------


def test_toral_dist_examples():
    assert toral_dist(0.9, -0.9, 0.5) == pytest.approx(0.2, abs=1e-15)
    assert toral_dist(0.37, 0.37, 0.5) == 0.0
    assert toral_seq_dist([0.9], [-0.9], 0.5) == pytest.approx(0.2, abs=1e-15)
    assert toral_seq_dist([0.1, 0.2], [0.1, 0.2], 0.5) == 0.0


@given(finite, finite, lams)
def test_toral_dist_translation_and_symmetry(z, w, lam):
    d = toral_dist(z, w, lam)
    assert 0 <= d <= lam
    assert toral_dist(w, z, lam) == pytest.approx(d, abs=1e-9 * max(1, abs(z), abs(w)))
    assert toral_dist(z + 2 * lam, w, lam) == pytest.approx(d, abs=1e-9 * max(1, abs(z), abs(w)))


@settings(max_examples=50)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1), lams)
def test_toral_seq_dist_equals_fold_norm(n, seed, lam):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=5 * lam, size=n)
    b = rng.normal(scale=5 * lam, size=n)
    d = toral_seq_dist(a, b, lam)
    assert d == pytest.approx(np.linalg.norm(fold(a - b, lam)), abs=1e-12 * max(1, lam))
    assert d <= np.linalg.norm(a - b) + 1e-12


def test_toral_seq_dist_length_mismatch():
    with pytest.raises(UsageError):
        toral_seq_dist([0.1, 0.2], [0.1], 0.5)


def test_conditional_additivity_random_pairs():
    rng = np.random.default_rng(1)
    lam = rng.uniform(0.1, 5.0, size=20000)
    z = rng.uniform(-20, 20, size=lam.size) * lam
    w = rng.uniform(-20, 20, size=lam.size) * lam
    diff = fold(z, lam) - fold(w, lam)
    mask = np.abs(diff) < lam
    assert mask.sum() > 10000
    np.testing.assert_allclose(diff[mask], fold(z - w, lam)[mask], atol=1e-12 * 40)


# -- sampling sets ---------------------------------------------------------------------


def test_separated_set_validation():
    with pytest.raises(UsageError):
        SeparatedSet.from_points([0.0, 0.0, 1.0])
    with pytest.raises(UsageError):
        SeparatedSet(np.array([0.0, 0.1, 1.0]), 0.5)
    X = SeparatedSet.uniform(0.7, -3, 3)
    np.testing.assert_allclose(X.points, 0.7 * np.arange(-3, 4))
    assert X.is_uniform and len(X) == 7


def test_separated_set_roundtrip_json():
    X = SeparatedSet.uniform(0.5, -4, 5)
    assert SeparatedSet.from_dict(json.loads(json.dumps(X.to_dict()))).points.tolist() == X.points.tolist()
    Y = SeparatedSet.from_points([0.0, 0.4, 1.3])
    Z = SeparatedSet.from_dict(Y.to_dict())
    assert Z.points.tolist() == Y.points.tolist() and Z.separation == Y.separation


def test_jittered_set_separation():
    rng = np.random.default_rng(3)
    X = SeparatedSet.jittered(0.5, 200, 0.1, rng, 0.3)
    assert np.diff(X.points).min() >= 0.3
    assert np.max(np.abs(X.points - SeparatedSet.centered(0.5, 200).points)) <= 0.1


# -- signals -----------------------------------------------------------------------------


def test_eval_signal_examples():
    f = BandlimitedSignal.atom(1.0)
    assert eval_signal(f, 0.0) == 1.0
    assert abs(eval_signal(f, 3.0)) < 1e-16
    g = BandlimitedSignal.atom(1.0, 0.0, 0.9)
    assert eval_signal(g, 0.5) == pytest.approx(0.9 * sinc_oracle(0.5), rel=1e-15)
    assert eval_signal(g, 0.5) == pytest.approx(0.57296, abs=1e-5)


def test_signal_linearity_and_norm():
    rng = np.random.default_rng(7)
    c1, c2 = rng.normal(size=5), rng.normal(size=5)
    x = rng.uniform(-3, 3, size=5)
    f = BandlimitedSignal(1.3, x, c1)
    g = BandlimitedSignal(1.3, x, c2)
    t = rng.uniform(-5, 5, size=11)
    np.testing.assert_allclose((2.0 * f - g)(t), 2 * f(t) - g(t), atol=1e-13)
    # ||f||^2 = c^T G c with G_jk = omega sinc(omega (x_j - x_k))
    G = np.array([[1.3 * sinc_oracle(1.3 * (a - b)) for b in x] for a in x])
    assert f.norm() ** 2 == pytest.approx(c1 @ G @ c1, rel=1e-12)
    assert BandlimitedSignal.zero(1.0).norm() == 0.0


def test_signal_json_roundtrip():
    f = BandlimitedSignal(1.0, np.array([0.0, 0.5]), np.array([1.0 + 0.5j, -0.25]))
    g = BandlimitedSignal.from_dict(json.loads(f.to_json()))
    t = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(f(t), g(t))


def test_folded_samples_range_check():
    FoldedSamples(0.5, [-0.5, 0.0, 0.499])
    with pytest.raises(DomainError):
        FoldedSamples(0.5, [0.5])
    with pytest.raises(DomainError):
        FoldedSamples(0.5, [0.1 + 0.6j])


# -- density -----------------------------------------------------------------------------


def direct_min_rate(pts, r, step):
    # brute-force oracle on a fine grid of window centres
    ts = np.arange(pts[0] + r, pts[-1] - r + step / 2, step)
    counts = [np.sum((pts >= t - r) & (pts <= t + r)) for t in ts]
    return min(counts) / (2 * r)


def test_density_uniform_grid():
    X = SeparatedSet.uniform(0.7, -100, 100)
    d = density_report(X, 35.0)
    assert d.min_count_rate == pytest.approx(1 / 0.7, abs=1 / 70 + 1e-12)
    assert d.separation == pytest.approx(0.7)


def test_density_integers_closed_windows():
    X = SeparatedSet.uniform(1.0, -50, 50)
    d = density_report(X, 10.0)
    assert d.min_count_rate == pytest.approx(20 / 20)
    assert d.max_count_rate == pytest.approx(21 / 20)


def test_density_gap_lowers_rate():
    X = SeparatedSet.uniform(0.7, -100, 100)
    r = 10.0
    full = density_report(X, r)
    gap = density_report(X.without([100]), r)
    assert gap.min_count_rate == pytest.approx(full.min_count_rate - 1 / (2 * r))
    assert gap.min_count_rate == pytest.approx(direct_min_rate(X.without([100]).points, r, 0.001))


def test_density_rejects_large_radius():
    with pytest.raises(UsageError):
        density_report(SeparatedSet.uniform(1.0, 0, 10), 6.0)
