import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from pconvex.mathkit import (
    CholFactor,
    NotPositiveDefinite,
    RngStream,
    betainc,
    chi2_cdf,
    cholesky,
    f_cdf,
    gammainc_lower,
    sample_mvn,
    sample_mvt,
    sample_sphere_direction,
    sample_std_normal_vec,
    sample_wishart,
    smw_update,
    spd_inverse,
    spd_solve,
)

from conftest import random_spd


# ---------------------------------------------------------------------------
# cholesky / solves


def test_cholesky_identity():
    f = cholesky(np.eye(3))
    assert np.array_equal(f.lower, np.eye(3))
    assert not f.jittered


def test_cholesky_reconstructs_2x2():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    f = cholesky(a)
    assert np.allclose(f.lower @ f.lower.T, a, rtol=0, atol=1e-12)
    assert np.allclose(np.triu(f.lower, 1), 0.0)


def test_cholesky_indefinite_raises():
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_cholesky_rejects_asymmetric_and_nonsquare():
    with pytest.raises(ValueError):
        cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        cholesky(np.ones((2, 3)))


def test_cholesky_jitter_rescues_semidefinite():
    v = np.array([1.0, 2.0, 3.0])
    f = cholesky(np.outer(v, v))
    assert f.jittered
    assert np.linalg.norm(f.reconstruct() - np.outer(v, v)) / np.linalg.norm(np.outer(v, v)) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_cholesky_roundtrip_random(dim, seed):
    a = random_spd(np.random.default_rng(seed), dim, eps=1e-3)
    f = cholesky(a)
    assert np.linalg.norm(f.lower @ f.lower.T - a) / np.linalg.norm(a) < 1e-9


def test_logdet_matches_numpy():
    a = random_spd(np.random.default_rng(0), 5)
    assert cholesky(a).logdet() == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-12)


def test_spd_solve_examples():
    assert np.allclose(spd_solve(cholesky(np.eye(2)), [1.0, 2.0]), [1.0, 2.0])
    assert np.allclose(spd_solve(cholesky(4 * np.eye(2)), [4.0, 8.0]), [1.0, 2.0])


def test_spd_solve_random_residual():
    gen = np.random.default_rng(1)
    a = random_spd(gen, 5)
    b = gen.standard_normal(5)
    x = spd_solve(cholesky(a), b)
    assert np.linalg.norm(a @ x - b) < 1e-9


def test_spd_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        spd_solve(cholesky(np.eye(3)), np.ones(2))


def test_spd_inverse_and_update():
    gen = np.random.default_rng(2)
    a, b = random_spd(gen, 4), random_spd(gen, 4)
    assert np.allclose(spd_inverse(cholesky(a)) @ a, np.eye(4), atol=1e-10)
    prec, cov, factor = smw_update(a, b)
    assert np.allclose(prec, a + b)
    assert np.allclose(cov @ (a + b), np.eye(4), atol=1e-10)
    assert isinstance(factor, CholFactor)


# ---------------------------------------------------------------------------
# special functions


def test_chi2_cdf_examples():
    for r in (1, 2, 5, 30):
        assert chi2_cdf(0.0, r) == 0.0
    assert chi2_cdf(2.0, 2) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    # independent oracle: adaptive quadrature of the chi2_1 density
    dens = lambda t: t ** -0.5 * math.exp(-t / 2) / math.sqrt(2 * math.pi)
    val, _ = integrate.quad(dens, 0, 1)
    assert chi2_cdf(1.0, 1) == pytest.approx(val, abs=1e-9)
    assert chi2_cdf(1.0, 1) == pytest.approx(0.682689, abs=1e-6)


def test_chi2_cdf_two_dof_closed_form():
    for t in np.linspace(0, 50, 501):
        assert abs(chi2_cdf(t, 2) - (1 - math.exp(-t / 2))) < 1e-12


@pytest.mark.parametrize("r", [1, 2, 3, 7, 10, 25, 93])
def test_chi2_cdf_against_scipy(r):
    for t in [0.01, 0.5, 1, 3, 10, 40, 150]:
        assert chi2_cdf(t, r) == pytest.approx(stats.chi2.cdf(t, r), abs=1e-12)


def test_gammainc_against_scipy():
    from scipy import special

    for a in [0.5, 1, 2.5, 10, 60]:
        for x in [0.0, 0.1, 1, 5, 30, 100]:
            assert gammainc_lower(a, x) == pytest.approx(special.gammainc(a, x), abs=1e-12)


def test_betainc_against_scipy():
    from scipy import special

    for a, b in [(0.5, 0.5), (1, 3), (2.5, 7), (30, 2), (5, 5e5)]:
        for x in [0.0, 1e-6, 0.1, 0.5, 0.9, 1.0]:
            assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-12)


def test_f_cdf_examples():
    assert f_cdf(0.0, 3, 5) == 0.0
    for x in [0.2, 1.0, 3.7]:
        for a, b in [(1, 4), (3, 7), (10, 2)]:
            assert f_cdf(x, a, b) == pytest.approx(1 - f_cdf(1 / x, b, a), abs=1e-12)
    assert abs(f_cdf(1.0, 1, 1e6) - chi2_cdf(1.0, 1)) < 1e-3
    assert f_cdf(math.inf, 2, 3) == 1.0


@pytest.mark.parametrize("d1,d2", [(1, 1), (2, 5), (6, 10), (12, 3)])
def test_f_cdf_against_scipy(d1, d2):
    for x in [0.05, 0.5, 1, 2, 8, 50]:
        assert f_cdf(x, d1, d2) == pytest.approx(stats.f.cdf(x, d1, d2), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100), st.integers(1, 40), st.integers(1, 40))
def test_cdfs_monotone_and_bounded(x, y, d1, d2):
    lo, hi = min(x, y), max(x, y)
    for fn in (lambda t: chi2_cdf(t, d1), lambda t: f_cdf(t, d1, d2)):
        a, b = fn(lo), fn(hi)
        assert 0.0 <= a <= b <= 1.0


# ---------------------------------------------------------------------------
# streams and samplers


def test_stream_determinism_and_independence():
    a = RngStream(5, (1, 2)).standard_normal(10)
    b = RngStream(5).substream(1, 2).standard_normal(10)
    c = RngStream(5).substream(1, 3).standard_normal(10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RngStream(5).substream("x").stream_id == ("x",)


def test_substream_ignores_parent_consumption():
    s = RngStream(9)
    first = s.substream(4).uniform(size=3)
    s.uniform(size=100)
    assert np.array_equal(first, s.substream(4).uniform(size=3))


def test_std_normal_moments():
    s = RngStream(11)
    x = np.array([sample_std_normal_vec(s, 1)[0] for _ in range(100_000)])
    assert abs(x.mean()) < 4 / math.sqrt(1e5)
    assert abs(x.var() - 1) < 0.05
    assert np.array_equal(sample_std_normal_vec(RngStream(3, (1,)), 4), sample_std_normal_vec(RngStream(3, (1,)), 4))


def test_mvn_degenerate_and_shift():
    mean = np.array([1.0, -2.0])
    assert np.array_equal(sample_mvn(RngStream(0), mean, np.zeros((2, 2))), mean)
    f = cholesky(np.array([[2.0, 0.3], [0.3, 1.0]]))
    a = sample_mvn(RngStream(4), mean, f)
    b = sample_mvn(RngStream(4), np.zeros(2), f)
    assert np.allclose(a, mean + b, atol=1e-15)
    with pytest.raises(ValueError):
        sample_mvn(RngStream(0), np.zeros(3), f)


def test_mvn_covariance():
    cov = np.array([[2.0, 0.6], [0.6, 1.0]])
    f = cholesky(cov)
    s = RngStream(12)
    x = np.array([sample_mvn(s, np.zeros(2), f) for _ in range(100_000)])
    assert np.linalg.norm(np.cov(x.T) - cov) / np.linalg.norm(cov) < 0.05


def test_mvt_limits():
    assert np.array_equal(sample_mvt(RngStream(0), 3.0, [1.0, 2.0], np.zeros((2, 2))), [1.0, 2.0])
    s = RngStream(13)
    x = np.array([sample_mvt(s, 1e6, [0.0], np.eye(1))[0] for _ in range(10_000)])
    assert stats.kstest(x, stats.norm.cdf).pvalue > 0.01
    c = np.array([sample_mvt(s, 1.0, [0.0], np.eye(1))[0] for _ in range(100_000)])
    assert abs(np.median(c)) < 0.05
    with pytest.raises(ValueError):
        sample_mvt(s, 0.0, [0.0], np.eye(1))


def test_mvt_norm_is_f_distributed():
    r, dof = 4, 7.0
    s = RngStream(14)
    q = np.array([np.sum(sample_mvt(s, dof, np.zeros(r), np.eye(r)) ** 2) / r for _ in range(10_000)])
    assert stats.kstest(q, lambda v: np.array([f_cdf(t, r, dof) for t in np.atleast_1d(v)])).pvalue > 0.01


def test_wishart_moments_and_spd():
    scale = np.array([[1.0, 0.4], [0.4, 2.0]])
    f = cholesky(scale)
    s = RngStream(15)
    draws = [sample_wishart(s, 5, f) for _ in range(10_000)]
    mean = np.mean(draws, axis=0)
    assert np.all(np.abs(mean - 5 * scale) <= 0.05 * np.abs(5 * scale))
    for w in draws[:200]:
        cholesky(w, jitter=0.0)
    one = np.array([sample_wishart(s, 3, np.eye(1))[0, 0] for _ in range(10_000)])
    assert stats.kstest(one, stats.chi2(3).cdf).pvalue > 0.01
    with pytest.raises(ValueError):
        sample_wishart(s, 1, f)


def test_sphere_direction():
    s = RngStream(16)
    for dim in (1, 2, 5, 40):
        z = sample_sphere_direction(s, dim)
        assert abs(np.linalg.norm(z) - 1) < 1e-12
    angles = np.array([math.atan2(*sample_sphere_direction(s, 2)) for _ in range(100_000)])
    counts, _ = np.histogram(angles, bins=36, range=(-math.pi, math.pi))
    assert stats.chisquare(counts).pvalue > 0.01
    assert np.array_equal(sample_sphere_direction(RngStream(1, (2,)), 3), sample_sphere_direction(RngStream(1, (2,)), 3))
