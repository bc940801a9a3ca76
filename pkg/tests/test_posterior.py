import math

import numpy as np
import pytest
from scipy import integrate, stats

from pconvex.mathkit import NotPositiveDefinite, RngStream
from pconvex.posterior import (
    DEFAULT_PRIOR_SCALE,
    FamilyMismatch,
    KnownVarPosterior,
    MarginalLaw,
    ar_constant_known,
    batch_scatter,
    init_jeffreys,
    init_known,
    likelihood_ratio,
    log_density,
    lr_supremum,
    marginal,
    update_known,
    update_niw,
)

from conftest import random_spd


def _grid_sup(num, den, lo=-50.0, hi=50.0, step=1e-4):
    y = np.arange(lo, hi + step / 2, step)[:, None]
    return float(np.exp(np.max(log_density(num, y) - log_density(den, y))))


# ---------------------------------------------------------------------------
# known variance


def test_init_known_defaults_and_custom():
    gamma = np.diag([1.0, 4.0])
    s = init_known(gamma)
    assert np.array_equal(s.mu_n, np.zeros(2))
    assert np.allclose(s.lambda_n, DEFAULT_PRIOR_SCALE * 4.0 * np.eye(2))
    assert s.n == 0
    mu0, lam0 = np.array([1.0, 2.0]), np.array([[2.0, 0.5], [0.5, 1.0]])
    c = init_known(gamma, mu0, lam0)
    assert np.array_equal(c.mu_n, mu0) and np.array_equal(c.lambda_n, lam0)
    with pytest.raises(NotPositiveDefinite):
        init_known(gamma, mu0, np.diag([1.0, 0.0]))


def test_update_known_scalar():
    s = init_known([[1.0]], [0.0], [[1.0]])
    s1 = update_known(s, [2.0])
    assert s1.lambda_n[0, 0] == pytest.approx(0.5)
    assert s1.mu_n[0] == pytest.approx(1.0)
    assert s1.n == 1
    flat = update_known(init_known([[1.0]], [0.0], [[1e12]]), [3.7])
    assert flat.mu_n[0] == pytest.approx(3.7, rel=1e-6)
    with pytest.raises(ValueError):
        update_known(s, [1.0, 2.0])


def test_update_known_batch_equals_sequential():
    gen = np.random.default_rng(0)
    gamma = random_spd(gen, 3)
    s = init_known(gamma, gen.standard_normal(3), random_spd(gen, 3))
    y1, y2 = gen.standard_normal(3), gen.standard_normal(3)
    seq = update_known(update_known(s, y1), y2)
    bat = update_known(s, 0.5 * (y1 + y2), s=2)
    assert np.allclose(seq.mu_n, bat.mu_n, rtol=1e-9, atol=1e-12)
    assert np.allclose(seq.lambda_n, bat.lambda_n, rtol=1e-9, atol=1e-12)


def test_precision_accumulates_additively():
    gen = np.random.default_rng(1)
    gamma = random_spd(gen, 4)
    lam0 = random_spd(gen, 4)
    s = init_known(gamma, np.zeros(4), lam0)
    for _ in range(30):
        s = update_known(s, gen.standard_normal(4))
    expected = np.linalg.inv(lam0) + 30 * np.linalg.inv(gamma)
    assert np.linalg.norm(np.linalg.inv(s.lambda_n) - expected) / np.linalg.norm(expected) < 1e-8


def test_posterior_covariance_shrinks_monotonically():
    gamma = np.array([[1.0, 0.3], [0.3, 2.0]])
    s = init_known(gamma)
    gen = np.random.default_rng(2)
    for _ in range(20):
        nxt = update_known(s, gen.standard_normal(2))
        assert np.min(np.linalg.eigvalsh(s.lambda_n - nxt.lambda_n)) >= -1e-10
        s = nxt


def test_posterior_mean_contracts():
    hits = 0
    for seed in range(100):
        s = init_known([[1.0]])
        stream = RngStream(seed)
        truth = 0.7
        for j in range(500):
            s = update_known(s, [truth + stream.substream(j).standard_normal()])
        hits += abs(s.mu_n[0] - truth) < 0.2
    assert hits >= 95


# ---------------------------------------------------------------------------
# unknown variance


def test_init_jeffreys_scalar():
    s = init_jeffreys([[0.0], [2.0]])
    assert s.mu_n[0] == 1.0 and s.kappa_n == 2.0 and s.upsilon_n == 1.0
    assert s.xi_n[0, 0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        init_jeffreys([[1.0], [1.0]])
    with pytest.raises(ValueError):
        init_jeffreys(np.random.default_rng(0).standard_normal((3, 3)))  # s0 < r + 1
    s3 = init_jeffreys(np.random.default_rng(0).standard_normal((4, 3)))
    assert s3.kappa_n == 4.0


def test_update_niw_recursions():
    s = init_jeffreys([[0.0], [2.0], [-2.0]])
    s = type(s)(np.array([0.0]), 2.0, 5.0, np.array([[1.5]]), 0)
    n = update_niw(s, [3.0])
    assert n.mu_n[0] == pytest.approx(1.0)  # (2*0 + 3) / 3
    assert n.kappa_n == 3.0 and n.upsilon_n == 6.0
    assert n.xi_n[0, 0] == pytest.approx(1.5 + (2 / 3) * 9)


def test_niw_counters_and_batch_equivalence():
    gen = np.random.default_rng(3)
    pilot = gen.standard_normal((5, 3))
    s0 = init_jeffreys(pilot)
    ys = gen.standard_normal((7, 3))
    seq = s0
    for y in ys:
        seq = update_niw(seq, y)
    assert seq.kappa_n == s0.kappa_n + 7 and seq.upsilon_n == s0.upsilon_n + 7
    ybar, scatter, s = batch_scatter(ys)
    bat = update_niw(s0, ybar, s=s, scatter_s=scatter)
    assert np.allclose(seq.mu_n, bat.mu_n, atol=1e-12)
    assert np.allclose(seq.xi_n, bat.xi_n, rtol=1e-9)
    # pooling pilot and updates equals one Jeffreys initialization on all data
    direct = init_jeffreys(np.vstack([pilot, ys]))
    assert np.allclose(seq.mu_n, direct.mu_n, atol=1e-12)
    assert np.allclose(seq.xi_n, direct.xi_n, rtol=1e-9)


def test_marginal_parameters():
    known = init_known(np.eye(2))
    law = marginal(known)
    assert law.kind == "gaussian" and law.dof is None
    s = init_jeffreys([[0.0], [2.0]])
    s = type(s)(np.array([0.3]), 4.0, 3.0, np.array([[6.0]]), 0)
    t = marginal(s)
    assert t.kind == "student_t" and t.dof == 3.0
    assert t.scale[0, 0] == pytest.approx(0.5)
    r3 = type(s)(np.zeros(3), 4.0, 3.0, np.eye(3), 0)
    assert marginal(r3).dof == 1.0
    with pytest.raises(ValueError):
        marginal(type(s)(np.zeros(3), 4.0, 2.5, np.eye(3), 0))


# ---------------------------------------------------------------------------
# densities


def test_log_density_examples():
    g = MarginalLaw("gaussian", np.zeros(2), np.eye(2))
    assert log_density(g, np.zeros(2)) == pytest.approx(-math.log(2 * math.pi))
    t = MarginalLaw("student_t", np.array([0.5]), np.array([[2.0]]), 3.0)
    val, _ = integrate.quad(lambda y: math.exp(log_density(t, np.array([y]))), -50, 50, limit=200)
    # mass beyond +-50 for this law, computed from scipy's t distribution
    tail = stats.t.sf(49.5 / math.sqrt(2.0), 3) + stats.t.sf(50.5 / math.sqrt(2.0), 3)
    assert val + tail == pytest.approx(1.0, abs=1e-8)
    mu = np.array([0.2, -1.0, 3.0])
    law = MarginalLaw("student_t", mu, random_spd(np.random.default_rng(4), 3), 4.5)
    v = np.array([0.3, 0.1, -2.0])
    assert log_density(law, mu + v) == pytest.approx(log_density(law, mu - v), abs=1e-12)


def test_log_density_against_scipy():
    gen = np.random.default_rng(5)
    cov = random_spd(gen, 3)
    loc = gen.standard_normal(3)
    ys = gen.standard_normal((10, 3))
    g = MarginalLaw("gaussian", loc, cov)
    t = MarginalLaw("student_t", loc, cov, 5.5)
    assert np.allclose(log_density(g, ys), stats.multivariate_normal(loc, cov).logpdf(ys), atol=1e-10)
    assert np.allclose(log_density(t, ys), stats.multivariate_t(loc, cov, df=5.5).logpdf(ys), atol=1e-10)


def test_likelihood_ratio_examples():
    a = MarginalLaw("gaussian", np.zeros(1), np.eye(1))
    b = MarginalLaw("gaussian", np.zeros(1), 2 * np.eye(1))
    assert likelihood_ratio(a, b, np.zeros(1)) == pytest.approx(math.sqrt(2))
    assert likelihood_ratio(a, a, np.array([3.0])) == pytest.approx(1.0)
    t = MarginalLaw("student_t", np.zeros(1), np.eye(1), 3.0)
    with pytest.raises(FamilyMismatch):
        likelihood_ratio(a, t, np.zeros(1))


def test_likelihood_ratio_has_unit_mean():
    num = MarginalLaw("gaussian", np.array([0.1, 0.0]), np.array([[0.8, 0.1], [0.1, 0.7]]))
    den = MarginalLaw("gaussian", np.zeros(2), np.eye(2))
    s = RngStream(6)
    ys = np.array([den.sample(s) for _ in range(100_000)])
    lr = likelihood_ratio(num, den, ys)
    assert abs(lr.mean() - 1) < 3 * lr.std() / math.sqrt(len(lr))


# ---------------------------------------------------------------------------
# likelihood-ratio bounds


def test_lr_supremum_identical_and_unbounded():
    a = MarginalLaw("gaussian", np.zeros(1), np.eye(1))
    assert lr_supremum(a, a) == 1.0
    assert lr_supremum(MarginalLaw("gaussian", np.zeros(1), 2 * np.eye(1)), a) == math.inf
    # equal covariances with shifted means: the ratio exp(y - 1/2) is unbounded
    assert lr_supremum(MarginalLaw("gaussian", np.ones(1), np.eye(1)), a) == math.inf


@pytest.mark.parametrize("mu0,lam0,gamma,y", [(0.0, 3.0, 1.0, 0.0), (0.4, 2.0, 0.5, 1.3), (-1.0, 0.2, 0.3, 0.9)])
def test_lr_supremum_gaussian_matches_grid_and_closed_form(mu0, lam0, gamma, y):
    prev = init_known([[gamma]], [mu0], [[lam0]])
    cur = update_known(prev, [y])
    num, den = marginal(cur), marginal(prev)
    c = lr_supremum(num, den)
    assert c == pytest.approx(_grid_sup(num, den), rel=1e-6)
    assert c == pytest.approx(ar_constant_known(prev, cur), rel=1e-10)


def test_ar_constant_two():
    prev = init_known([[1.0]], [0.0], [[3.0]])
    cur = update_known(prev, [0.0])
    assert cur.lambda_n[0, 0] == pytest.approx(0.75)
    assert ar_constant_known(prev, cur) == pytest.approx(2.0)


def test_ar_constant_multivariate_matches_general_form():
    gen = np.random.default_rng(7)
    gamma = random_spd(gen, 3)
    prev = init_known(gamma, gen.standard_normal(3), random_spd(gen, 3))
    cur = update_known(prev, gen.standard_normal(3))
    assert ar_constant_known(prev, cur) == pytest.approx(lr_supremum(marginal(cur), marginal(prev)), rel=1e-9)


def test_lr_supremum_student_t_bounds_grid():
    s = init_jeffreys([[0.0], [1.0], [0.4]])
    nxt = update_niw(s, [0.9])
    num, den = marginal(nxt), marginal(s)
    c = lr_supremum(num, den)
    grid = _grid_sup(num, den, -200, 200, 1e-3)
    assert grid <= c <= 1.02 * grid
    assert lr_supremum(den, num) == math.inf  # heavier numerator tails


def test_lr_supremum_student_t_equal_dof_uses_tail_limit():
    den = MarginalLaw("student_t", np.zeros(1), np.eye(1), 4.0)
    num = MarginalLaw("student_t", np.zeros(1), 2.0 * np.eye(1), 4.0)
    c = lr_supremum(num, den)
    # the ratio increases towards its tail limit 2^{(nu+r)/2} / sqrt(2) = 2^2
    assert c >= 4.0 * (1 - 1e-9)
    assert c == pytest.approx(4.0 * 1.01, rel=1e-6)


def test_lr_supremum_family_mismatch():
    with pytest.raises(FamilyMismatch):
        lr_supremum(MarginalLaw("gaussian", np.zeros(1), np.eye(1)),
                    MarginalLaw("student_t", np.zeros(1), np.eye(1), 2.0))


def test_known_state_is_immutable_value():
    s = init_known(np.eye(2))
    s2 = update_known(s, [1.0, 1.0])
    assert s.n == 0 and s2.n == 1
    assert isinstance(s2, KnownVarPosterior)
    with pytest.raises(AttributeError):
        s.n = 5


def test_lr_supremum_flat_direction():
    # one coordinate unchanged: the ratio is constant along it, so the bound stays finite
    num = MarginalLaw("gaussian", np.zeros(2), np.diag([0.75, 1.0]))
    den = MarginalLaw("gaussian", np.zeros(2), np.diag([3.0, 1.0]))
    assert lr_supremum(num, den) == pytest.approx(2.0, rel=1e-12)
    shifted = MarginalLaw("gaussian", np.array([0.0, 0.5]), np.diag([0.75, 1.0]))
    assert lr_supremum(shifted, den) == math.inf
