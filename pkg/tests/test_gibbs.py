import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from blockreg.baselines import BernoulliPrior
from blockreg.data import Hyperparameters, MarkerMap, ModelState, SamplingSchedule
from blockreg.evaluation import centered_design
from blockreg.gibbs import (
    ActiveMarginal,
    gibbs_sweep,
    marginal_loglik_active,
    marginal_loglik_inactive,
    residuals_excluding,
    run_chain,
    sample_betaj,
    sample_cj,
    sample_lambda,
    sample_sigma_sq,
    _SweepCache,
)
from blockreg.markov import MarkovPrior
from blockreg.truncnorm import sample_truncated_normal

from conftest import make_dataset
from oracles import exact_indicator_posterior, grid_conditional_cdf, quad_log_marginal_active

FIXED = frozenset({"sigma_sq", "pi", "lam"})


def _state(J, c=None, beta=None, sigma_sq=1.0, lam=1.0, pi0=0.5, pi1=0.5):
    return ModelState(
        np.zeros(J) if beta is None else np.asarray(beta, float),
        np.zeros(J, dtype=np.int8) if c is None else np.asarray(c, dtype=np.int8),
        sigma_sq, lam, pi0, pi1,
    )


# residuals and inactive marginal

def test_residuals_examples():
    X = np.array([[1.0, 1.0], [2.0, 1.0]])
    y = np.array([2.0, 2.0])
    assert residuals_excluding(0, X, y, np.zeros(2)).tolist() == [2.0, 2.0]
    assert residuals_excluding(0, X, y, np.array([5.0, 1.0])).tolist() == [1.0, 1.0]
    assert residuals_excluding(0, X[:, :1], y, np.array([3.0])).tolist() == [2.0, 2.0]


def test_inactive_examples():
    assert marginal_loglik_inactive([0.0, 0.0], 1.0) == pytest.approx(-math.log(2 * math.pi), rel=1e-15)
    assert marginal_loglik_inactive([1.0], 1.0) == pytest.approx(-0.5 * math.log(2 * math.pi) - 0.5, rel=1e-15)


def test_inactive_matches_gaussian_logpdf():
    rng = np.random.default_rng(1)
    for _ in range(50):
        z = rng.normal(size=rng.integers(1, 40)) * 3
        s2 = 10 ** rng.uniform(-2, 2)
        ref = float(np.sum(stats.norm.logpdf(z, scale=math.sqrt(s2))))
        assert marginal_loglik_inactive(z, s2) == pytest.approx(ref, rel=1e-12)


# active marginal

def test_active_matches_quadrature():
    rng = np.random.default_rng(2)
    for _ in range(100):
        N = int(rng.integers(1, 30))
        x = rng.integers(1, 3, N).astype(float)
        z = rng.normal(size=N) * 2 + x * rng.uniform(-5, 5)
        s2, lam = 10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-3, 3)
        _, total = marginal_loglik_active(z, x, s2, lam)
        ref = quad_log_marginal_active(z, x, s2, lam)
        assert abs(total - ref) <= 1e-6 * abs(ref)


def test_active_symmetric_when_orthogonal():
    x = np.array([1.0, -1.0, 2.0, 0.0])
    z = np.array([1.0, 1.0, 0.0, 5.0])  # z . x = 0
    am, _ = marginal_loglik_active(z, x, 0.7, 0.3)
    assert am.log_A_minus == am.log_A_plus
    assert am.prob_negative == pytest.approx(0.5, abs=1e-15)


def test_active_lambda_limit():
    x = np.array([1.0, 2.0, 1.0])
    z = np.array([0.5, 1.0, -0.2])
    am, _ = marginal_loglik_active(z, x, 1.0, 1e12)
    target = float(z @ x) / float(x @ x)
    assert am.mu_minus == pytest.approx(target, abs=1e-10)
    assert am.mu_plus == pytest.approx(target, abs=1e-10)


@pytest.mark.parametrize("ratio", [1e6, -1e6, 1e3, 0.0])
@pytest.mark.parametrize("lam", [1e-6, 1.0, 1e6])
def test_active_stays_finite_in_extremes(ratio, lam):
    x = np.array([1.0, 2.0, 2.0])
    z = ratio * x
    am, total = marginal_loglik_active(z, x, 0.5, lam)
    assert all(math.isfinite(v) for v in (am.log_A_minus, am.log_A_plus, am.log_K, total))
    assert 0.0 <= am.prob_negative <= 1.0


def test_zero_column_rejected():
    from blockreg.errors import ZeroVarianceColumn
    with pytest.raises(ZeroVarianceColumn):
        marginal_loglik_active([1.0, 2.0], [0.0, 0.0], 1.0, 1.0)


# truncated normal

def test_half_normal_median():
    d = sample_truncated_normal(0.0, 1.0, "negative", np.random.default_rng(0), size=1_000_000)
    assert np.median(d) == pytest.approx(-0.6744897501960817, abs=0.01)
    assert d.max() < 0


def test_inactive_truncation():
    d = sample_truncated_normal(-10.0, 1.0, "negative", np.random.default_rng(0), size=200_000)
    assert d.mean() == pytest.approx(-10.0, abs=0.01)


def _tail_mean(mean, sd, side):
    # E[X | X < 0] or E[X | X > 0] for X ~ N(mean, sd^2), 50 digits
    mp.mp.dps = 50
    m, s = mp.mpf(mean), mp.mpf(sd)
    a = -m / s
    if side == "negative":
        lam = mp.npdf(a) / mp.ncdf(a)
        return float(m - s * lam)
    lam = mp.npdf(a) / mp.ncdf(-a)
    return float(m + s * lam)


@pytest.mark.parametrize("mean, sd, side", [(8.0, 1.0, "negative"), (-40.0, 1.0, "positive"),
                                            (40.0, 2.0, "negative"), (3.0, 0.5, "negative")])
def test_deep_tail(mean, sd, side):
    d = sample_truncated_normal(mean, sd, side, np.random.default_rng(5), size=200_000)
    assert (d < 0).all() if side == "negative" else (d > 0).all()
    assert d.mean() == pytest.approx(_tail_mean(mean, sd, side), rel=0.01)


@pytest.mark.parametrize("mean, side", [(0.7, "negative"), (-1.3, "negative"), (2.5, "positive"), (-2.0, "positive")])
def test_truncnorm_distribution(mean, side):
    d = sample_truncated_normal(mean, 1.5, side, np.random.default_rng(9), size=100_000)
    lo, hi = ((-np.inf - mean) / 1.5, (0 - mean) / 1.5) if side == "negative" else ((0 - mean) / 1.5, np.inf)
    assert stats.kstest(d, stats.truncnorm(lo, hi, loc=mean, scale=1.5).cdf).statistic < 0.006


def test_truncnorm_scalar_and_validation():
    v = sample_truncated_normal(1.0, 1.0, "positive", np.random.default_rng(0))
    assert isinstance(v, float) and v > 0
    with pytest.raises(ValueError):
        sample_truncated_normal(0.0, 0.0, "positive", np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_truncated_normal(0.0, 1.0, "up", np.random.default_rng(0))


# beta_j draws

def test_betaj_spike():
    am = ActiveMarginal(0.0, 0.0, 1.0, -1.0, 1.0, 0.0)
    assert sample_betaj(0, 0, am, np.random.default_rng(0)) == 0.0


def test_betaj_equal_masses_split_evenly():
    am = ActiveMarginal(-3.0, -3.0, 0.2, -0.2, 0.5, 0.0)
    rng = np.random.default_rng(4)
    d = np.array([sample_betaj(0, 1, am, rng) for _ in range(100_000)])
    assert np.mean(d < 0) == pytest.approx(0.5, abs=0.005)
    assert not np.any(d == 0)


@pytest.mark.parametrize("S_zx, sigma_sq, lam", [(3.0, 1.0, 1.0), (-0.4, 0.5, 0.2), (0.8, 2.0, 0.05)])
def test_betaj_full_conditional(S_zx, sigma_sq, lam):
    x = np.array([1.0, 2.0, 1.0, 0.0, 2.0])
    S_xx = float(x @ x)
    # build z with the requested z.x
    z = x * S_zx / S_xx
    am, _ = marginal_loglik_active(z, x, sigma_sq, lam)
    rng = np.random.default_rng(11)
    draws = np.sort([sample_betaj(0, 1, am, rng) for _ in range(1_000_000)])
    s = math.sqrt(sigma_sq / S_xx)
    grid, cdf = grid_conditional_cdf(S_xx, S_zx, sigma_sq, lam, draws[0] - 10 * s, draws[-1] + 10 * s)
    F = np.interp(draws, grid, cdf)
    n = draws.size
    ks = max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(n) / n))
    assert ks < 0.005


# c_j draws

def test_cj_forced_by_frozen_prior():
    m = MarkerMap(np.zeros(3), np.full(3, 0.5))  # all distances zero
    X = np.array([[1.0, 2.0, 1.0], [0.0, 1.0, 2.0], [2.0, 0.0, 1.0]])
    y = X[:, 1] * 5.0
    st = _state(3)
    rng = np.random.default_rng(0)
    assert all(sample_cj(1, st, X, y, m, rng) == 0 for _ in range(200))


def test_cj_flat_prior_frequency():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 3, (15, 2)).astype(float)
    y = X[:, 0] * 0.4 + rng.normal(size=15)
    st = _state(2, sigma_sq=1.3, lam=0.7)
    z = residuals_excluding(0, X, y, st.beta)
    ll0 = marginal_loglik_inactive(z, st.sigma_sq)
    _, ll1 = marginal_loglik_active(z, X[:, 0], st.sigma_sq, st.lam)
    p1 = 1.0 / (1.0 + math.exp(ll0 - ll1))
    assert 0.05 < p1 < 0.95
    far = MarkerMap(np.array([0.0, 1e6]), np.array([0.0, 1.0]))
    hits = sum(sample_cj(0, st, X, y, far, rng) for _ in range(100_000))
    assert hits / 100_000 == pytest.approx(p1, abs=0.01)


def test_cj_single_marker_uses_initial_prob_only():
    st = _state(1, pi0=0.99, pi1=0.01)
    m = MarkerMap(np.zeros(1), np.zeros(1))
    lp0, lp1 = MarkovPrior(m).log_prior_pair(st.c, 0, st)
    assert lp0 == lp1 == math.log(0.5)


# sigma^2 and lambda

def test_sigma_sq_zero_data():
    N, J = 8, 3
    X = np.ones((N, J))
    st = _state(J)
    hyper = Hyperparameters(nu0=3.0, s0_sq=2.0)
    rng = np.random.default_rng(0)
    d = np.array([sample_sigma_sq(st, X, np.zeros(N), hyper, rng) for _ in range(100_000)])
    ref = stats.invgamma((N + 2 * J + 3.0) / 2, scale=3.0 * 2.0 / 2)
    assert stats.kstest(d, ref.cdf).statistic < 0.006
    assert d.min() > 0


@pytest.mark.parametrize("shape_mode", ["paper", "active"])
def test_sigma_sq_moment(shape_mode):
    rng = np.random.default_rng(1)
    X = rng.integers(0, 3, (20, 4)).astype(float)
    y = rng.normal(size=20)
    st = _state(4, c=[1, 0, 1, 0], beta=[0.5, 0.0, -1.0, 0.0], lam=0.8)
    hyper = Hyperparameters()
    k = 4 if shape_mode == "paper" else 2
    shape = (20 + 2 * k + 1) / 2
    r = y - X @ st.beta
    scale = (r @ r + 1.5 / 0.8 + 1.0) / 2
    g = np.random.default_rng(2)
    d = np.array([sample_sigma_sq(st, X, y, hyper, g, shape_mode) for _ in range(1_000_000)])
    assert d.mean() == pytest.approx(scale / (shape - 1), rel=0.005)


def test_lambda_prior_when_nothing_active():
    rng = np.random.default_rng(0)
    hyper = Hyperparameters(alpha=3.0, gamma=2.0)
    d = np.array([sample_lambda(_state(3), hyper, rng) for _ in range(100_000)])
    assert stats.kstest(d, stats.invgamma(3.0, scale=2.0).cdf).statistic < 0.006


def test_lambda_example_and_moment():
    st = _state(3, c=[1, 1, 0], beta=[3.0, -1.0, 0.0], sigma_sq=1.0)
    rng = np.random.default_rng(0)
    d = np.array([sample_lambda(st, Hyperparameters(), rng) for _ in range(1_000_000)])
    # Inv-gamma(3, 3): mean 3 / 2
    assert d.mean() == pytest.approx(1.5, rel=0.005)
    assert stats.kstest(d[:100_000], stats.invgamma(3.0, scale=3.0).cdf).statistic < 0.006


# sweeps and chains

def test_sweep_is_deterministic():
    ds = make_dataset(N=25, J=8, causal=(2, 3))
    X, y, _ = centered_design(ds)
    out = []
    for _ in range(2):
        st = _state(8, pi0=0.8, pi1=0.8)
        rng = np.random.default_rng(42)
        for _ in range(5):
            gibbs_sweep(st, X, y, ds.markers, Hyperparameters(), rng)
        out.append(st)
    a, b = out
    assert np.array_equal(a.beta, b.beta) and np.array_equal(a.c, b.c)
    assert (a.sigma_sq, a.lam, a.pi0, a.pi1) == (b.sigma_sq, b.lam, b.pi0, b.pi1)


def test_incremental_fitted_values_match_recomputation():
    ds = make_dataset(N=40, J=12, causal=(4, 5, 6))
    X, y, _ = centered_design(ds)
    st = _state(12, pi0=0.8, pi1=0.8)
    cache = _SweepCache(X, y, st.beta)
    rng = np.random.default_rng(0)
    for _ in range(50):
        gibbs_sweep(st, X, y, ds.markers, Hyperparameters(), rng, _cache=cache)
        assert np.allclose(cache.fitted, X @ st.beta, rtol=0, atol=1e-9)
        assert st.spike_consistent() if hasattr(st, "spike_consistent") else np.all(st.beta[st.c == 0] == 0)


def test_null_data_keeps_indicators_off():
    X = np.array([[0, 1], [1, 1], [2, 0], [1, 2], [0, 0], [2, 1]], float)
    y = np.zeros(6)
    exact = exact_indicator_posterior(X, y, p1=0.1)
    st = _state(2, pi0=0.9, pi1=0.1)
    tr = run_chain(X, y, None, Hyperparameters(), SamplingSchedule(100, 50_000, 1, 3),
                   prior=BernoulliPrior(), fixed=FIXED, init=st)
    freq = tr.c.mean(axis=0)
    assert freq.max() < 0.1
    assert freq[0] == pytest.approx(exact[(1, 0)] + exact[(1, 1)], abs=0.01)
    assert freq[1] == pytest.approx(exact[(0, 1)] + exact[(1, 1)], abs=0.01)


def test_run_chain_schedule_and_seeds():
    ds = make_dataset(N=20, J=5, causal=(1,))
    X, y, _ = centered_design(ds)
    tr = run_chain(X, y, ds.markers, Hyperparameters(), SamplingSchedule(20, 5000, 10, 1))
    assert len(tr) == 500
    again = run_chain(X, y, ds.markers, Hyperparameters(), SamplingSchedule(20, 5000, 10, 1))
    assert np.array_equal(tr.beta, again.beta) and np.array_equal(tr.sigma_sq, again.sigma_sq)
    other = run_chain(X, y, ds.markers, Hyperparameters(), SamplingSchedule(20, 5000, 10, 2))
    assert not np.array_equal(tr.sigma_sq, other.sigma_sq)
    one = run_chain(X, y, ds.markers, Hyperparameters(), SamplingSchedule(0, 7, 7, 1))
    assert len(one) == 1


def test_train_error_matches_recomputation():
    ds = make_dataset(N=30, J=6, causal=(0, 1))
    X, y, _ = centered_design(ds)
    tr = run_chain(X, y, ds.markers, Hyperparameters(), SamplingSchedule(10, 200, 2, 5))
    for k in range(len(tr)):
        r = y - X @ tr.beta[k]
        assert tr.train_error[k] == pytest.approx(float(r @ r), rel=1e-10)
    assert tr.spike_consistent() and tr.is_finite()


def test_single_causal_column_is_found():
    rng = np.random.default_rng(8)
    N, J = 100, 5
    X = rng.integers(0, 3, (N, J)).astype(float)
    y = 3.0 * X[:, 2] + rng.normal(size=N)
    X -= X.mean(axis=0)
    y -= y.mean()
    st = _state(J)
    tr = run_chain(X, y, None, Hyperparameters(), SamplingSchedule(200, 2000, 2, 0),
                   prior=BernoulliPrior(), fixed=frozenset({"pi"}), init=st)
    assert tr.c[:, 2].mean() > 0.95


def test_pi_update_order_is_irrelevant():
    # pi0 and pi1 conditionals use disjoint transitions, so either order gives the same pair
    from blockreg.markov import sample_pi0, sample_pi1
    m = MarkerMap(np.arange(10, dtype=float), np.full(10, 0.3))
    c = [0, 0, 1, 1, 1, 0, 0, 0, 1, 1]
    h = Hyperparameters()
    a = sample_pi0(c, m, 0.7, h, np.random.default_rng(1)), sample_pi1(c, m, 0.6, h, np.random.default_rng(2))
    b = sample_pi1(c, m, 0.6, h, np.random.default_rng(2)), sample_pi0(c, m, 0.7, h, np.random.default_rng(1))
    assert a == (b[1], b[0])


def test_invalid_sigma_shape():
    ds = make_dataset(N=10, J=3)
    with pytest.raises(ValueError):
        gibbs_sweep(_state(3), ds.X, ds.y, ds.markers, Hyperparameters(), np.random.default_rng(0),
                    sigma_shape="other")
