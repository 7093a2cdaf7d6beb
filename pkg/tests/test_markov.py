import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockreg.data import Hyperparameters, MarkerMap
from blockreg.markov import (
    MarkovPrior,
    TransitionParams,
    chain_log_prior,
    initial_prob,
    sample_pi0,
    sample_pi1,
    stay_move,
    transition_counts,
    transition_prob,
)
from blockreg.data import ModelState

# weight (1 - e^-0.1) 0.8 / (e^-0.1 + (1 - e^-0.1) 0.8) evaluated with mpmath at 30 digits
WEIGHT_01_08 = 0.0776071244393224428532242463749


def _map(d_rho, J):
    return MarkerMap(np.arange(J, dtype=float), np.full(J, float(d_rho)))


def test_zero_distance_copies_state():
    p = TransitionParams(0.3, 0.6)
    assert transition_prob(1, 1, 0.0, 5.0, p) == 1.0
    assert transition_prob(1, 0, 0.0, 5.0, p) == 0.0


def test_infinite_distance_uses_matrix():
    assert transition_prob(0, 0, 1e9, 1.0, TransitionParams(0.7, 0.5)) == pytest.approx(0.7, abs=1e-15)


def test_derived_value():
    expected = math.exp(-0.1) + (1 - math.exp(-0.1)) * 0.8
    assert transition_prob(0, 0, 1.0, 0.1, TransitionParams(0.8, 0.5)) == pytest.approx(expected, rel=1e-15)
    # mpmath, 30 digits
    assert expected == pytest.approx(0.980967483607191914632849811889, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(d=st.floats(0, 1e4), rho=st.floats(0, 10), pi0=st.floats(1e-6, 1 - 1e-6),
       pi1=st.floats(1e-6, 1 - 1e-6), prev=st.integers(0, 1))
def test_rows_sum_to_one(d, rho, pi0, pi1, prev):
    p = TransitionParams(pi0, pi1)
    total = transition_prob(prev, 0, d, rho, p) + transition_prob(prev, 1, d, rho, p)
    assert abs(total - 1.0) < 1e-12


@pytest.mark.parametrize("prev", [0, 1])
@pytest.mark.parametrize("nxt", [0, 1])
def test_limits(prev, nxt):
    p = TransitionParams(0.35, 0.9)
    assert transition_prob(prev, nxt, 1.0, 1e-12, p) == pytest.approx(float(prev == nxt), abs=1e-9)
    pi = [[0.35, 0.65], [0.1, 0.9]][prev][nxt]
    assert transition_prob(prev, nxt, 1.0, 50.0, p) == pytest.approx(pi, abs=1e-9)


def test_clamp_beyond_700():
    stay, move = stay_move(np.array([699.0, 701.0, 1e300]))
    assert stay[0] > 0 and stay[1] == 0 and stay[2] == 0
    assert move[1] == 1.0


def test_initial_prob_uniform():
    assert initial_prob(0) == 0.5 and initial_prob(1) == 0.5
    assert initial_prob(0) + initial_prob(1) == 1.0


def test_chain_log_prior_examples():
    p = TransitionParams(0.8, 0.8)
    assert chain_log_prior([1], _map(0.1, 1), p) == pytest.approx(math.log(0.5))
    frozen = MarkerMap(np.zeros(4), np.full(4, 0.1))
    assert chain_log_prior([1, 1, 1, 1], frozen, p) == pytest.approx(math.log(0.5))
    assert chain_log_prior([1, 0, 1, 1], frozen, p) == -math.inf


def test_chain_log_prior_matches_product():
    m = MarkerMap(np.array([0.0, 1.0, 3.0, 3.5]), np.array([0.0, 0.2, 0.1, 0.4]))
    p = TransitionParams(0.7, 0.4)
    c = [0, 1, 1, 0]
    expected = math.log(0.5)
    for j in range(1, 4):
        expected += math.log(transition_prob(c[j - 1], c[j], m.d[j], m.rho[j], p))
    assert chain_log_prior(c, m, p) == pytest.approx(expected, rel=1e-14)


def test_fractional_weight_matches_reference():
    n00, n01, n10, n11 = transition_counts([0, 0], _map(0.1, 2), 0.8, 0.5)
    assert n00 == pytest.approx(WEIGHT_01_08, rel=1e-12)
    assert (n01, n10, n11) == (0, 0, 0)


def test_fractional_counts_are_bounded():
    rng = np.random.default_rng(3)
    for _ in range(50):
        J = 30
        m = MarkerMap(np.sort(rng.uniform(0, 10, J)), rng.uniform(0, 2, J))
        c = rng.integers(0, 2, J)
        n00, n01, n10, n11 = transition_counts(c, m, 0.6, 0.7)
        raw00 = int(np.sum((c[:-1] == 0) & (c[1:] == 0)))
        raw11 = int(np.sum((c[:-1] == 1) & (c[1:] == 1)))
        assert 0 <= n00 <= raw00 and 0 <= n11 <= raw11
        if raw00:
            assert n00 < raw00


def _beta_draws(fn, n, *args):
    rng = np.random.default_rng(7)
    return np.array([fn(*args, rng) for _ in range(n)])


def test_sample_pi0_far_apart_markers():
    # weights all 1: Beta(13, 2)
    draws = _beta_draws(sample_pi0, 20000, [0, 0, 0, 0], _map(1e9, 4), 0.8, Hyperparameters())
    assert draws.mean() == pytest.approx(13 / 15, abs=0.003)
    assert draws.var() == pytest.approx(13 * 2 / (15 ** 2 * 16), rel=0.05)


def test_sample_pi0_without_evidence_is_prior():
    draws = _beta_draws(sample_pi0, 20000, [1, 1, 1], _map(1.0, 3), 0.8, Hyperparameters())
    assert draws.mean() == pytest.approx(10 / 12, abs=0.003)


def test_sample_pi0_fractional_case():
    draws = _beta_draws(sample_pi0, 40000, [0, 0], _map(0.1, 2), 0.8, Hyperparameters())
    a = 10 + WEIGHT_01_08
    assert draws.mean() == pytest.approx(a / (a + 2), abs=0.002)


def test_sample_pi1_cases():
    hyper = Hyperparameters()
    d = _beta_draws(sample_pi1, 20000, [1, 1, 1], _map(1e9, 3), 0.8, hyper)
    assert d.mean() == pytest.approx(12 / 14, abs=0.003)
    d = _beta_draws(sample_pi1, 20000, [0, 0, 0], _map(1.0, 3), 0.8, hyper)
    assert d.mean() == pytest.approx(10 / 12, abs=0.003)
    d = _beta_draws(sample_pi1, 40000, [1, 1], _map(0.1, 2), 0.8, hyper)
    a = 10 + WEIGHT_01_08
    assert d.mean() == pytest.approx(a / (a + 2), abs=0.002)


def test_pi_draws_reproducible_and_open():
    m = _map(0.3, 6)
    c = [0, 0, 1, 1, 0, 1]
    a = sample_pi0(c, m, 0.5, Hyperparameters(), np.random.default_rng(1))
    b = sample_pi0(c, m, 0.5, Hyperparameters(), np.random.default_rng(1))
    assert a == b and 0 < a < 1


def test_prior_pair_matches_chain_prior_difference():
    m = MarkerMap(np.array([0.0, 0.5, 2.0, 2.1, 4.0]), np.array([0.0, 0.3, 0.1, 1.0, 0.2]))
    prior = MarkovPrior(m)
    state = ModelState(np.zeros(5), np.array([1, 0, 1, 1, 0], dtype=np.int8), 1.0, 1.0, 0.7, 0.6)
    p = TransitionParams(0.7, 0.6)
    for j in range(5):
        lp0, lp1 = prior.log_prior_pair(state.c, j, state)
        c0 = state.c.copy(); c0[j] = 0
        c1 = state.c.copy(); c1[j] = 1
        assert lp1 - lp0 == pytest.approx(chain_log_prior(c1, m, p) - chain_log_prior(c0, m, p), rel=1e-12)
