"""Recombination-aware Markov chain prior over the activation indicators.

Between markers ``j-1`` and ``j`` the indicator is copied unchanged when no
recombination happens (probability ``exp(-d_j rho_j)``) and otherwise moves
according to the transition matrix ``[[pi0, 1 - pi0], [1 - pi1, pi1]]``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._kernels import MAX_DRHO
from .errors import DegenerateBeta


class TransitionParams(NamedTuple):
    pi0: float
    pi1: float


def stay_move(d_rho):
    """Return ``(exp(-d rho), 1 - exp(-d rho))`` with the large-argument clamp."""
    d_rho = np.asarray(d_rho, dtype=float)
    stay = np.where(d_rho > MAX_DRHO, 0.0, np.exp(-np.minimum(d_rho, MAX_DRHO)))
    move = np.where(d_rho > MAX_DRHO, 1.0, -np.expm1(-np.minimum(d_rho, MAX_DRHO)))
    return stay, move


def _pi(c_prev: int, c_next: int, pi0: float, pi1: float) -> float:
    if c_prev == 0:
        return pi0 if c_next == 0 else 1.0 - pi0
    return pi1 if c_next == 1 else 1.0 - pi1


def transition_prob(c_prev: int, c_next: int, d_kb: float, rho: float, params) -> float:
    dr = d_kb * rho
    if dr > MAX_DRHO:
        stay, move = 0.0, 1.0
    else:
        stay, move = math.exp(-dr), -math.expm1(-dr)
    return stay * (c_prev == c_next) + move * _pi(c_prev, c_next, params[0], params[1])


def initial_prob(c1: int) -> float:
    """Uniform distribution for the first indicator."""
    return 0.5


def chain_log_prior(c, markers, params) -> float:
    c = np.asarray(c)
    stay, move = stay_move(markers.d_rho)
    total = math.log(initial_prob(int(c[0])))
    for j in range(1, len(c)):
        p = stay[j] * (c[j] == c[j - 1]) + move[j] * _pi(int(c[j - 1]), int(c[j]), *params)
        total += math.log(p) if p > 0 else -math.inf
    return total


def transition_counts(c, markers, pi0_prev: float, pi1_prev: float):
    """Transition counts used by the ``pi0``/``pi1`` conditionals.

    Same-state transitions are split between the no-recombination branch and
    the recombination branch in proportion to their probabilities under the
    previous ``pi`` values; only the latter share counts toward ``pi``.
    Returns ``(n00, n01, n10, n11)``; ``n00`` and ``n11`` are fractional.
    """
    c = np.asarray(c)
    stay, move = stay_move(markers.d_rho)
    prev, nxt = c[:-1], c[1:]
    stay, move = stay[1:], move[1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        w0 = move * pi0_prev / (stay + move * pi0_prev)
        w1 = move * pi1_prev / (stay + move * pi1_prev)
    n00 = float(np.sum(np.where((prev == 0) & (nxt == 0), w0, 0.0)))
    n11 = float(np.sum(np.where((prev == 1) & (nxt == 1), w1, 0.0)))
    n01 = int(np.sum((prev == 0) & (nxt == 1)))
    n10 = int(np.sum((prev == 1) & (nxt == 0)))
    return n00, n01, n10, n11


def _draw_beta(a: float, b: float, rng) -> float:
    if not (a > 0 and b > 0):
        raise DegenerateBeta(f"Beta({a}, {b}) is not a proper distribution")
    return float(rng.beta(a, b))


def sample_pi0(c, markers, pi0_prev: float, hyper, rng) -> float:
    n00, n01, _, _ = transition_counts(c, markers, pi0_prev, 0.5)
    return _draw_beta(n00 + hyper.a00, n01 + hyper.b00, rng)


def sample_pi1(c, markers, pi1_prev: float, hyper, rng) -> float:
    _, _, n10, n11 = transition_counts(c, markers, 0.5, pi1_prev)
    return _draw_beta(n11 + hyper.a10, n10 + hyper.b10, rng)


class MarkovPrior:
    """Markov-chain indicator prior as used inside the Gibbs sweep."""

    name = "block"
    is_bernoulli = False

    def __init__(self, markers):
        self.markers = markers
        self.stay, self.move = stay_move(markers.d_rho)
        self._J = len(markers)

    def _log_t(self, j, a, b, pi0, pi1):
        p = self.stay[j] * (a == b) + self.move[j] * _pi(a, b, pi0, pi1)
        return math.log(p) if p > 0 else -math.inf

    def log_prior_pair(self, c, j: int, state):
        """Log prior factors for ``c_j = 0`` and ``c_j = 1`` given the neighbours."""
        pi0, pi1 = state.pi0, state.pi1
        if j == 0:
            lp0 = lp1 = math.log(initial_prob(0))
        else:
            left = int(c[j - 1])
            lp0 = self._log_t(j, left, 0, pi0, pi1)
            lp1 = self._log_t(j, left, 1, pi0, pi1)
        if j + 1 < self._J:
            right = int(c[j + 1])
            lp0 += self._log_t(j + 1, 0, right, pi0, pi1)
            lp1 += self._log_t(j + 1, 1, right, pi0, pi1)
        return lp0, lp1

    def update(self, state, hyper, rng):
        state.pi0 = sample_pi0(state.c, self.markers, state.pi0, hyper, rng)
        state.pi1 = sample_pi1(state.c, self.markers, state.pi1, hyper, rng)
