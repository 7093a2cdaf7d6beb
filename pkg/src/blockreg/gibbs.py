"""Collapsed Gibbs sampler for the spike-and-Laplace regression model.

Each marker's indicator ``c_j`` is drawn with ``beta_j`` integrated out; the
integral over the Laplace slab splits at zero into two Gaussian pieces,
``A_minus`` (``beta_j < 0``) and ``A_plus`` (``beta_j > 0``), that are
handled entirely in log space. ``beta_j`` is then drawn from the matching
two-component truncated-normal mixture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .data import MarkerMap, ModelState, SampleTrace, SamplingSchedule, initial_state
from .errors import ZeroVarianceColumn
from .markov import MarkovPrior

SIGMA_SHAPES = ("paper", "active")


@dataclass(frozen=True)
class ActiveMarginal:
    log_A_minus: float
    log_A_plus: float
    mu_minus: float
    mu_plus: float
    s_sq: float
    log_K: float

    @property
    def log_total(self) -> float:
        return self.log_K + _k.logaddexp(self.log_A_minus, self.log_A_plus)

    @property
    def prob_negative(self) -> float:
        return math.exp(self.log_A_minus - _k.logaddexp(self.log_A_minus, self.log_A_plus))


def residuals_excluding(j: int, X, y, beta) -> np.ndarray:
    """``z = y - sum_{k != j} x_k beta_k``."""
    X = np.asarray(X, dtype=float)
    return y - X @ beta + X[:, j] * beta[j]


def marginal_loglik_inactive(z, sigma_sq: float) -> float:
    z = np.asarray(z, dtype=float)
    return _k.inactive_loglik(float(z @ z), z.size, sigma_sq)


def marginal_loglik_active(z, x_col, sigma_sq: float, lam: float):
    """Log marginal likelihood with ``beta_j`` integrated against the Laplace slab.

    Returns ``(ActiveMarginal, total)`` where ``total`` is the log of
    ``K * (A_minus + A_plus)``.
    """
    z = np.asarray(z, dtype=float)
    x = np.asarray(x_col, dtype=float)
    S_xx = float(x @ x)
    if not S_xx > 0:
        raise ZeroVarianceColumn("column has zero sum of squares")
    am = ActiveMarginal(*_k.active_stats(S_xx, float(z @ x), float(z @ z), z.size, sigma_sq, lam))
    return am, am.log_total


def _draw_indicator(log_w0: float, log_w1: float, rng) -> int:
    if log_w0 == -math.inf and log_w1 == -math.inf:
        raise FloatingPointError("both indicator states have zero probability")
    p1 = math.exp(log_w1 - _k.logaddexp(log_w0, log_w1))
    return int(rng.random() < p1)


def sample_betaj(j: int, c_j: int, active: ActiveMarginal, rng) -> float:
    """Draw ``beta_j`` given ``c_j``.

    The negative component is chosen with probability
    ``A_minus / (A_minus + A_plus)``; each half is weighted by its own mass.
    """
    if c_j == 0:
        return 0.0
    return _k.beta_draw(active.log_A_minus, active.log_A_plus, active.mu_minus,
                        active.mu_plus, active.s_sq, rng)


def sample_cj(j: int, state: ModelState, X, y, prior, rng) -> int:
    """Draw ``c_j`` from its conditional with ``beta_j`` integrated out.

    ``prior`` supplies ``log_prior_pair(c, j, state)``; a bare
    :class:`MarkerMap` is wrapped in a :class:`MarkovPrior`.
    """
    if isinstance(prior, MarkerMap):
        prior = MarkovPrior(prior)
    X = np.asarray(X, dtype=float)
    z = residuals_excluding(j, X, y, state.beta)
    ll0 = marginal_loglik_inactive(z, state.sigma_sq)
    _, ll1 = marginal_loglik_active(z, X[:, j], state.sigma_sq, state.lam)
    lp0, lp1 = prior.log_prior_pair(state.c, j, state)
    return _draw_indicator(ll0 + lp0, ll1 + lp1, rng)


def _inv_gamma(shape: float, scale: float, rng) -> float:
    # density ~ x^(-shape-1) exp(-scale / x); 1/x ~ Gamma(shape, rate=scale)
    return 1.0 / rng.gamma(shape, 1.0 / scale)


def sample_sigma_sq(state: ModelState, X, y, hyper, rng, sigma_shape="paper") -> float:
    """Inverse-gamma draw for the noise variance.

    ``sigma_shape="paper"`` uses ``(N + 2J + nu0) / 2``; ``"active"`` counts
    only active coefficients, ``(N + 2J' + nu0) / 2``.
    """
    n, J = X.shape
    resid = y - X @ state.beta
    rss = float(resid @ resid)
    l1 = float(np.abs(state.beta).sum())
    k = J if sigma_shape == "paper" else int(np.sum(state.c))
    shape = 0.5 * (n + 2 * k + hyper.nu0)
    scale = 0.5 * (rss + l1 / state.lam + hyper.nu0 * hyper.s0_sq)
    return _inv_gamma(shape, scale, rng)


def sample_lambda(state: ModelState, hyper, rng) -> float:
    active = state.c == 1
    shape = int(active.sum()) + hyper.alpha
    scale = float(np.abs(state.beta[active]).sum()) / (2.0 * state.sigma_sq) + hyper.gamma
    return _inv_gamma(shape, scale, rng)


class _SweepCache:
    """Per-chain constants and the incrementally maintained fitted values."""

    def __init__(self, X, y, beta):
        self.X = np.asfortranarray(X, dtype=float)
        self.y = np.ascontiguousarray(y, dtype=float)
        self.S_xx = np.einsum("ij,ij->j", self.X, self.X)
        if np.any(self.S_xx <= 0):
            raise ZeroVarianceColumn(f"column {int(np.argmax(self.S_xx <= 0))} has zero sum of squares")
        self.fitted = self.X @ beta

    def train_error(self) -> float:
        r = self.y - self.fitted
        return float(r @ r)


def _update_markers(state, cache, prior, rng):
    ok = _k.update_markers(
        cache.X, cache.y, cache.fitted, cache.S_xx, state.beta, state.c,
        state.sigma_sq, state.lam, prior.is_bernoulli, prior.stay, prior.move,
        state.pi0, state.pi1, rng,
    )
    if not ok:
        raise FloatingPointError("both indicator states have zero probability")


def gibbs_sweep(state, X, y, markers, hyper, rng, prior=None, sigma_shape="paper",
                fixed=frozenset(), _cache=None) -> ModelState:
    """One full sweep, updating ``state`` in place and returning it.

    Markers are visited left to right (``c_j`` then ``beta_j``), followed by
    ``sigma_sq``, the indicator-prior parameters and ``lam``. Names listed in
    ``fixed`` (``"sigma_sq"``, ``"pi"``, ``"lam"``) are held at their
    current values.
    """
    if sigma_shape not in SIGMA_SHAPES:
        raise ValueError(f"sigma_shape must be one of {SIGMA_SHAPES}")
    prior = prior if prior is not None else MarkovPrior(markers)
    cache = _cache if _cache is not None else _SweepCache(X, y, state.beta)
    _update_markers(state, cache, prior, rng)
    if "sigma_sq" not in fixed:
        state.sigma_sq = sample_sigma_sq(state, cache.X, cache.y, hyper, rng, sigma_shape)
    if "pi" not in fixed:
        prior.update(state, hyper, rng)
    if "lam" not in fixed:
        state.lam = sample_lambda(state, hyper, rng)
    return state


def run_chain(X, y, markers, hyper, schedule: SamplingSchedule, prior=None,
              sigma_shape="paper", fixed=frozenset(), init: ModelState | None = None,
              check=True) -> SampleTrace:
    """Run burn-in then keep every ``thin``-th state of ``iterations`` sweeps.

    All randomness comes from ``schedule.seed``. ``markers`` may be ``None``
    when a ``prior`` that does not use the marker map is supplied.
    """
    rng = np.random.default_rng(schedule.seed)
    prior = prior if prior is not None else MarkovPrior(markers)
    state = init.copy() if init is not None else initial_state(X, y, hyper)
    cache = _SweepCache(X, y, state.beta)
    trace = SampleTrace.empty(schedule.n_retained, cache.X.shape[1], schedule)
    for _ in range(schedule.burn_in):
        gibbs_sweep(state, cache.X, cache.y, markers, hyper, rng, prior, sigma_shape, fixed, cache)
    k = 0
    for it in range(1, schedule.iterations + 1):
        gibbs_sweep(state, cache.X, cache.y, markers, hyper, rng, prior, sigma_shape, fixed, cache)
        if it % schedule.thin == 0:
            if check:
                state.check()
            trace.record(k, state, cache.train_error())
            k += 1
    return trace
