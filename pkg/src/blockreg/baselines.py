"""Comparison methods: ridge, lasso (+ CV), independent-Bernoulli spike-and-slab, Wald test."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels as _k
from .data import SamplingSchedule, initial_state
from .errors import DegenerateColumn, NoConvergence, SolveFailure
from .gibbs import run_chain
from .markov import _draw_beta

P_VALUE_FLOOR = 1e-300


def ridge_fit(X, y, reg: float = 0.1) -> np.ndarray:
    """Solve ``(X'X + reg I) beta = X'y``."""
    if not reg > 0:
        raise ValueError("reg must be positive")
    X = np.asarray(X, dtype=float)
    A = X.T @ X
    A[np.diag_indices_from(A)] += reg
    try:
        beta = np.linalg.solve(A, X.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(beta)):
        raise SolveFailure("ridge solution is not finite")
    return beta


@dataclass
class LassoFit:
    beta: np.ndarray
    penalty: float
    n_iterations: int
    max_kkt_violation: float
    objective: list = field(default_factory=list, repr=False)


def lasso_objective(X, y, beta, penalty) -> float:
    r = y - X @ beta
    return 0.5 * float(r @ r) + penalty * float(np.abs(beta).sum())


def kkt_violation(X, y, beta, penalty) -> float:
    """Largest deviation from the lasso optimality conditions."""
    g = X.T @ (y - X @ beta)
    zero = beta == 0
    v = np.where(zero, np.maximum(np.abs(g) - penalty, 0.0), np.abs(g - penalty * np.sign(beta)))
    return float(v.max()) if v.size else 0.0


def lasso_fit(X, y, penalty: float, tol: float = 1e-7, kkt_tol: float = 1e-7,
              max_cycles: int = 100_000, beta0=None, track_objective=False) -> LassoFit:
    """Minimise ``0.5 ||y - X beta||^2 + penalty ||beta||_1`` by coordinate descent.

    Converged means a full cycle changed no coefficient by more than ``tol``
    and every optimality condition holds to within ``kkt_tol``. With
    ``track_objective`` the objective is recorded after every cycle.
    """
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    G = np.asfortranarray(X.T @ X)
    diag = np.diag(G).copy()
    if np.any(diag <= 0):
        raise DegenerateColumn(f"column {int(np.argmax(diag <= 0))} is all zeros")
    beta = np.zeros(X.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    grad = X.T @ y - G @ beta
    objective = []
    if track_objective:
        objective.append(lasso_objective(X, y, beta, penalty))
        cycles, converged = 0, False
        while cycles < max_cycles and not converged:
            _, converged = _k.lasso_cd(G, grad, diag, penalty, beta, tol, kkt_tol, 1)
            cycles += 1
            objective.append(lasso_objective(X, y, beta, penalty))
    else:
        cycles, converged = _k.lasso_cd(G, grad, diag, penalty, beta, tol, kkt_tol, max_cycles)
    kkt = kkt_violation(X, y, beta, penalty)
    if not converged:
        raise NoConvergence(f"lasso did not converge in {max_cycles} cycles", kkt, beta)
    return LassoFit(beta, float(penalty), int(cycles), kkt, objective)


def penalty_grid(X, y, n: int = 50, ratio: float = 1e-3) -> np.ndarray:
    pmax = float(np.max(np.abs(X.T @ y)))
    return np.geomspace(pmax, ratio * pmax, n)


def lasso_cv(X, y, grid=None, folds: int = 5, seed: int = 0, max_cycles: int = 10_000) -> float:
    """Pick the penalty with the lowest k-fold mean squared prediction error.

    Ties go to the larger penalty. Fits along the grid are warm-started. A
    fold fit that hits the cycle cap contributes its last iterate, since the
    prediction error does not depend on the last digits of the optimum.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    grid = penalty_grid(X, y) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty penalty grid")
    if grid.size == 1:
        return float(grid[0])
    order = np.argsort(-grid, kind="stable")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=int)
    fold_of[rng.permutation(len(y))] = np.arange(len(y)) % folds
    sse = np.zeros(grid.size)
    for f in range(folds):
        test = fold_of == f
        Xtr, ytr = X[~test], y[~test]
        beta = np.zeros(X.shape[1])
        for k in order:
            try:
                beta = lasso_fit(Xtr, ytr, grid[k], beta0=beta, max_cycles=max_cycles).beta
            except NoConvergence as exc:
                beta = exc.beta
            r = y[test] - X[test] @ beta
            sse[k] += float(r @ r)
    mse = sse / len(y)
    best = min(order, key=lambda k: (mse[k], -grid[k]))
    return float(grid[best])


class BernoulliPrior:
    """Independent ``c_j ~ Bernoulli(p)`` with ``p ~ Beta(bern_a, bern_b)``.

    ``p`` lives in ``state.pi1`` (and ``state.pi0 = 1 - p``).
    """

    name = "bernoulli"
    is_bernoulli = True
    stay = move = np.zeros(0)

    def log_prior_pair(self, c, j, state):
        p = state.pi1
        return math.log1p(-p), math.log(p)

    def update(self, state, hyper, rng):
        active = int(np.sum(state.c))
        p = _draw_beta(hyper.bern_a + active, hyper.bern_b + (len(state.c) - active), rng)
        state.pi1 = p
        state.pi0 = 1.0 - p


def bernoulli_initial_state(X, y, hyper):
    state = initial_state(X, y, hyper)
    state.pi1 = hyper.bern_a / (hyper.bern_a + hyper.bern_b)
    state.pi0 = 1.0 - state.pi1
    return state


def bernoulli_prior_chain(X, y, hyper, schedule: SamplingSchedule, **kw):
    """Same sampler as the block model with an i.i.d. Bernoulli indicator prior."""
    kw.setdefault("init", bernoulli_initial_state(X, y, hyper))
    return run_chain(X, y, None, hyper, schedule, prior=BernoulliPrior(), **kw)


@dataclass
class WaldResult:
    statistic: np.ndarray
    p_value: np.ndarray
    neg_log10_p: np.ndarray


def single_marker_wald(X, y) -> WaldResult:
    """Per-marker simple regression ``y = a + b x_j``; two-sided t test on ``b``.

    p-values are floored at 1e-300 so ``-log10 p`` stays finite.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 3:
        raise ValueError("Wald test needs at least 3 individuals")
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sxx = np.einsum("ij,ij->j", Xc, Xc)
    if np.any(sxx == 0):
        raise DegenerateColumn(f"constant column at index {int(np.argmax(sxx == 0))}")
    b = (Xc.T @ yc) / sxx
    resid = yc[:, None] - Xc * b
    rss = np.einsum("ij,ij->j", resid, resid)
    # residuals at rounding level are a perfect fit
    rss[rss <= 64 * n * np.finfo(float).eps ** 2 * float(yc @ yc)] = 0.0
    se = np.sqrt(rss / (n - 2) / sxx)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, b / se, np.copysign(np.inf, b))
    t = np.where((se == 0) & (b == 0), 0.0, t)
    p = 2.0 * stats.t.sf(np.abs(t), n - 2)
    p = np.maximum(p, P_VALUE_FLOOR)
    return WaldResult(t, p, -np.log10(p))
