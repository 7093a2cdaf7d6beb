"""Compiled scalar kernels shared by the public sampler functions."""
import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)
_SQRT1_2 = 1.0 / math.sqrt(2.0)
# exp(-x) is treated as exactly zero past this point
MAX_DRHO = 700.0


@njit(cache=True)
def log_ndtr(a):
    """log of the standard normal CDF, accurate in both tails."""
    if a > 0.0:
        return math.log1p(-0.5 * math.erfc(a * _SQRT1_2))
    if a > -20.0:
        return math.log(0.5 * math.erfc(-a * _SQRT1_2))
    # asymptotic expansion of the lower tail
    log_lhs = -0.5 * a * a - math.log(-a) - 0.5 * LOG_2PI
    last = 0.0
    total = 1.0
    num = 1.0
    denom = 1.0
    inv_a2 = 1.0 / (a * a)
    sign = 1.0
    i = 0
    while abs(last - total) > 2.220446049250313e-16 and i < 100:
        i += 1
        last = total
        sign = -sign
        denom *= inv_a2
        num *= 2 * i - 1
        total += sign * num * denom
    return log_lhs + math.log(total)


@njit(cache=True)
def logaddexp(a, b):
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@njit(cache=True)
def active_stats(S_xx, S_zx, S_zz, n, sigma_sq, lam):
    """(log_A_minus, log_A_plus, mu_minus, mu_plus, s_sq, log_K)."""
    h = 0.5 / lam
    two_s2 = 2.0 * sigma_sq
    mu_minus = (S_zx + h) / S_xx
    mu_plus = (S_zx - h) / S_xx
    s_sq = sigma_sq / S_xx
    s = math.sqrt(s_sq)
    log_norm = 0.5 * (LOG_2PI + math.log(s_sq))
    log_A_minus = -(S_zz - (S_zx + h) ** 2 / S_xx) / two_s2 + log_norm + log_ndtr(-mu_minus / s)
    log_A_plus = -(S_zz - (S_zx - h) ** 2 / S_xx) / two_s2 + log_norm + log_ndtr(mu_plus / s)
    log_K = -0.5 * n * (LOG_2PI + math.log(sigma_sq)) - math.log(4.0 * lam * sigma_sq)
    return log_A_minus, log_A_plus, mu_minus, mu_plus, s_sq, log_K


@njit(cache=True)
def inactive_loglik(S_zz, n, sigma_sq):
    return -0.5 * n * (LOG_2PI + math.log(sigma_sq)) - S_zz / (2.0 * sigma_sq)


@njit(cache=True)
def std_above(a, rng):
    """``z - a`` for ``z ~ N(0, 1)`` conditioned on ``z > a``.

    Plain rejection for ``a <= 0`` (acceptance >= 1/2); otherwise an
    exponential proposal with rate ``(a + sqrt(a^2 + 4)) / 2`` (Robert, 1995).
    """
    if a <= 0.0:
        while True:
            z = rng.standard_normal()
            if z > a:
                return z - a
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        e = rng.standard_exponential() / alpha
        t = a + e - alpha
        if e > 0.0 and rng.random() <= math.exp(-0.5 * t * t):
            return e


@njit(cache=True)
def truncnorm_draw(mean, sd, positive, rng):
    # x = mean + sd * z = +-sd * (z - a), so the sign is exact
    if positive:
        return sd * std_above(-mean / sd, rng)
    return -sd * std_above(mean / sd, rng)


@njit(cache=True)
def truncnorm_fill(mean, sd, positive, out, rng):
    for i in range(out.size):
        out[i] = truncnorm_draw(mean, sd, positive, rng)


@njit(cache=True)
def beta_draw(log_A_minus, log_A_plus, mu_minus, mu_plus, s_sq, rng):
    p_neg = math.exp(log_A_minus - logaddexp(log_A_minus, log_A_plus))
    sd = math.sqrt(s_sq)
    if rng.random() < p_neg:
        return truncnorm_draw(mu_minus, sd, False, rng)
    return truncnorm_draw(mu_plus, sd, True, rng)


@njit(cache=True)
def _trans(stay, move, a, b, pi0, pi1):
    if a == 0:
        p = pi0 if b == 0 else 1.0 - pi0
    else:
        p = pi1 if b == 1 else 1.0 - pi1
    return stay * (1.0 if a == b else 0.0) + move * p


@njit(cache=True)
def _log(p):
    return math.log(p) if p > 0.0 else -math.inf


@njit(cache=True)
def markov_log_prior_pair(c, j, stay, move, pi0, pi1):
    J = c.size
    if j == 0:
        lp0 = math.log(0.5)
        lp1 = math.log(0.5)
    else:
        left = c[j - 1]
        lp0 = _log(_trans(stay[j], move[j], left, 0, pi0, pi1))
        lp1 = _log(_trans(stay[j], move[j], left, 1, pi0, pi1))
    if j + 1 < J:
        right = c[j + 1]
        lp0 += _log(_trans(stay[j + 1], move[j + 1], 0, right, pi0, pi1))
        lp1 += _log(_trans(stay[j + 1], move[j + 1], 1, right, pi0, pi1))
    return lp0, lp1


@njit(cache=True)
def update_markers(X, y, fitted, S_xx, beta, c, sigma_sq, lam,
                   bernoulli, stay, move, pi0, pi1, rng):
    """Left-to-right pass drawing ``c_j`` (beta_j integrated out) then ``beta_j``.

    ``fitted`` (= X beta) is kept current in place. Returns False if both
    indicator states of some marker had zero probability.
    """
    n, J = X.shape
    for j in range(J):
        bj = beta[j]
        S_zx = 0.0
        S_zz = 0.0
        for i in range(n):
            zi = y[i] - fitted[i] + X[i, j] * bj
            S_zx += zi * X[i, j]
            S_zz += zi * zi
        lAm, lAp, mum, mup, s_sq, lK = active_stats(S_xx[j], S_zx, S_zz, n, sigma_sq, lam)
        ll1 = lK + logaddexp(lAm, lAp)
        ll0 = inactive_loglik(S_zz, n, sigma_sq)
        if bernoulli:
            lp0 = math.log1p(-pi1)
            lp1 = math.log(pi1)
        else:
            lp0, lp1 = markov_log_prior_pair(c, j, stay, move, pi0, pi1)
        w0 = ll0 + lp0
        w1 = ll1 + lp1
        if w0 == -math.inf and w1 == -math.inf:
            return False
        p1 = math.exp(w1 - logaddexp(w0, w1))
        cj = 1 if rng.random() < p1 else 0
        c[j] = cj
        new_b = 0.0
        if cj == 1:
            new_b = beta_draw(lAm, lAp, mum, mup, s_sq, rng)
        if new_b != bj:
            delta = new_b - bj
            for i in range(n):
                fitted[i] += X[i, j] * delta
            beta[j] = new_b
    return True


@njit(cache=True)
def lasso_cd(G, grad, diag, penalty, beta, tol, kkt_tol, max_cycles):
    """Cyclic coordinate descent on the Gram form.

    ``grad`` (= X'y - G beta) is kept current in place. Stops once a full
    cycle moves no coefficient by more than ``tol`` and the optimality
    conditions hold to ``kkt_tol``. Returns ``(cycles, converged)``.
    """
    J = beta.size
    for cycle in range(1, max_cycles + 1):
        biggest = 0.0
        for j in range(J):
            old = beta[j]
            r = grad[j] + diag[j] * old
            mag = abs(r) - penalty
            new = 0.0
            if mag > 0.0:
                new = math.copysign(mag, r) / diag[j]
            if new != old:
                delta = new - old
                for k in range(J):
                    grad[k] -= G[k, j] * delta
                beta[j] = new
                biggest = max(biggest, abs(delta))
        if biggest < tol:
            worst = 0.0
            for j in range(J):
                if beta[j] == 0.0:
                    v = max(abs(grad[j]) - penalty, 0.0)
                else:
                    v = abs(grad[j] - math.copysign(penalty, beta[j]))
                worst = max(worst, v)
            if worst <= kkt_tol:
                return cycle, True
    return max_cycles, False
