"""Comparison methods: ridge, lasso, the independent-Bernoulli prior and Wald tests.

Run with ``python demos/04_baselines.py``.
"""
# %%
import numpy as np

from blockreg.baselines import bernoulli_prior_chain, kkt_violation, lasso_cv, lasso_fit, ridge_fit, single_marker_wald
from blockreg.data import Hyperparameters, SamplingSchedule
from blockreg.evaluation import centered_design, posterior_summary
from blockreg.simulate import SimConfig, simulate

sim = simulate(SimConfig(rho_per_kb=0.5, seed=4))
X, y, _ = centered_design(sim.dataset)
causal = sim.causal_indices

# %%
# Ridge with the default penalty of 0.1 and a cross-validated lasso. The
# lasso fit comes with an optimality certificate.
beta_ridge = ridge_fit(X, y, 0.1)
penalty = lasso_cv(X, y, seed=0)
fit = lasso_fit(X, y, penalty)
print("lasso penalty:", round(penalty, 3), "nonzero:", int(np.count_nonzero(fit.beta)),
      "KKT violation:", f"{kkt_violation(X, y, fit.beta, penalty):.1e}")

# %%
# The same sampler with independent Bernoulli(p) indicators, p ~ Beta(10, 2).
trace = bernoulli_prior_chain(X, y, Hyperparameters(), SamplingSchedule(500, 2000, 5, 0))
summ = posterior_summary(trace)

# %%
# Single-marker Wald tests rank markers by -log10 p.
wald = single_marker_wald(sim.dataset.X, sim.dataset.y)
for name, score in [("ridge", np.abs(beta_ridge)), ("lasso", np.abs(fit.beta)),
                    ("bernoulli", np.abs(summ.beta_mean)), ("wald", wald.neg_log10_p)]:
    top = np.argsort(-score, kind="stable")[:10]
    print(f"{name:<9} causal markers among top 10: {np.isin(top, causal).sum()}")
