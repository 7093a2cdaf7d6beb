"""The recombination-aware prior over activation indicators.

Run with ``python demos/02_markov_prior.py``.
"""
# %%
# Between two markers the indicator is copied unchanged unless a
# recombination happens, which has probability 1 - exp(-d rho). Tight
# linkage (small d rho) therefore makes neighbouring markers switch on and
# off together.
import numpy as np

from blockreg.data import MarkerMap
from blockreg.markov import chain_log_prior, transition_prob

for d_rho in (0.01, 0.5, 5.0):
    p = transition_prob(1, 1, d_rho, 1.0, (0.9, 0.2))
    print(f"d*rho={d_rho:<5} P(active -> active) = {p:.4f}")

# %%
# Compare two indicator patterns with the same number of active markers:
# one contiguous run and one scattered. Under tight linkage the run is far
# more probable a priori.
markers = MarkerMap(np.arange(10.0), np.full(10, 0.02))
run = np.array([0, 0, 1, 1, 1, 0, 0, 0, 0, 0])
scattered = np.array([1, 0, 0, 1, 0, 0, 0, 1, 0, 0])
params = (0.9, 0.2)
print("log prior, contiguous run:", round(chain_log_prior(run, markers, params), 3))
print("log prior, scattered     :", round(chain_log_prior(scattered, markers, params), 3))

# %%
# With loose linkage the prior forgets the neighbours and the gap closes.
loose = MarkerMap(np.arange(10.0), np.full(10, 5.0))
print("loose linkage, run vs scattered:",
      round(chain_log_prior(run, loose, params), 3), round(chain_log_prior(scattered, loose, params), 3))
