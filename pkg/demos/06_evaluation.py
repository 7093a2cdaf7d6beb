"""Ranking markers and scoring rankings with precision-recall curves.

Run with ``python demos/06_evaluation.py``. The benchmark at the end uses a
short sampler schedule so it finishes in well under a minute.
"""
# %%
import numpy as np

from blockreg.data import SamplingSchedule
from blockreg.evaluation import benchmark, precision_recall, random_ranking_auprc, rank_markers
from blockreg.simulate import SimConfig

# Ranking by |score|, ties broken by marker index.
print(rank_markers([0.1, -3.0, 2.0]))

# %%
# Step-integrated AUPRC: a perfect ranking scores 1, a random one scores the
# analytic baseline.
truth = range(10)
print("perfect:", precision_recall(np.arange(100), truth).auprc)
rng = np.random.default_rng(0)
mc = np.mean([precision_recall(rng.permutation(100), truth).auprc for _ in range(2000)])
print(f"random: Monte Carlo {mc:.4f}, analytic {random_ranking_auprc(100, 10):.4f}")

# %%
# A small benchmark over simulated replicates.
res = benchmark(3, SimConfig(rho_per_kb=0.05, beta_causal=2.0), ("block", "bernoulli", "ridge", "lasso", "wald"),
                SamplingSchedule(burn_in=300, iterations=1000, thin=5), master_seed=1)
for m in res.methods:
    print(f"{m:<9} mean AUPRC {res.mean_auprc(m):.3f} +/- {res.se_auprc(m):.3f}")
