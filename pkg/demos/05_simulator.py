"""Simulating block-structured genotypes with known causal markers.

Run with ``python demos/05_simulator.py``.
"""
# %%
# Haplotypes are mosaics of a few ancestors; recombination events split the
# region into stretches where every haplotype keeps copying the same
# ancestor. Causal markers are placed inside such stretches.
import numpy as np

from blockreg.simulate import SimConfig, simulate

sim = simulate(SimConfig(seed=1))
print("individuals x markers:", sim.dataset.X.shape)
print("causal markers:", sim.causal_indices.tolist())
print("recombination-free blocks:", sim.block_count, "mean markers per block:", round(sim.mean_snps_per_block, 2))

# %%
# Block length falls as the recombination rate grows.
for rho in (0.05, 0.1, 0.5, 1.0):
    m = np.mean([simulate(SimConfig(rho_per_kb=rho, seed=s)).mean_snps_per_block for s in range(20)])
    print(f"rho={rho:<5} mean markers per block: {m:.2f}")

# %%
# Linkage shows up as correlation between neighbouring genotype columns.
for rho in (0.05, 1.0):
    X = simulate(SimConfig(rho_per_kb=rho, seed=2)).dataset.X
    r = [abs(np.corrcoef(X[:, j - 1], X[:, j])[0, 1]) for j in range(1, X.shape[1])]
    print(f"rho={rho:<5} mean |corr| of adjacent markers: {np.mean(r):.3f}")
