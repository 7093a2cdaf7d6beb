"""Building and validating a dataset by hand.

Run with ``python demos/01_data_model.py``.
"""
# %%
# A dataset is three aligned pieces: a 0/1/2 genotype matrix (individuals by
# markers), a marker map with positions in kb and a per-interval
# recombination rate, and one phenotype value per individual.
import numpy as np

from blockreg.data import GenotypeMatrix, MarkerMap, validate_dataset
from blockreg.errors import DatasetError

rng = np.random.default_rng(0)
G = rng.integers(0, 3, size=(12, 5))
markers = MarkerMap(positions_kb=np.array([0.0, 1.5, 2.0, 6.0, 6.5]), rho=np.full(5, 0.2))
y = G[:, 1] * 1.5 + rng.normal(size=12)

ds = validate_dataset(GenotypeMatrix(G, tuple(f"snp{j}" for j in range(5))), markers, y)
print("individuals:", ds.n, "markers:", ds.J)

# %%
# Distances between neighbouring markers and the products d * rho drive the
# indicator prior. The first marker has no left neighbour.
print("d (kb):", markers.d)
print("d * rho:", markers.d_rho)

# %%
# Validation rejects inconsistent input, e.g. a genotype outside {0, 1, 2}
# or positions that are not sorted.
bad = G.copy()
bad[0, 0] = 3
for label, args in [("genotype 3", (GenotypeMatrix(bad, ds.genotypes.marker_ids), markers, y)),
                    ("short phenotype", (ds.genotypes, markers, y[:-1]))]:
    try:
        validate_dataset(*args)
    except (DatasetError, ValueError) as exc:
        print(f"{label}: {type(exc).__name__}: {exc}")
