"""Block-structured genotype/phenotype simulator with known causal markers.

Haplotypes are mosaics of a few ancestral sequences. Recombination events
fall along the region as a Poisson process with rate ``rho_per_kb``; at each
event every sample haplotype re-draws the ancestor it copies from. Between
two events all haplotypes keep their copy source, which gives runs of
markers in tight linkage. Copied alleles are flipped with a small
probability to mimic mutation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .data import Dataset, GenotypeMatrix, MarkerMap, validate_dataset
from .errors import AllMarkersFiltered, InfeasibleBlocks, OddHaplotypeCount


@dataclass(frozen=True)
class SimConfig:
    n_haplotypes: int = 360
    region_kb: float = 40.0
    markers_per_kb: float = 0.8
    rho_per_kb: float = 0.1
    n_ancestors: int = 8
    mutation_flip_prob: float = 0.01
    maf_threshold: float = 0.01
    causal_block_sizes: tuple = (3, 2, 5)
    beta_causal: float = 2.5
    noise_sd: float = 1.0
    seed: int = 0
    strict_blocks: bool = False
    coalescent_scaling: bool = True

    def __post_init__(self):
        if self.n_haplotypes % 2:
            raise OddHaplotypeCount(f"n_haplotypes must be even, got {self.n_haplotypes}")
        for name in ("region_kb", "markers_per_kb", "rho_per_kb", "mutation_flip_prob", "noise_sd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.n_ancestors < 1:
            raise ValueError("need at least one ancestor")
        if not 0 <= self.maf_threshold < 0.5:
            raise ValueError("maf_threshold must lie in [0, 0.5)")
        if not self.causal_block_sizes or min(self.causal_block_sizes) < 1:
            raise ValueError("causal_block_sizes must be nonempty positive counts")
        object.__setattr__(self, "causal_block_sizes", tuple(int(s) for s in self.causal_block_sizes))


class HaplotypeSample(NamedTuple):
    H: np.ndarray  # n_haplotypes x J, {0, 1}
    markers: MarkerMap
    source: np.ndarray  # ancestor copied by each haplotype at each marker
    breakpoints_kb: np.ndarray  # recombination event positions


@dataclass(frozen=True, eq=False)
class SimDataset:
    dataset: Dataset
    causal_indices: np.ndarray
    true_beta: np.ndarray
    block_count: int
    mean_snps_per_block: float
    config: SimConfig = field(default_factory=SimConfig)
    max_block_breaks: int = 0  # switches allowed inside a causal block (0 = recombination-free)

    @property
    def genotypes(self) -> GenotypeMatrix:
        return self.dataset.genotypes

    @property
    def markers(self) -> MarkerMap:
        return self.dataset.markers

    @property
    def phenotype(self) -> np.ndarray:
        return self.dataset.y


def harmonic_factor(n_haplotypes: int) -> float:
    """``sum_{i=1}^{n-1} 1/i``: expected segregating sites (and recombination
    events) in a coalescent sample of ``n`` per unit of scaled rate."""
    return float(np.sum(1.0 / np.arange(1, max(n_haplotypes, 2))))


def generate_haplotypes(config: SimConfig, rng) -> HaplotypeSample:
    """Sample mosaic haplotypes over the region.

    With ``coalescent_scaling`` the marker density and recombination rate are
    read as population-scaled rates per kb, so the expected number of markers
    and of recombination events are multiplied by :func:`harmonic_factor`.
    Otherwise both are used as plain per-kb intensities.
    """
    length = config.region_kb
    scale = harmonic_factor(config.n_haplotypes) if config.coalescent_scaling else 1.0
    J = max(int(rng.poisson(config.markers_per_kb * length * scale)), 1)
    positions = np.sort(rng.uniform(0.0, length, J))
    n_events = int(rng.poisson(config.rho_per_kb * length * scale))
    breakpoints = np.sort(rng.uniform(0.0, length, n_events))

    freq = rng.uniform(0.05, 0.95, J)
    ancestors = (rng.random((config.n_ancestors, J)) < freq).astype(np.int8)

    n_hap = config.n_haplotypes
    # segment k covers positions in [breakpoints[k-1], breakpoints[k])
    segment_of = np.searchsorted(breakpoints, positions, side="right")
    labels = rng.integers(0, config.n_ancestors, size=(n_hap, n_events + 1))
    source = labels[:, segment_of]
    H = ancestors[source, np.arange(J)]
    flips = rng.random(H.shape) < config.mutation_flip_prob
    H = np.where(flips, 1 - H, H).astype(np.int8)

    rho = np.full(J, float(config.rho_per_kb))
    return HaplotypeSample(H, MarkerMap(positions, rho), source, breakpoints)


def pair_genotypes(H, rng) -> GenotypeMatrix:
    """Pair haplotype rows at random and count the minor allele per marker."""
    H = np.asarray(H)
    if H.shape[0] % 2:
        raise OddHaplotypeCount(f"cannot pair {H.shape[0]} haplotypes")
    order = rng.permutation(H.shape[0])
    G = (H[order[0::2]] + H[order[1::2]]).astype(np.int8)
    n = G.shape[0]
    flip = G.sum(axis=0) > n  # allele 1 is the major allele
    G[:, flip] = 2 - G[:, flip]
    marker_ids = tuple(f"snp{j:04d}" for j in range(G.shape[1]))
    individual_ids = tuple(f"ind{i:04d}" for i in range(n))
    return GenotypeMatrix(G, marker_ids, individual_ids)


def minor_allele_frequency(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    f = values.mean(axis=0) / 2.0
    return np.minimum(f, 1.0 - f)


def maf_filter(genotypes: GenotypeMatrix, markers: MarkerMap, threshold: float):
    """Drop markers with MAF <= threshold.

    Returns ``(genotypes, markers, kept)``. The rate on a merged interval is
    the length-weighted mean of the per-kb rates it spans.
    """
    if not 0 <= threshold < 0.5:
        raise ValueError("threshold must lie in [0, 0.5)")
    kept = np.flatnonzero(minor_allele_frequency(genotypes.values) > threshold)
    if kept.size == 0:
        raise AllMarkersFiltered(f"no marker has MAF > {threshold}")
    d, rho = markers.d, markers.rho
    new_rho = np.empty(kept.size)
    new_rho[0] = rho[kept[0]]
    for i in range(1, kept.size):
        span = slice(kept[i - 1] + 1, kept[i] + 1)
        w = d[span]
        new_rho[i] = np.average(rho[span], weights=w) if w.sum() > 0 else rho[span].mean()
    new_map = MarkerMap(markers.positions_kb[kept].copy(), new_rho)
    return genotypes.subset(kept), new_map, kept


def switch_intervals(source) -> np.ndarray:
    """``out[j]`` is True when some haplotype changes ancestor between markers j-1 and j."""
    source = np.asarray(source)
    out = np.zeros(source.shape[1], dtype=bool)
    out[1:] = np.any(source[:, 1:] != source[:, :-1], axis=0)
    return out


def recombination_free_runs(switches) -> list:
    """Lengths of maximal marker runs containing no switch."""
    starts = np.flatnonzero(switches)
    edges = np.concatenate([[0], starts[starts > 0], [len(switches)]])
    return [int(b - a) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _placements(switches, size, max_breaks):
    J = len(switches)
    if size > J:
        return np.empty(0, dtype=int)
    inside = np.concatenate([[0], np.cumsum(switches[1:].astype(int))])
    starts = np.arange(J - size + 1)
    n_breaks = inside[starts + size - 1] - inside[starts]
    return starts[n_breaks <= max_breaks]


def _compatible(starts, sizes):
    spans = sorted(zip(starts, sizes))
    return all(s0 + l0 < s1 for (s0, l0), (s1, _) in zip(spans, spans[1:]))


def assign_causal_blocks(markers, source, block_sizes, rng, max_breaks: int = 0,
                         max_tries: int = 2000) -> np.ndarray:
    """Choose one contiguous run of markers per requested size.

    Each run contains at most ``max_breaks`` ancestor switches (0 means it
    lies in a recombination-free stretch), runs do not overlap and are
    separated by at least one non-causal marker. Joint placements are drawn
    uniformly among all feasible ones.
    """
    switches = switch_intervals(source)
    if len(switches) != len(markers):
        raise ValueError("source matrix does not match the marker map")
    sizes = [int(s) for s in block_sizes]
    cands = [_placements(switches, s, max_breaks) for s in sizes]
    if any(c.size == 0 for c in cands):
        raise InfeasibleBlocks(f"no placement for block sizes {sizes}", sorted(recombination_free_runs(switches), reverse=True))

    chosen = None
    for _ in range(max_tries):
        starts = [int(c[rng.integers(c.size)]) for c in cands]
        if _compatible(starts, sizes):
            chosen = starts
            break
    if chosen is None:
        feasible = [s for s in itertools.product(*cands) if _compatible(s, sizes)]
        if not feasible:
            raise InfeasibleBlocks(f"no non-overlapping placement for block sizes {sizes}", sorted(recombination_free_runs(switches), reverse=True))
        chosen = feasible[rng.integers(len(feasible))]
    return np.sort(np.concatenate([np.arange(s, s + L) for s, L in zip(chosen, sizes)]))


def generate_phenotype(genotypes, causal, beta_causal: float, noise_sd: float, rng) -> np.ndarray:
    values = genotypes.values if isinstance(genotypes, GenotypeMatrix) else np.asarray(genotypes)
    beta = np.zeros(values.shape[1])
    beta[np.asarray(causal, dtype=int)] = beta_causal
    noise = rng.normal(0.0, noise_sd, values.shape[0]) if noise_sd > 0 else np.zeros(values.shape[0])
    return values.astype(float) @ beta + noise


def simulate(config: SimConfig = SimConfig()) -> SimDataset:
    """Run the full pipeline: haplotypes, pairing, MAF filter, causal blocks, phenotype.

    When no recombination-free placement of the causal blocks exists (common at
    high recombination rates) and ``strict_blocks`` is off, the number of
    switches tolerated inside a block is raised one at a time until a
    placement is found.
    """
    rng = np.random.default_rng(config.seed)
    hap = generate_haplotypes(config, rng)
    genotypes = pair_genotypes(hap.H, rng)
    genotypes, markers, kept = maf_filter(genotypes, hap.markers, config.maf_threshold)
    source = hap.source[:, kept]

    limit = 0 if config.strict_blocks else max(config.causal_block_sizes)
    for max_breaks in range(limit + 1):
        try:
            causal = assign_causal_blocks(markers, source, config.causal_block_sizes, rng, max_breaks)
            break
        except InfeasibleBlocks:
            if max_breaks == limit:
                raise

    y = generate_phenotype(genotypes, causal, config.beta_causal, config.noise_sd, rng)
    dataset = validate_dataset(genotypes, markers, y)
    true_beta = np.zeros(dataset.J)
    true_beta[causal] = config.beta_causal
    runs = recombination_free_runs(switch_intervals(source))
    return SimDataset(
        dataset=dataset,
        causal_indices=causal,
        true_beta=true_beta,
        block_count=len(runs),
        mean_snps_per_block=float(np.mean(runs)),
        config=config,
        max_block_breaks=max_breaks,
    )
