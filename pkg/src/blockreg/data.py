"""Core data types: genotypes, marker map, hyperparameters and sampler state."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import (
    ConstantColumn,
    DimensionMismatch,
    InvalidGenotype,
    NegativeDistance,
    NonFiniteValue,
)


@dataclass(frozen=True, eq=False)
class GenotypeMatrix:
    """N x J minor-allele counts in {0, 1, 2}."""

    values: np.ndarray
    marker_ids: tuple
    individual_ids: tuple | None = None

    @property
    def n_individuals(self) -> int:
        return self.values.shape[0]

    @property
    def n_markers(self) -> int:
        return self.values.shape[1]

    def subset(self, columns) -> GenotypeMatrix:
        columns = np.asarray(columns)
        return GenotypeMatrix(
            self.values[:, columns],
            tuple(self.marker_ids[k] for k in columns),
            self.individual_ids,
        )


@dataclass(frozen=True, eq=False)
class MarkerMap:
    """Marker positions (kb) and per-kb recombination rates.

    ``rho[j]`` is the rate on the interval preceding marker ``j``; ``rho[0]``
    is never used. ``d[0]`` is defined as 0.
    """

    positions_kb: np.ndarray
    rho: np.ndarray

    @cached_property
    def d(self) -> np.ndarray:
        d = np.zeros_like(self.positions_kb, dtype=float)
        d[1:] = np.diff(self.positions_kb)
        return d

    @cached_property
    def d_rho(self) -> np.ndarray:
        return self.d * self.rho

    def __len__(self):
        return len(self.positions_kb)

    def subset(self, start: int, stop: int) -> MarkerMap:
        return MarkerMap(self.positions_kb[start:stop].copy(), self.rho[start:stop].copy())


@dataclass(frozen=True, eq=False)
class Dataset:
    genotypes: GenotypeMatrix
    markers: MarkerMap
    y: np.ndarray

    @cached_property
    def X(self) -> np.ndarray:
        """Design matrix as float64, Fortran order so columns are contiguous."""
        return np.asfortranarray(self.genotypes.values, dtype=float)

    @property
    def n(self) -> int:
        return self.genotypes.n_individuals

    @property
    def J(self) -> int:
        return self.genotypes.n_markers

    def segment(self, start: int, stop: int) -> Dataset:
        return Dataset(
            self.genotypes.subset(np.arange(start, stop)),
            self.markers.subset(start, stop),
            self.y,
        )


def validate_dataset(genotypes: GenotypeMatrix, markers: MarkerMap, y) -> Dataset:
    """Check shapes and values and return an immutable :class:`Dataset`.

    Constant genotype columns are rejected (their squared norm would be zero).
    Distances are always recomputed from positions.
    """
    values = np.asarray(genotypes.values)
    if values.ndim != 2:
        raise DimensionMismatch(f"genotype matrix must be 2-D, got shape {values.shape}")
    n, J = values.shape
    if n < 2 or J < 1:
        raise DimensionMismatch(f"need N >= 2 and J >= 1, got N={n}, J={J}")
    if len(genotypes.marker_ids) != J:
        raise DimensionMismatch(f"{len(genotypes.marker_ids)} marker ids for {J} columns")
    if genotypes.individual_ids is not None and len(genotypes.individual_ids) != n:
        raise DimensionMismatch(f"{len(genotypes.individual_ids)} individual ids for {n} rows")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("genotype matrix contains non-finite values")
    bad = ~np.isin(values, (0, 1, 2))
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidGenotype(f"genotype {values[i, j].item()!r} at row {i}, marker {genotypes.marker_ids[j]!r}")
    constant = np.all(values == values[0], axis=0)
    if constant.any():
        raise ConstantColumn(genotypes.marker_ids[int(np.argmax(constant))])

    positions = np.asarray(markers.positions_kb, dtype=float)
    rho = np.asarray(markers.rho, dtype=float)
    if positions.shape != (J,) or rho.shape != (J,):
        raise DimensionMismatch(f"marker map has {positions.size} positions and {rho.size} rates for J={J}")
    if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(rho))):
        raise NonFiniteValue("marker map contains non-finite values")
    if np.any(np.diff(positions) < 0):
        k = int(np.argmax(np.diff(positions) < 0)) + 1
        raise NegativeDistance(f"position of marker {genotypes.marker_ids[k]!r} precedes its predecessor")
    if np.any(rho[1:] < 0):
        raise NegativeDistance("recombination rates must be nonnegative")

    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise DimensionMismatch(f"phenotype has shape {y.shape}, expected ({n},)")
    if not np.all(np.isfinite(y)):
        raise NonFiniteValue("phenotype contains non-finite values")

    return Dataset(
        GenotypeMatrix(values.astype(np.int8), tuple(genotypes.marker_ids), genotypes.individual_ids),
        MarkerMap(positions.copy(), rho.copy()),
        y.copy(),
    )


@dataclass(frozen=True)
class Hyperparameters:
    """Prior settings. Beta(10, 2) defaults for the transition and Bernoulli priors."""

    nu0: float = 1.0
    s0_sq: float = 1.0
    alpha: float = 1.0
    gamma: float = 1.0
    a00: float = 10.0
    b00: float = 2.0
    a10: float = 10.0
    b10: float = 2.0
    bern_a: float = 10.0
    bern_b: float = 2.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"hyperparameter {name} must be finite and > 0, got {value}")

    def replace(self, **kw) -> Hyperparameters:
        return replace(self, **kw)


@dataclass(frozen=True)
class SamplingSchedule:
    burn_in: int = 2000
    iterations: int = 5000
    thin: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.iterations < self.thin:
            raise ValueError("iterations must be >= thin")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_retained(self) -> int:
        return self.iterations // self.thin


@dataclass
class ModelState:
    """One Gibbs state.

    For the independent-Bernoulli model the inclusion probability ``p`` is
    stored as ``pi1 = p`` and ``pi0 = 1 - p`` (a Markov chain whose rows are
    both ``(1 - p, p)``).
    """

    beta: np.ndarray
    c: np.ndarray
    sigma_sq: float
    lam: float
    pi0: float
    pi1: float

    def copy(self) -> ModelState:
        return ModelState(self.beta.copy(), self.c.copy(), self.sigma_sq, self.lam, self.pi0, self.pi1)

    def check(self):
        if not np.all(self.beta[self.c == 0] == 0.0):
            raise AssertionError("inactive marker with nonzero coefficient")
        if not (self.sigma_sq > 0 and self.lam > 0 and 0 < self.pi0 < 1 and 0 < self.pi1 < 1):
            raise AssertionError(f"state out of range: sigma_sq={self.sigma_sq}, lam={self.lam}, "
                                 f"pi0={self.pi0}, pi1={self.pi1}")


def initial_state(X, y, hyper: Hyperparameters) -> ModelState:
    """All-inactive starting point; sigma^2 from the sample variance of y."""
    J = X.shape[1]
    var = float(np.var(y, ddof=1)) if len(y) > 1 else 0.0
    return ModelState(
        beta=np.zeros(J),
        c=np.zeros(J, dtype=np.int8),
        sigma_sq=var if var > 0 else 1.0,
        lam=1.0,
        pi0=hyper.a00 / (hyper.a00 + hyper.b00),
        pi1=hyper.a10 / (hyper.a10 + hyper.b10),
    )


@dataclass
class SampleTrace:
    """Retained snapshots stored column-wise."""

    beta: np.ndarray
    c: np.ndarray
    sigma_sq: np.ndarray
    lam: np.ndarray
    pi0: np.ndarray
    pi1: np.ndarray
    train_error: np.ndarray
    schedule: SamplingSchedule = field(default_factory=SamplingSchedule)

    @classmethod
    def empty(cls, n: int, J: int, schedule: SamplingSchedule) -> SampleTrace:
        return cls(
            beta=np.zeros((n, J)),
            c=np.zeros((n, J), dtype=np.int8),
            sigma_sq=np.zeros(n),
            lam=np.zeros(n),
            pi0=np.zeros(n),
            pi1=np.zeros(n),
            train_error=np.zeros(n),
            schedule=schedule,
        )

    def record(self, k: int, state: ModelState, train_error: float):
        self.beta[k] = state.beta
        self.c[k] = state.c
        self.sigma_sq[k] = state.sigma_sq
        self.lam[k] = state.lam
        self.pi0[k] = state.pi0
        self.pi1[k] = state.pi1
        self.train_error[k] = train_error

    def __len__(self):
        return len(self.train_error)

    def state(self, k: int) -> ModelState:
        return ModelState(
            self.beta[k].copy(), self.c[k].copy(), float(self.sigma_sq[k]),
            float(self.lam[k]), float(self.pi0[k]), float(self.pi1[k]),
        )

    def is_finite(self) -> bool:
        return all(
            np.all(np.isfinite(a))
            for a in (self.beta, self.sigma_sq, self.lam, self.pi0, self.pi1, self.train_error)
        )

    def spike_consistent(self) -> bool:
        return bool(np.all(self.beta[self.c == 0] == 0.0))
