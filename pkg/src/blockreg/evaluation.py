"""Posterior summaries, marker ranking, precision-recall curves and the benchmark loop."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import bernoulli_prior_chain, lasso_cv, lasso_fit, ridge_fit, single_marker_wald
from .data import Hyperparameters, SampleTrace, SamplingSchedule
from .errors import EmptyTrace, EmptyTruth, ReplicateFailure
from .gibbs import run_chain
from .simulate import SimConfig, simulate

METHODS = ("block", "bernoulli", "ridge", "lasso", "wald")
RANK_MODES = ("abs_beta", "p_c")
RECALL_GRID = np.round(np.arange(1, 11) / 10, 10)


@dataclass
class PosteriorSummary:
    p_c: np.ndarray
    beta_mean: np.ndarray
    beta_best: np.ndarray
    c_best: np.ndarray
    n_samples: int
    best_index: int


def posterior_summary(trace: SampleTrace) -> PosteriorSummary:
    """Activation frequencies, posterior-mean coefficients and the lowest-train-error sample."""
    n = len(trace)
    if n == 0:
        raise EmptyTrace("trace has no retained samples")
    best = int(np.argmin(trace.train_error))  # first minimum wins ties
    return PosteriorSummary(
        p_c=trace.c.sum(axis=0) / n,
        beta_mean=trace.beta.mean(axis=0),
        beta_best=trace.beta[best].copy(),
        c_best=trace.c[best].copy(),
        n_samples=n,
        best_index=best,
    )


def rank_markers(scores, mode: str = "abs_beta") -> np.ndarray:
    """Marker indices from most to least relevant; ties keep index order."""
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    if mode == "abs_beta":
        key = -np.abs(scores)
    elif mode in ("p_c", "score"):
        key = -scores
    else:
        raise ValueError(f"unknown rank mode {mode!r}")
    return np.argsort(key, kind="stable")


@dataclass
class PRCurve:
    k: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    auprc: float
    hits: np.ndarray = field(repr=False, default=None)

    def precision_at_recall(self, levels=RECALL_GRID) -> np.ndarray:
        """Precision at the first cutoff whose recall reaches each level."""
        idx = np.searchsorted(self.recall, np.asarray(levels) - 1e-12, side="left")
        return self.precision[np.minimum(idx, len(self.precision) - 1)]


def precision_recall(ranking, truth) -> PRCurve:
    truth = set(int(t) for t in truth)
    if not truth:
        raise EmptyTruth("truth set is empty")
    ranking = np.asarray(ranking, dtype=int)
    relevant = np.fromiter((int(r) in truth for r in ranking), dtype=bool, count=len(ranking))
    hits = np.cumsum(relevant)
    k = np.arange(1, len(ranking) + 1)
    precision = hits / k
    recall = hits / len(truth)
    # step integration: each new recall level contributes its precision
    auprc = float(np.sum(precision[relevant]) / len(truth))
    return PRCurve(k, precision, recall, auprc, hits)


def random_ranking_auprc(J: int, n_true: int) -> float:
    """Expected step-integrated AUPRC of a uniformly random ranking."""
    harmonic = sum(1.0 / k for k in range(1, J + 1))
    if J == 1:
        return 1.0
    return (harmonic + (J - harmonic) * (n_true - 1) / (J - 1)) / J


def centered_design(dataset):
    """Column-centred genotypes and centred phenotype; returns ``(X, y, y_offset)``."""
    X = dataset.X - dataset.X.mean(axis=0)
    offset = float(dataset.y.mean())
    return np.asfortranarray(X), dataset.y - offset, offset


@dataclass
class MethodFit:
    method: str
    scores: np.ndarray
    rank_mode: str
    trace: SampleTrace | None = None
    summary: PosteriorSummary | None = None
    beta: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


def fit_method(method, dataset, hyper=Hyperparameters(), schedule=SamplingSchedule(),
               rank_mode="abs_beta", ridge_reg=0.1, cv_seed=0, sigma_shape="paper") -> MethodFit:
    """Fit one method on a dataset and return the scores used for ranking."""
    if method == "wald":
        res = single_marker_wald(dataset.X, dataset.y)
        return MethodFit(method, res.neg_log10_p, "score", extra={"wald": res})
    X, y, offset = centered_design(dataset)
    if method in ("block", "bernoulli"):
        if method == "block":
            trace = run_chain(X, y, dataset.markers, hyper, schedule, sigma_shape=sigma_shape)
        else:
            trace = bernoulli_prior_chain(X, y, hyper, schedule, sigma_shape=sigma_shape)
        summ = posterior_summary(trace)
        scores = summ.beta_mean if rank_mode == "abs_beta" else summ.p_c
        return MethodFit(method, scores, rank_mode, trace, summ, summ.beta_mean, {"offset": offset})
    if method == "ridge":
        beta = ridge_fit(X, y, ridge_reg)
        return MethodFit(method, beta, "abs_beta", beta=beta, extra={"offset": offset})
    if method == "lasso":
        penalty = lasso_cv(X, y, seed=cv_seed)
        fit = lasso_fit(X, y, penalty)
        return MethodFit(method, fit.beta, "abs_beta", beta=fit.beta,
                         extra={"offset": offset, "penalty": penalty, "kkt": fit.max_kkt_violation})
    raise ValueError(f"unknown method {method!r}")


def replicate_seeds(master_seed: int, replicates: int) -> list:
    """(simulation, sampler, cross-validation) seeds per replicate."""
    children = np.random.SeedSequence(master_seed).spawn(replicates)
    return [tuple(int(s) for s in ch.generate_state(3, dtype=np.uint64)) for ch in children]


@dataclass
class ReplicateResult:
    index: int
    seeds: tuple
    n_markers: int
    n_causal: int
    mean_snps_per_block: float
    auprc: dict
    precision_at_recall: dict
    trace_finite: dict
    spike_consistent: dict


def _run_replicate(args):
    index, seeds, config, methods, schedule, hyper, rank_mode = args
    sim_seed, mcmc_seed, cv_seed = seeds
    try:
        sim = simulate(replace(config, seed=sim_seed))
        truth = sim.causal_indices
        auprc, par, finite, spike = {}, {}, {}, {}
        for method in methods:
            fit = fit_method(method, sim.dataset, hyper, replace(schedule, seed=mcmc_seed),
                             rank_mode, cv_seed=cv_seed)
            curve = precision_recall(rank_markers(fit.scores, fit.rank_mode), truth)
            auprc[method] = curve.auprc
            par[method] = curve.precision_at_recall()
            if fit.trace is not None:
                finite[method] = fit.trace.is_finite()
                spike[method] = fit.trace.spike_consistent()
    except Exception as exc:
        raise ReplicateFailure(sim_seed, exc) from exc
    return ReplicateResult(index, seeds, sim.dataset.J, len(truth), sim.mean_snps_per_block,
                           auprc, par, finite, spike)


@dataclass
class BenchmarkResult:
    methods: tuple
    replicates: list

    def auprc(self, method) -> np.ndarray:
        return np.array([r.auprc[method] for r in self.replicates])

    def mean_auprc(self, method) -> float:
        return float(self.auprc(method).mean())

    def se_auprc(self, method):
        a = self.auprc(method)
        return float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else None

    def mean_precision_at_recall(self, method) -> np.ndarray:
        return np.mean([r.precision_at_recall[method] for r in self.replicates], axis=0)

    def se_precision_at_recall(self, method):
        p = np.array([r.precision_at_recall[method] for r in self.replicates])
        return p.std(axis=0, ddof=1) / math.sqrt(len(p)) if len(p) > 1 else None

    @property
    def all_finite(self) -> bool:
        return all(all(r.trace_finite.values()) for r in self.replicates)

    @property
    def all_spike_consistent(self) -> bool:
        return all(all(r.spike_consistent.values()) for r in self.replicates)


def benchmark(replicates: int, config: SimConfig = SimConfig(), methods=METHODS,
              schedule: SamplingSchedule = SamplingSchedule(), hyper=Hyperparameters(),
              master_seed: int = 0, rank_mode="abs_beta", n_jobs: int = 1) -> BenchmarkResult:
    """Simulate ``replicates`` datasets, fit each method and score its ranking.

    Seeds for every replicate derive from ``master_seed``; results are ordered
    by replicate index whatever ``n_jobs`` is.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    jobs = [(i, s, config, methods, schedule, hyper, rank_mode)
            for i, s in enumerate(replicate_seeds(master_seed, replicates))]
    if n_jobs == 1:
        results = [_run_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_replicate, jobs))
    return BenchmarkResult(methods, sorted(results, key=lambda r: r.index))
