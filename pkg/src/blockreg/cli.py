"""Command-line entry point: simulate, fit, ridge, lasso, wald, benchmark."""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .baselines import single_marker_wald
from .data import Hyperparameters, SamplingSchedule
from .errors import BlockRegError
from .evaluation import METHODS, RECALL_GRID, benchmark, fit_method
from .io import (
    GENOTYPES,
    MANIFEST,
    MARKERS,
    PHENOTYPE,
    PR_CURVE,
    TRUTH,
    _write_rows,
    read_config,
    read_dataset,
    read_truth,
    run_segmented,
    write_dataset,
    write_manifest,
    write_outputs,
    write_truth,
    write_wald,
)
from .simulate import SimConfig, simulate

SEED_MOD = 2 ** 64
HYPER_FIELDS = ("nu0", "s0_sq", "alpha", "gamma", "a00", "b00", "a10", "b10", "bern_a", "bern_b")


def _seed(text) -> int:
    v = int(text)
    if not 0 <= v < SEED_MOD:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _count(text) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _sizes(text) -> tuple:
    try:
        return tuple(int(s) for s in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated counts, got {text!r}") from None


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _common(p):
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="key=value file; flags given on the command line win")


def _inputs(p):
    p.add_argument("--data", help=f"directory holding {GENOTYPES}, {MARKERS} and {PHENOTYPE}")
    p.add_argument("--genotypes")
    p.add_argument("--markers")
    p.add_argument("--phenotype")
    p.add_argument("--truth", help="truth.tsv from `simulate`; enables pr_curve.tsv")
    p.add_argument("--segment-size", type=_count, default=0, help="markers per segment (0 = whole region)")


def _sim_options(p):
    d = SimConfig()
    p.add_argument("--n-haplotypes", type=int, default=d.n_haplotypes)
    p.add_argument("--region-kb", type=float, default=d.region_kb)
    p.add_argument("--markers-per-kb", type=float, default=d.markers_per_kb)
    p.add_argument("--rho", type=float, default=d.rho_per_kb, help="recombination rate per kb")
    p.add_argument("--n-ancestors", type=int, default=d.n_ancestors)
    p.add_argument("--mutation-flip-prob", type=float, default=d.mutation_flip_prob)
    p.add_argument("--maf", type=float, default=d.maf_threshold)
    p.add_argument("--blocks", type=_sizes, default=d.causal_block_sizes, help="causal block sizes, e.g. 3,2,5")
    p.add_argument("--beta", type=float, default=d.beta_causal, help="effect of each causal marker")
    p.add_argument("--noise-sd", type=float, default=d.noise_sd)
    p.add_argument("--strict-blocks", type=_flag, nargs="?", const=True, default=False)
    p.add_argument("--coalescent-scaling", type=_flag, nargs="?", const=True, default=True)


def _sampler_options(p):
    p.add_argument("--burn-in", type=_count, default=2000)
    p.add_argument("--iters", type=_count, default=5000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--sigma-shape", choices=("paper", "active"), default="paper")
    p.add_argument("--rank-mode", choices=("abs_beta", "p_c"), default="abs_beta")
    d = Hyperparameters()
    for name in HYPER_FIELDS:
        p.add_argument("--" + name.replace("_", "-"), type=float, default=getattr(d, name))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockreg", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate genotypes, phenotype and causal truth")
    _common(p)
    _sim_options(p)

    p = sub.add_parser("fit", help="spike-and-Laplace regression by Gibbs sampling")
    _common(p)
    _inputs(p)
    p.add_argument("--prior", choices=("block", "bernoulli"), default="block")
    _sampler_options(p)

    p = sub.add_parser("ridge", help="ridge regression")
    _common(p)
    _inputs(p)
    p.add_argument("--reg", type=float, default=0.1)

    p = sub.add_parser("lasso", help="lasso with cross-validated penalty")
    _common(p)
    _inputs(p)
    p.add_argument("--penalty", type=float, default=None, help="skip cross-validation and use this penalty")
    p.add_argument("--folds", type=int, default=5)

    p = sub.add_parser("wald", help="single-marker Wald tests")
    _common(p)
    _inputs(p)

    p = sub.add_parser("benchmark", help="simulate replicates and compare methods by AUPRC")
    _common(p)
    _sim_options(p)
    _sampler_options(p)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--methods", default="block,bernoulli,ridge,lasso")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        values = read_config(args.config)
        unknown = sorted(set(values) - known)
        if unknown:
            parser.error(f"unknown key(s) in {args.config}: {', '.join(unknown)}")
        # string defaults go through each option's type converter
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def _hyper(args) -> Hyperparameters:
    return Hyperparameters(**{name: getattr(args, name) for name in HYPER_FIELDS})


def _sim_config(args, seed) -> SimConfig:
    return SimConfig(
        n_haplotypes=args.n_haplotypes, region_kb=args.region_kb, markers_per_kb=args.markers_per_kb,
        rho_per_kb=args.rho, n_ancestors=args.n_ancestors, mutation_flip_prob=args.mutation_flip_prob,
        maf_threshold=args.maf, causal_block_sizes=args.blocks, beta_causal=args.beta,
        noise_sd=args.noise_sd, seed=seed, strict_blocks=args.strict_blocks,
        coalescent_scaling=args.coalescent_scaling,
    )


def _load(args):
    paths = []
    for name, default in (("genotypes", GENOTYPES), ("markers", MARKERS), ("phenotype", PHENOTYPE)):
        path = getattr(args, name)
        if path is None:
            if args.data is None:
                raise SystemExit(f"--{name} or --data is required")
            path = os.path.join(args.data, default)
        paths.append(path)
    for path in paths:
        if not os.path.isfile(path):
            raise SystemExit(f"no such file: {path}")
    dataset = read_dataset(*paths)
    truth = None
    if args.truth is not None:
        truth = read_truth(args.truth, dataset.genotypes.marker_ids)
    return dataset, truth


def _manifest(args, **extra) -> dict:
    m = {"command": args.command, "version": __version__, "seed": args.seed}
    m.update(extra)
    return m


def cmd_simulate(args):
    config = _sim_config(args, args.seed)
    sim = simulate(config)
    write_dataset(sim.dataset, args.out)
    write_truth(os.path.join(args.out, TRUTH), sim.dataset.genotypes.marker_ids, sim.true_beta)
    write_manifest(os.path.join(args.out, MANIFEST), _manifest(
        args, n_individuals=sim.dataset.n, n_markers=sim.dataset.J,
        causal_block_sizes=",".join(str(s) for s in config.causal_block_sizes),
        beta_causal=config.beta_causal, rho_per_kb=config.rho_per_kb, markers_per_kb=config.markers_per_kb,
        region_kb=config.region_kb, n_haplotypes=config.n_haplotypes, n_ancestors=config.n_ancestors,
        noise_sd=config.noise_sd, coalescent_scaling=config.coalescent_scaling,
        block_count=sim.block_count, mean_snps_per_block=sim.mean_snps_per_block,
        max_block_breaks=sim.max_block_breaks,
    ))


def cmd_fit(args):
    dataset, truth = _load(args)
    hyper = _hyper(args)

    def fit(segment, k):
        schedule = SamplingSchedule(args.burn_in, args.iters, args.thin, (args.seed + k) % SEED_MOD)
        return fit_method(args.prior, segment, hyper, schedule, args.rank_mode, sigma_shape=args.sigma_shape)

    result = run_segmented(dataset, args.segment_size, fit)
    manifest = _manifest(
        args, prior=args.prior, burn_in=args.burn_in, iterations=args.iters, thin=args.thin,
        sigma_shape=args.sigma_shape, rank_mode=args.rank_mode, segment_size=args.segment_size,
        n_segments=len(result.bounds), y_offset=result.fits[0].extra["offset"],
        **{name: getattr(hyper, name) for name in HYPER_FIELDS},
    )
    write_outputs(args.out, dataset, result, args.rank_mode, manifest, truth)


def cmd_ridge(args):
    dataset, truth = _load(args)
    result = run_segmented(dataset, args.segment_size,
                           lambda seg, k: fit_method("ridge", seg, ridge_reg=args.reg))
    manifest = _manifest(args, reg=args.reg, segment_size=args.segment_size,
                         y_offset=result.fits[0].extra["offset"])
    write_outputs(args.out, dataset, result, "abs_beta", manifest, truth)


def cmd_lasso(args):
    from .baselines import lasso_cv, lasso_fit
    from .evaluation import MethodFit, centered_design

    dataset, truth = _load(args)

    def fit(segment, k):
        X, y, offset = centered_design(segment)
        seed = (args.seed + k) % SEED_MOD
        penalty = args.penalty if args.penalty is not None else lasso_cv(X, y, folds=args.folds, seed=seed)
        res = lasso_fit(X, y, penalty)
        return MethodFit("lasso", res.beta, "abs_beta", beta=res.beta,
                         extra={"offset": offset, "penalty": penalty, "kkt": res.max_kkt_violation})

    result = run_segmented(dataset, args.segment_size, fit)
    penalties = ",".join(format(f.extra["penalty"], ".17g") for f in result.fits)
    manifest = _manifest(args, folds=args.folds, penalty=penalties, segment_size=args.segment_size,
                         max_kkt_violation=max(f.extra["kkt"] for f in result.fits),
                         y_offset=result.fits[0].extra["offset"])
    write_outputs(args.out, dataset, result, "abs_beta", manifest, truth)


def cmd_wald(args):
    dataset, truth = _load(args)
    write_wald(args.out, dataset, single_marker_wald(dataset.X, dataset.y), _manifest(args), truth)


def cmd_benchmark(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise SystemExit(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    config = _sim_config(args, 0)
    schedule = SamplingSchedule(args.burn_in, args.iters, args.thin, 0)
    res = benchmark(args.replicates, config, methods, schedule, _hyper(args), args.seed,
                    args.rank_mode, n_jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    _write_rows(
        os.path.join(args.out, "benchmark.tsv"),
        ["replicate", "method", "auprc", "n_markers", "mean_snps_per_block"],
        ([r.index, m, r.auprc[m], r.n_markers, r.mean_snps_per_block] for r in res.replicates for m in methods),
    )
    rows = []
    for m in methods:
        mean = res.mean_precision_at_recall(m)
        se = res.se_precision_at_recall(m)
        for i, level in enumerate(RECALL_GRID):
            rows.append([m, float(level), mean[i], float(se[i]) if se is not None else float("nan")])
    _write_rows(os.path.join(args.out, PR_CURVE), ["method", "recall", "precision_mean", "precision_se"], rows)
    summary = {}
    srows = []
    for m in methods:
        se = res.se_auprc(m)
        se = se if se is not None else float("nan")
        summary[f"mean_auprc_{m}"] = res.mean_auprc(m)
        summary[f"se_auprc_{m}"] = se
        srows.append([m, res.mean_auprc(m), se, args.replicates])
    _write_rows(os.path.join(args.out, "summary.tsv"), ["method", "mean_auprc", "se_auprc", "replicates"], srows)
    write_manifest(os.path.join(args.out, MANIFEST), _manifest(
        args, replicates=args.replicates, methods=",".join(methods), rho_per_kb=args.rho,
        beta_causal=args.beta, burn_in=args.burn_in, iterations=args.iters, thin=args.thin,
        rank_mode=args.rank_mode, all_finite=res.all_finite,
        all_spike_consistent=res.all_spike_consistent, **summary,
    ))
    for m in methods:
        print(f"{m}\t{res.mean_auprc(m):.4f}")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "ridge": cmd_ridge,
    "lasso": cmd_lasso,
    "wald": cmd_wald,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (BlockRegError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
