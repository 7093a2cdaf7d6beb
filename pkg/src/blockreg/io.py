"""Tab-separated dataset and result files, config files and segmented fitting.

All numbers are written with 17 significant digits so that reading a file
back gives the exact same floats.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .data import Dataset, GenotypeMatrix, MarkerMap, validate_dataset
from .errors import DimensionMismatch, ParseError, SegmentFailure

GENOTYPES = "genotypes.tsv"
MARKERS = "markers.tsv"
PHENOTYPE = "phenotype.tsv"
TRUTH = "truth.tsv"
BETA_SUMMARY = "beta_summary.tsv"
TRACE = "trace.tsv"
PR_CURVE = "pr_curve.tsv"
MANIFEST = "manifest.txt"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(fmt(v) for v in row) + "\n")


def _read_rows(path):
    """Yield ``(line_number, fields)``; blank lines are skipped."""
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if line.strip():
                yield lineno, line.split("\t")


def _float(path, lineno, col, text):
    try:
        return float(text)
    except ValueError:
        raise ParseError(path, lineno, col, f"expected a number, got {text!r}") from None


def read_genotypes(path) -> GenotypeMatrix:
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, 1, "empty file") from None
    marker_ids = tuple(header[1:])
    ids, values = [], []
    for lineno, fields in rows:
        if len(fields) != len(header):
            raise ParseError(path, lineno, min(len(fields), len(header)) + 1,
                             f"expected {len(header)} fields, found {len(fields)}")
        row = []
        for col, text in enumerate(fields[1:], start=2):
            if text not in ("0", "1", "2"):
                raise ParseError(path, lineno, col, f"genotype must be 0, 1 or 2, got {text!r}")
            row.append(int(text))
        ids.append(fields[0])
        values.append(row)
    arr = np.array(values, dtype=np.int8).reshape(len(values), len(marker_ids))
    return GenotypeMatrix(arr, marker_ids, tuple(ids))


def read_markers(path):
    """Returns ``(marker_ids, MarkerMap)``."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, 1, "empty file") from None
    if header != ["marker_id", "position_kb", "rho_per_kb"]:
        raise ParseError(path, 1, 1, "header must be marker_id, position_kb, rho_per_kb")
    ids, pos, rho = [], [], []
    for lineno, fields in rows:
        if len(fields) != 3:
            raise ParseError(path, lineno, min(len(fields), 3) + 1, f"expected 3 fields, found {len(fields)}")
        ids.append(fields[0])
        pos.append(_float(path, lineno, 2, fields[1]))
        rho.append(_float(path, lineno, 3, fields[2]))
    return tuple(ids), MarkerMap(np.array(pos, dtype=float), np.array(rho, dtype=float))


def read_phenotype(path):
    """Returns ``(individual_ids, values)``."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, 1, "empty file") from None
    if header != ["individual_id", "value"]:
        raise ParseError(path, 1, 1, "header must be individual_id, value")
    ids, vals = [], []
    for lineno, fields in rows:
        if len(fields) != 2:
            raise ParseError(path, lineno, min(len(fields), 2) + 1, f"expected 2 fields, found {len(fields)}")
        ids.append(fields[0])
        vals.append(_float(path, lineno, 2, fields[1]))
    return tuple(ids), np.array(vals, dtype=float)


def read_dataset(genotypes_path, markers_path, phenotype_path) -> Dataset:
    """Parse the three input files, check that their ids line up and validate."""
    geno = read_genotypes(genotypes_path)
    marker_ids, markers = read_markers(markers_path)
    ind_ids, y = read_phenotype(phenotype_path)
    if len(marker_ids) != geno.n_markers:
        raise DimensionMismatch(
            f"{markers_path} lists {len(marker_ids)} markers, {genotypes_path} has {geno.n_markers}")
    for j, (a, b) in enumerate(zip(marker_ids, geno.marker_ids)):
        if a != b:
            raise ParseError(markers_path, j + 2, 1, f"marker {a!r} does not match genotype column {b!r}")
    if len(ind_ids) != geno.n_individuals:
        raise DimensionMismatch(
            f"{phenotype_path} lists {len(ind_ids)} individuals, {genotypes_path} has {geno.n_individuals}")
    for i, (a, b) in enumerate(zip(ind_ids, geno.individual_ids)):
        if a != b:
            raise ParseError(phenotype_path, i + 2, 1, f"individual {a!r} does not match genotype row {b!r}")
    return validate_dataset(geno, markers, y)


def write_dataset(dataset: Dataset, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    g = dataset.genotypes
    ind = g.individual_ids or tuple(f"ind{i:04d}" for i in range(g.n_individuals))
    _write_rows(os.path.join(out_dir, GENOTYPES), ["individual_id", *g.marker_ids],
                ([ind[i], *g.values[i].tolist()] for i in range(g.n_individuals)))
    m = dataset.markers
    _write_rows(os.path.join(out_dir, MARKERS), ["marker_id", "position_kb", "rho_per_kb"],
                zip(g.marker_ids, m.positions_kb.tolist(), m.rho.tolist()))
    _write_rows(os.path.join(out_dir, PHENOTYPE), ["individual_id", "value"],
                zip(ind, dataset.y.tolist()))


def write_truth(path, marker_ids, true_beta) -> None:
    true_beta = np.asarray(true_beta, dtype=float)
    _write_rows(path, ["marker_id", "causal", "beta"],
                zip(marker_ids, (true_beta != 0).astype(int).tolist(), true_beta.tolist()))


def read_truth(path, marker_ids=None) -> np.ndarray:
    """Indices of markers flagged causal; order is checked against ``marker_ids`` if given."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(path, 1, 1, "empty file") from None
    if header[:2] != ["marker_id", "causal"]:
        raise ParseError(path, 1, 1, "header must start with marker_id, causal")
    ids, flags = [], []
    for lineno, fields in rows:
        if len(fields) < 2 or fields[1] not in ("0", "1"):
            raise ParseError(path, lineno, 2, "causal flag must be 0 or 1")
        ids.append(fields[0])
        flags.append(fields[1] == "1")
    if marker_ids is not None and tuple(ids) != tuple(marker_ids):
        raise DimensionMismatch(f"{path} does not list the dataset's markers in order")
    return np.flatnonzero(flags)


def write_manifest(path, items: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in items.items():
            fh.write(f"{key}={fmt(value)}\n")


def read_config(path) -> dict:
    """Flat ``key=value`` file; ``#`` starts a comment. Dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(path, lineno, 1, "expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


@dataclass
class SegmentedFit:
    """Per-marker arrays concatenated over segments, plus the raw segment results."""

    bounds: list
    fits: list
    p_c: np.ndarray | None
    beta_mean: np.ndarray
    beta_best: np.ndarray
    c_best: np.ndarray | None
    scores: np.ndarray


def segment_bounds(J: int, segment_size: int) -> list:
    """``[(start, stop), ...]``; 0 means a single segment."""
    if segment_size < 0:
        raise ValueError("segment_size must be >= 0")
    if segment_size == 0 or segment_size >= J:
        return [(0, J)]
    return [(s, min(s + segment_size, J)) for s in range(0, J, segment_size)]


def run_segmented(dataset: Dataset, segment_size: int, fit_fn) -> SegmentedFit:
    """Fit consecutive marker segments independently and join the results.

    ``fit_fn(segment, k)`` gets the k-th sub-dataset and returns a
    ``MethodFit``. Segments share nothing, so the result does not depend on
    the order they are run in.
    """
    fits = []
    bounds = segment_bounds(dataset.J, segment_size)
    for k, (a, b) in enumerate(bounds):
        try:
            fits.append(fit_fn(dataset.segment(a, b), k))
        except Exception as exc:
            raise SegmentFailure(k, exc) from exc

    def cat(get):
        parts = [get(f) for f in fits]
        return None if any(p is None for p in parts) else np.concatenate(parts)

    return SegmentedFit(
        bounds=bounds,
        fits=fits,
        p_c=cat(lambda f: f.summary.p_c if f.summary is not None else None),
        beta_mean=cat(lambda f: f.summary.beta_mean if f.summary is not None else f.beta),
        beta_best=cat(lambda f: f.summary.beta_best if f.summary is not None else f.beta),
        c_best=cat(lambda f: f.summary.c_best if f.summary is not None else None),
        scores=cat(lambda f: f.scores),
    )


def write_outputs(out_dir, dataset: Dataset, result: SegmentedFit, rank_mode: str,
                  manifest: dict, truth=None) -> None:
    """Write beta_summary.tsv, trace.tsv (sampler fits), pr_curve.tsv (if ``truth``) and the manifest."""
    from .evaluation import precision_recall, rank_markers

    os.makedirs(out_dir, exist_ok=True)
    J = dataset.J
    order = rank_markers(result.scores, rank_mode)
    rank = np.empty(J, dtype=int)
    rank[order] = np.arange(1, J + 1)
    beta_mean = result.beta_mean
    p_c = result.p_c if result.p_c is not None else (beta_mean != 0).astype(float)
    c_best = result.c_best if result.c_best is not None else (result.beta_best != 0).astype(int)
    _write_rows(
        os.path.join(out_dir, BETA_SUMMARY),
        ["marker_id", "position_kb", "p_c", "beta_mean", "beta_best", "c_best", "rank"],
        zip(dataset.genotypes.marker_ids, dataset.markers.positions_kb.tolist(), p_c.tolist(),
            beta_mean.tolist(), result.beta_best.tolist(), np.asarray(c_best).astype(int).tolist(),
            rank.tolist()),
    )
    traces = [f.trace for f in result.fits]
    if all(t is not None for t in traces):
        header = ["retained_index", "sigma_sq", "lambda", "pi0", "pi1", "train_error"]
        rows = []
        for k, t in enumerate(traces):
            for i in range(len(t)):
                row = [i, t.sigma_sq[i], t.lam[i], t.pi0[i], t.pi1[i], t.train_error[i]]
                rows.append([k, *row] if len(traces) > 1 else row)
        _write_rows(os.path.join(out_dir, TRACE), ["segment", *header] if len(traces) > 1 else header, rows)
    if truth is not None:
        curve = precision_recall(order, truth)
        _write_rows(os.path.join(out_dir, PR_CURVE), ["k", "precision", "recall"],
                    zip(curve.k.tolist(), curve.precision.tolist(), curve.recall.tolist()))
        manifest = {**manifest, "auprc": curve.auprc}
    write_manifest(os.path.join(out_dir, MANIFEST), manifest)


def write_wald(out_dir, dataset: Dataset, wald, manifest: dict, truth=None) -> None:
    """wald.tsv (marker_id, position_kb, statistic, p_value, neg_log10_p, rank) plus manifest."""
    from .evaluation import precision_recall, rank_markers

    os.makedirs(out_dir, exist_ok=True)
    order = rank_markers(wald.neg_log10_p, "score")
    rank = np.empty(dataset.J, dtype=int)
    rank[order] = np.arange(1, dataset.J + 1)
    _write_rows(
        os.path.join(out_dir, "wald.tsv"),
        ["marker_id", "position_kb", "statistic", "p_value", "neg_log10_p", "rank"],
        zip(dataset.genotypes.marker_ids, dataset.markers.positions_kb.tolist(), wald.statistic.tolist(),
            wald.p_value.tolist(), wald.neg_log10_p.tolist(), rank.tolist()),
    )
    if truth is not None:
        curve = precision_recall(order, truth)
        _write_rows(os.path.join(out_dir, PR_CURVE), ["k", "precision", "recall"],
                    zip(curve.k.tolist(), curve.precision.tolist(), curve.recall.tolist()))
        manifest = {**manifest, "auprc": curve.auprc}
    write_manifest(os.path.join(out_dir, MANIFEST), manifest)
