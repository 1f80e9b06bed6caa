"""Hyperedge prediction, cross-validation and community-recovery metrics.

Prediction quality is the probability that an observed hyperedge is
scored above a size-matched non-edge; ties count half.  Edges are scored
by the probability of at least one interaction under their Poisson rate,
log(1 - exp(-lam_e / kappa_{|e|})), evaluated in log space so large and
tiny rates keep resolution.  Because every comparison pairs equal sizes,
the ordering depends only on the intensities, making the estimate
invariant to rescaling all intensities by a positive constant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .em import FitConfig, em_fit
from .errors import ValidationError
from .hypergraph import AttributeMatrix, Hypergraph
from .model import ModelParams, StructuralConstants

logger = logging.getLogger(__name__)

_MAX_RESAMPLE_TRIES = 100

DEFAULT_K_VALUES = tuple(range(2, 31))
DEFAULT_GAMMA_VALUES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                        0.95, 0.99, 0.995, 1.0)


def auc_from_scores(r1: np.ndarray, r0: np.ndarray) -> float:
    """(#{r1 > r0} + 0.5 #{r1 == r0}) / |r1| over paired comparisons."""
    r1 = np.asarray(r1, dtype=np.float64)
    r0 = np.asarray(r0, dtype=np.float64)
    if r1.shape != r0.shape or r1.ndim != 1 or r1.size == 0:
        raise ValidationError("score vectors must be equal-length and nonempty")
    wins = int(np.count_nonzero(r1 > r0))
    ties = int(np.count_nonzero(r1 == r0))
    return (wins + 0.5 * ties) / r1.size


def _log1mexp(mu: np.ndarray) -> np.ndarray:
    """log(1 - exp(-mu)) for mu >= 0, stable at both ends."""
    mu = np.asarray(mu, dtype=np.float64)
    out = np.empty_like(mu)
    small = mu <= math.log(2.0)
    with np.errstate(divide="ignore"):
        out[small] = np.log(-np.expm1(-mu[small]))
    out[~small] = np.log1p(-np.exp(-mu[~small]))
    return out


def _edge_log_scores(edges, u, w, constants: StructuralConstants) -> np.ndarray:
    """Log probability of at least one interaction, per node set."""
    offsets = np.cumsum([0] + [len(e) for e in edges])
    members = np.fromiter((i for e in edges for i in e), dtype=np.int64,
                          count=int(offsets[-1]))
    lam = kern.edge_intensities(offsets, members, u, w)
    log_kap = np.array([constants.log_kappa(len(e)) for e in edges])
    with np.errstate(divide="ignore"):
        log_mu = np.log(lam) - log_kap
    mu = np.exp(log_mu)
    # Below the underflow knee the score is the asymptote log(mu); this
    # keeps resolution when kappa dwarfs lam (huge edge sizes).
    return np.where(mu > 1e-8, _log1mexp(np.maximum(mu, 1e-300)), log_mu)


def _uniform_negative(rng, n, size, observed, counters):
    for _ in range(_MAX_RESAMPLE_TRIES):
        cand = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        if cand not in observed:
            return cand
    counters["resample_failures"] += 1
    return cand


def soo_negatives(
    test_edges: Sequence[Sequence[int]],
    num_nodes: int,
    seed: int | np.random.Generator = 0,
) -> list[tuple[int, ...]]:
    """Switch-one-out negatives: one member node swapped for an outsider.

    The output set has the same size as the input and Jaccard similarity
    (|e| - 1) / (|e| + 1) with it.
    """
    rng = (seed if isinstance(seed, np.random.Generator)
           else np.random.Generator(np.random.Philox(seed)))
    out = []
    for e in test_edges:
        e = tuple(e)
        if len(e) >= num_nodes:
            raise ValidationError(
                f"edge of size {len(e)} leaves no replacement among {num_nodes} nodes")
        drop = e[rng.integers(len(e))]
        pool = np.setdiff1d(np.arange(num_nodes), np.asarray(e, dtype=np.int64),
                            assume_unique=False)
        add = int(pool[rng.integers(len(pool))])
        out.append(tuple(sorted(set(e) - {drop} | {add})))
    return out


@dataclass
class AucResult:
    value: float
    comparisons: int
    wins: int
    ties: int
    resample_failures: int = 0
    mode: str = "uniform"

    def __float__(self) -> float:
        return self.value


def auc_prediction(
    test_edges,
    params: ModelParams,
    context: Hypergraph,
    seed: int = 0,
    mode: str = "uniform",
    constants: StructuralConstants | None = None,
) -> AucResult:
    """AUC of observed test edges against sampled same-size negatives.

    ``context`` supplies the node universe and every observed edge
    (training and test), so uniform negatives that collide with an
    observed edge can be resampled (up to 100 tries, then kept and
    counted).  ``test_edges`` is a Hypergraph or a sequence of node
    tuples.
    """
    if mode not in ("uniform", "soo"):
        raise ValidationError(f"unknown negative-sampling mode {mode!r}")
    if params.num_nodes != context.num_nodes:
        raise ValidationError(
            f"params cover {params.num_nodes} nodes, data has {context.num_nodes}")
    if isinstance(test_edges, Hypergraph):
        positives = list(test_edges.edges)
    else:
        positives = [tuple(sorted(e)) for e in test_edges]
    if not positives:
        raise ValidationError("empty test edge set")
    if any(len(e) < 2 for e in positives):
        raise ValidationError("test edges need at least 2 nodes")
    if constants is None:
        constants = StructuralConstants.from_hypergraph(context)

    rng = np.random.Generator(np.random.Philox(seed))
    counters = {"resample_failures": 0}
    if mode == "soo":
        negatives = soo_negatives(positives, context.num_nodes, rng)
    else:
        observed = context.edge_set()
        negatives = [
            _uniform_negative(rng, context.num_nodes, len(e), observed, counters)
            for e in positives
        ]

    r1 = _edge_log_scores(positives, params.u, params.w, constants)
    r0 = _edge_log_scores(negatives, params.u, params.w, constants)
    wins = int(np.count_nonzero(r1 > r0))
    ties = int(np.count_nonzero(r1 == r0))
    return AucResult(
        value=(wins + 0.5 * ties) / len(positives),
        comparisons=len(positives),
        wins=wins,
        ties=ties,
        resample_failures=counters["resample_failures"],
        mode=mode,
    )


@dataclass(frozen=True)
class CVGrid:
    """Hyperparameter grid for k-fold hyperedge-prediction selection."""

    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_VALUES
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValidationError(f"folds must be >= 2, got {self.folds}")
        if not self.k_values or not self.gamma_values:
            raise ValidationError("empty hyperparameter grid")


@dataclass
class CVCell:
    k: int
    gamma: float
    fold_aucs: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_aucs))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_aucs))


@dataclass
class EvalReport:
    cells: list[CVCell]
    selected_k: int
    selected_gamma: float
    folds: int

    def rows(self):
        for cell in self.cells:
            for fold, auc in enumerate(cell.fold_aucs):
                yield (cell.k, cell.gamma, fold, auc)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "gamma", "fold", "auc"])
            for k, gamma, fold, auc in self.rows():
                writer.writerow([k, gamma, fold, repr(auc)])
            for cell in self.cells:
                writer.writerow([cell.k, cell.gamma, "mean", repr(cell.mean)])
                writer.writerow([cell.k, cell.gamma, "std", repr(cell.std)])


def partition_folds(num_edges: int, folds: int, rng: np.random.Generator):
    """Disjoint covering folds of edge ids, sizes as equal as possible."""
    return np.array_split(rng.permutation(num_edges), folds)


def kfold_cv(
    h: Hypergraph,
    x: AttributeMatrix | None,
    grid: CVGrid,
    fit_overrides: dict | None = None,
) -> EvalReport:
    """Grid search (k, gamma) by mean held-out-fold prediction AUC.

    Edges are partitioned once; each cell fits on the fold complement
    (held-out edges removed, likelihood constants kept from the full
    data) and scores the held-out fold with uniform negatives.  Ties in
    mean AUC break toward smaller k, then smaller gamma.
    """
    if h.num_edges < grid.folds:
        raise ValidationError(
            f"{h.num_edges} edges cannot be split into {grid.folds} folds")
    if any(g > 0 for g in grid.gamma_values) and x is None:
        raise ValidationError("gamma > 0 in the grid requires attributes")
    overrides = dict(fit_overrides or {})
    constants = StructuralConstants.from_hypergraph(h)
    root = np.random.SeedSequence(grid.seed)
    split_stream, cells_stream = root.spawn(2)
    fold_ids = partition_folds(
        h.num_edges, grid.folds, np.random.Generator(np.random.Philox(split_stream)))
    all_ids = np.arange(h.num_edges)

    cells = []
    cell_seeds = cells_stream.spawn(len(grid.k_values) * len(grid.gamma_values))
    ci = 0
    for k in grid.k_values:
        for gamma in grid.gamma_values:
            fold_streams = cell_seeds[ci].spawn(grid.folds)
            ci += 1
            aucs = []
            for fold, held_out in enumerate(fold_ids):
                fit_seed, auc_seed = (
                    int(s.generate_state(1, np.uint32)[0])
                    for s in fold_streams[fold].spawn(2))
                train = h.subset(np.setdiff1d(all_ids, held_out))
                config = FitConfig(k=k, gamma=gamma, seed=fit_seed, **overrides)
                result = em_fit(train, x if gamma > 0 else None, config,
                                constants=constants)
                test = [h.edges[i] for i in held_out]
                auc = auc_prediction(test, result.params, h, seed=auc_seed,
                                     constants=constants)
                aucs.append(auc.value)
                logger.info("cv k=%d gamma=%g fold=%d auc=%.4f", k, gamma, fold,
                            auc.value)
            cells.append(CVCell(k=k, gamma=gamma, fold_aucs=aucs))

    best = min(cells, key=lambda c: (-c.mean, c.k, c.gamma))
    return EvalReport(cells=cells, selected_k=best.k, selected_gamma=best.gamma,
                      folds=grid.folds)


def _column_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(a, axis=0)
    nb = np.linalg.norm(b, axis=0)
    table = a.T @ b
    scale = np.outer(na, nb)
    out = np.zeros_like(table)
    np.divide(table, scale, out=out, where=scale > 0)
    return out


def greedy_column_match(a: np.ndarray, b: np.ndarray) -> list[tuple[int, int]]:
    """Greedy assignment maximizing column cosine, largest entries first."""
    table = _column_cosines(a, b)
    pairs = []
    free_a = set(range(a.shape[1]))
    free_b = set(range(b.shape[1]))
    order = np.dstack(np.unravel_index(np.argsort(-table, axis=None), table.shape))[0]
    for ka, kb in order:
        if ka in free_a and kb in free_b:
            pairs.append((int(ka), int(kb)))
            free_a.discard(int(ka))
            free_b.discard(int(kb))
        if not free_a or not free_b:
            break
    return pairs


def cosine_similarity(u_a: np.ndarray, u_b: np.ndarray) -> float:
    """Mean per-node cosine between membership rows, after aligning the
    matrix with fewer columns to the other one.

    Mixed-membership fits are identifiable only up to community
    relabeling, so the smaller matrix's columns are permuted (greedy
    match on column cosines) before comparing rows.  Node pairs where
    either row is all zero contribute 0.
    """
    u_a = np.asarray(u_a, dtype=np.float64)
    u_b = np.asarray(u_b, dtype=np.float64)
    if u_a.shape[0] != u_b.shape[0]:
        raise ValidationError("membership matrices must cover the same nodes")
    swapped = u_a.shape[1] > u_b.shape[1]
    small, big = (u_b, u_a) if swapped else (u_a, u_b)
    aligned = np.zeros_like(big)
    for k_small, k_big in greedy_column_match(small, big):
        aligned[:, k_big] = small[:, k_small]
    num = np.einsum("ik,ik->i", aligned, big)
    den = np.linalg.norm(aligned, axis=1) * np.linalg.norm(big, axis=1)
    cos = np.zeros_like(num)
    np.divide(num, den, out=cos, where=den > 0)
    return float(cos.mean())
