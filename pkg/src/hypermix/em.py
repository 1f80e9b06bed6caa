"""Variational EM fitting of memberships, affinities and attribute mixing.

Each iteration tightens Jensen lower bounds through auxiliary
distributions (never materialized; their sums collapse into the closed
forms below) and then updates the parameter blocks in a fixed order:
memberships u, affinity w (skipped at gamma = 1), attribute mixing beta
(skipped at gamma = 0).  The u update solves, per entry, the quadratic

    a u^2 - (a + b + c) u + b = 0

with nonnegative coefficients assembled from the iteration-start
snapshot (a Jacobi sweep, so row updates are order-independent), taking
the smaller root, which always lies in [0, 1].  At gamma = 0 this
collapses to the clipped ratio update of the structure-only model.

Randomness flows through a Philox counter-based generator; every restart
draws from its own spawned substream, so results do not depend on how
restarts are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .errors import NumericalError, ValidationError
from .hypergraph import AttributeMatrix, Hypergraph
from .model import (
    LOG_CLAMP,
    ModelParams,
    StructuralConstants,
    loglik_attributes,
    loglik_structure,
)

_INIT_MARGIN = 1e-6


@dataclass(frozen=True)
class FitConfig:
    """Fitting controls; defaults suit the bundled desk-scale datasets."""

    k: int
    gamma: float = 0.0
    seed: int = 0
    restarts: int = 10
    max_iters: int = 1000
    check_every: int = 10
    tol: float = 1e-2
    patience: int = 2
    threads: int = 1
    memory_budget_bytes: int = 4 << 30

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValidationError(f"gamma must be in [0, 1], got {self.gamma}")
        for name in ("restarts", "max_iters", "check_every", "patience", "threads"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.tol < 0:
            raise ValidationError("tol must be nonnegative")


@dataclass
class FitResult:
    params: ModelParams
    final_loglik: float
    iterations_run: int
    restart_index_of_best: int
    loglik_trace: list[dict]
    diagnostics: dict = field(default_factory=dict)


def _edge_coefficients(h: Hypergraph, u, w):
    """Per-edge A_e / lam_e with the intensity clamped away from zero."""
    lam = kern.edge_intensities(h.edge_offsets, h.edge_members, u, w)
    return h.weights / np.maximum(lam, LOG_CLAMP)


def _mirror_upper(m: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy: lower triangle mirrored from the upper."""
    out = np.empty_like(m)
    iu = np.triu_indices(m.shape[0])
    out[iu] = m[iu]
    out.T[iu] = m[iu]
    return out


def _pair_denominator(u: np.ndarray) -> np.ndarray:
    """sum_{i<j in V} (u_ik u_jq + u_iq u_jk) / 2, exactly symmetric."""
    s = u.sum(axis=0)
    return _mirror_upper(0.5 * (np.outer(s, s) - u.T @ u))


def update_w(
    h: Hypergraph,
    u: np.ndarray,
    w_old: np.ndarray,
    constants: StructuralConstants | None = None,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """Closed-form affinity update; preserves symmetry exactly."""
    if constants is None:
        constants = StructuralConstants.from_hypergraph(h)
    coef = _edge_coefficients(h, u, w_old)
    num = w_old * kern.affinity_numerators(h.edge_offsets, h.edge_members, coef, u)
    den = constants.budget * _pair_denominator(u)
    w_new = np.zeros_like(w_old)
    ok = den > 0.0
    np.divide(num, den, out=w_new, where=ok)
    dead = (~ok) & (num > 0.0)
    if diagnostics is not None and dead.any():
        diagnostics["zero_denominator_affinities"] = (
            diagnostics.get("zero_denominator_affinities", 0) + int(dead.sum()))
    return w_new


def update_beta(
    x: AttributeMatrix,
    u: np.ndarray,
    beta_old: np.ndarray,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """Closed-form attribute-mixing update; columns renormalized to 1."""
    xm = x.matrix
    pi = np.clip(u @ beta_old, LOG_CLAMP, None)
    pi_c = np.clip((1.0 - u) @ beta_old, LOG_CLAMP, None)
    num = beta_old * (u.T @ (xm / pi) + (1.0 - u).T @ ((1.0 - xm) / pi_c))
    col = num.sum(axis=0)
    ok = col > 0.0
    if diagnostics is not None and not ok.all():
        diagnostics["degenerate_beta_columns"] = (
            diagnostics.get("degenerate_beta_columns", 0) + int((~ok).sum()))
    k = beta_old.shape[0]
    beta_new = np.full_like(beta_old, 1.0 / k)
    np.divide(num, col[None, :], out=beta_new, where=ok[None, :])
    return beta_new


def membership_coefficients(
    h: Hypergraph,
    x: AttributeMatrix | None,
    params: ModelParams,
    gamma: float,
    constants: StructuralConstants | None = None,
):
    """Quadratic coefficients (a, b, c) for every membership entry,
    assembled from the current parameter snapshot."""
    if constants is None:
        constants = StructuralConstants.from_hypergraph(h)
    u, w, beta = params.u, params.w, params.beta
    a = np.zeros_like(u)
    b = np.zeros_like(u)
    c = np.zeros_like(u)
    if gamma < 1.0:
        coef = _edge_coefficients(h, u, w)
        m = kern.membership_numerators(h.edge_offsets, h.edge_members, coef, u, w)
        s = u.sum(axis=0)
        a = (1.0 - gamma) * constants.budget * ((s[None, :] - u) @ w)
        b = (1.0 - gamma) * u * m
    if gamma > 0.0:
        if x is None or beta is None:
            raise ValidationError("gamma > 0 requires attributes and beta")
        xm = x.matrix
        pi = np.clip(u @ beta, LOG_CLAMP, None)
        pi_c = np.clip((1.0 - u) @ beta, LOG_CLAMP, None)
        b = b + gamma * u * ((xm / pi) @ beta.T)
        c = gamma * (1.0 - u) * (((1.0 - xm) / pi_c) @ beta.T)
    # Nonnegative in exact arithmetic; trim float subtraction noise.
    return np.maximum(a, 0.0), np.maximum(b, 0.0), np.maximum(c, 0.0)


def solve_membership_quadratic(a, b, c, diagnostics: dict | None = None):
    """Smaller root of a u^2 - (a+b+c) u + b = 0, elementwise.

    The discriminant (a+b+c)^2 - 4ab is expanded to the sum of
    nonnegative terms (a-b)^2 + c(c + 2(a+b)), which avoids the
    cancellation of the textbook form, and the root is taken in the
    product form 2b / (a+b+c + sqrt(disc)), stable as a -> 0 where it
    reduces to the linear solution b / (b + c) (0 when all coefficients
    vanish).  The result is always in [0, 1].
    """
    s = a + b + c
    disc = (a - b) ** 2 + c * (c + 2.0 * (a + b))
    bad = disc < 0.0
    if diagnostics is not None and bad.any():
        diagnostics["negative_discriminants"] = (
            diagnostics.get("negative_discriminants", 0) + int(bad.sum()))
    denom = s + np.sqrt(np.maximum(disc, 0.0))
    root = np.zeros_like(s)
    np.divide(2.0 * b, denom, out=root, where=denom > 0.0)
    return np.clip(root, 0.0, 1.0)


def update_u_quadratic(
    h: Hypergraph,
    x: AttributeMatrix | None,
    params: ModelParams,
    gamma: float,
    constants: StructuralConstants | None = None,
    diagnostics: dict | None = None,
) -> np.ndarray:
    a, b, c = membership_coefficients(h, x, params, gamma, constants)
    return solve_membership_quadratic(a, b, c, diagnostics)


def update_u_gamma0(
    h: Hypergraph,
    params: ModelParams,
    constants: StructuralConstants | None = None,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """Structure-only membership update: clipped ratio min(1, num/den).

    The clip is the boundary Lagrange multiplier of the [0, 1] box; zero
    denominators resolve to 1 (nonzero numerator) or 0 (both zero).
    """
    if constants is None:
        constants = StructuralConstants.from_hypergraph(h)
    u, w = params.u, params.w
    coef = _edge_coefficients(h, u, w)
    m = kern.membership_numerators(h.edge_offsets, h.edge_members, coef, u, w)
    num = u * np.maximum(m, 0.0)
    s = u.sum(axis=0)
    den = constants.budget * np.maximum((s[None, :] - u) @ w, 0.0)
    out = np.zeros_like(u)
    ok = den > 0.0
    np.divide(num, den, out=out, where=ok)
    saturated = (~ok) & (num > 0.0)
    out[saturated] = 1.0
    if diagnostics is not None and saturated.any():
        diagnostics["saturated_memberships"] = (
            diagnostics.get("saturated_memberships", 0) + int(saturated.sum()))
    return np.minimum(out, 1.0)


def em_iteration(
    h: Hypergraph,
    x: AttributeMatrix | None,
    params: ModelParams,
    gamma: float,
    constants: StructuralConstants,
    diagnostics: dict | None = None,
) -> ModelParams:
    """One full EM sweep: u, then w (gamma != 1), then beta (gamma != 0).

    The auxiliary distributions are re-tightened against the freshest
    parameters right before each block's update.
    """
    u = update_u_quadratic(h, x, params, gamma, constants, diagnostics)
    w = params.w
    beta = params.beta
    if gamma != 1.0:
        w = update_w(h, u, params.w, constants, diagnostics)
    if gamma != 0.0:
        assert x is not None and params.beta is not None
        beta = update_beta(x, u, params.beta, diagnostics)
    return ModelParams(u=u, w=w, beta=beta)


def _normalize_columns(m: np.ndarray) -> np.ndarray:
    return m / m.sum(axis=0, keepdims=True)


def init_params(
    rng: np.random.Generator, n: int, k: int, z: int | None
) -> ModelParams:
    """Strictly interior random start (avoids log 0 on the first sweep)."""
    u = rng.uniform(_INIT_MARGIN, 1.0 - _INIT_MARGIN, size=(n, k))
    w = _mirror_upper(rng.uniform(_INIT_MARGIN, 1.0, size=(k, k)))
    beta = None
    if z:
        beta = _normalize_columns(rng.uniform(_INIT_MARGIN, 1.0, size=(k, z)))
    return ModelParams(u=u, w=w, beta=beta)


def _blended_loglik(h, x, params, gamma, constants):
    la = loglik_structure(h, params.u, params.w, constants)
    lx = (loglik_attributes(x, params.u, params.beta)
          if x is not None and params.beta is not None else None)
    total = (1.0 - gamma) * la if gamma < 1.0 else 0.0
    if gamma > 0.0:
        assert lx is not None
        total += gamma * lx
    return la, lx, total


def _run_restart(h, x, config, constants, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    z = x.num_columns if x is not None and config.gamma > 0.0 else None
    params = init_params(rng, h.num_nodes, config.k, z)
    diagnostics: dict = {}
    trace: list[dict] = []
    prev = -math.inf
    streak = 0
    iterations = 0
    for it in range(1, config.max_iters + 1):
        params = em_iteration(h, x, params, config.gamma, constants, diagnostics)
        iterations = it
        if it % config.check_every == 0:
            la, lx, total = _blended_loglik(h, x, params, config.gamma, constants)
            if not math.isfinite(total):
                raise NumericalError(f"objective became {total} at iteration {it}")
            trace.append({"iteration": it, "loglik_structure": la,
                          "loglik_attributes": lx, "loglik_total": total})
            if abs(total - prev) < config.tol:
                streak += 1
                if streak >= config.patience:
                    break
            else:
                streak = 0
            prev = total
    _, _, final = _blended_loglik(h, x, params, config.gamma, constants)
    return FitResult(params=params, final_loglik=final, iterations_run=iterations,
                     restart_index_of_best=-1, loglik_trace=trace,
                     diagnostics=diagnostics)


def em_fit(
    h: Hypergraph,
    x: AttributeMatrix | None,
    config: FitConfig,
    constants: StructuralConstants | None = None,
) -> FitResult:
    """Fit with several random restarts; returns the best by log-likelihood.

    Restarts use independent substreams of a single Philox stream seeded
    from ``config.seed``, so the outcome is reproducible and independent
    of how many worker threads execute them.
    """
    if config.gamma > 0.0:
        if x is None:
            raise ValidationError("gamma > 0 requires an attribute matrix")
        if x.num_nodes != h.num_nodes:
            raise ValidationError(
                f"attribute rows ({x.num_nodes}) != hypergraph nodes ({h.num_nodes})")
    if constants is None:
        constants = StructuralConstants.from_hypergraph(h)
    z = x.num_columns if x is not None else 0
    estimated = 8 * config.k * (config.k + z) * (h.num_nodes + h.num_edges)
    if estimated > config.memory_budget_bytes:
        raise ValidationError(
            f"estimated working set {estimated} B exceeds the memory budget "
            f"{config.memory_budget_bytes} B; lower k or raise the budget")

    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)

    def run(idx: int):
        try:
            return idx, _run_restart(h, x, config, constants, seeds[idx]), None
        except NumericalError as exc:
            return idx, None, str(exc)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run, range(config.restarts)))
    else:
        outcomes = [run(i) for i in range(config.restarts)]

    aborted = {idx: msg for idx, res, msg in outcomes if res is None}
    best = None
    best_idx = -1
    for idx, res, _ in outcomes:
        if res is None:
            continue
        if best is None or res.final_loglik > best.final_loglik:
            best, best_idx = res, idx
    if best is None:
        raise NumericalError(
            f"all {config.restarts} restarts diverged: {sorted(aborted.values())}")
    best.restart_index_of_best = best_idx
    if aborted:
        best.diagnostics["aborted_restarts"] = aborted
    return best
