"""Imputation strategies over feature sets.

All imputers are pure: they return a new FeatureSet with every mask
cleared and leave observed rows byte-identical to their inputs. Masked
rows always enter the computation as zero placeholders, so items whose
neighbors are themselves missing contribute nothing to a neighborhood
average. The graph-aware strategies consume structures from `graph`.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .errors import DivergentDiffusion, InconsistentData, InvalidParameter, NoObservedFeatures
from .features import FALLBACKS, FeatureSet, ImputeConfig
from .graph import (
    MODE_PPR_EXACT,
    MODE_SYM,
    InteractionMatrix,
    ItemGraph,
    NormalizedOperator,
    cooccurrence,
    ppr_exact,
    ppr_iterative,
    sym_norm_adjacency,
    topk_sparsify,
)

# Fixed-point applications that fail to converge within this many steps
# raise DivergentDiffusion.
FIXED_POINT_STEP_CAP = 500

IterationHook = Callable[[str, int, np.ndarray], None]


def _cleared(f: FeatureSet, matrices: dict[str, np.ndarray]) -> FeatureSet:
    masks = {m: np.zeros(f.n_items, dtype=bool) for m in f.modalities}
    return FeatureSet(f.modalities, matrices, masks)


def _zero_init(f: FeatureSet, modality: str) -> np.ndarray:
    x = f.matrices[modality].copy()
    x[f.masks[modality]] = 0.0
    return x


def _observed_mean(f: FeatureSet, modality: str) -> np.ndarray:
    observed = ~f.masks[modality]
    if not observed.any():
        raise NoObservedFeatures(f"modality '{modality}' has no observed rows")
    return f.matrices[modality][observed].mean(axis=0)


def _fallback_row(f: FeatureSet, modality: str, fallback: str) -> np.ndarray:
    if fallback not in FALLBACKS:
        raise InvalidParameter(f"unknown cold_fallback '{fallback}'")
    if fallback == "zeros":
        return np.zeros(f.dim(modality))
    return _observed_mean(f, modality)


def _check_graph(f: FeatureSet, g: ItemGraph):
    if g.n_items != f.n_items:
        raise InconsistentData(
            f"item graph has {g.n_items} items but features have {f.n_items} rows"
        )


def impute_zeros(f: FeatureSet) -> FeatureSet:
    """Replace missing rows with zero vectors."""
    out = {}
    for m in f.modalities:
        x = f.matrices[m].copy()
        x[f.masks[m]] = 0.0
        out[m] = x
    return _cleared(f, out)


def impute_random(f: FeatureSet, seed: int) -> FeatureSet:
    """Fill missing rows with uniform [0, 1) draws from one seeded stream.

    The draw order is fixed (modalities in declared order, masked items by
    ascending index, then columns), so the output does not depend on how
    rows are traversed.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for m in f.modalities:
        x = f.matrices[m].copy()
        idx = np.flatnonzero(f.masks[m])
        if idx.size:
            x[idx] = rng.random((idx.size, f.dim(m)))
        out[m] = x
    return _cleared(f, out)


def impute_global_mean(f: FeatureSet) -> FeatureSet:
    """Replace missing rows with the column-wise mean of observed rows."""
    out = {}
    for m in f.modalities:
        x = f.matrices[m].copy()
        if f.masks[m].any():
            x[f.masks[m]] = _observed_mean(f, m)
        out[m] = x
    return _cleared(f, out)


def impute_neigh_mean(f: FeatureSet, g: ItemGraph, fallback: str = "global-mean") -> FeatureSet:
    """Replace each missing row with the mean of its one-hop neighbor rows.

    Neighbors that are themselves missing contribute their zero
    placeholder and still count toward the divisor. Items with no
    neighbors use the configured fallback.
    """
    _check_graph(f, g)
    out = {}
    for m in f.modalities:
        base = _zero_init(f, m)  # simultaneous update: reads placeholders, not results
        x = f.matrices[m].copy()
        fallback_row = None
        for i in np.flatnonzero(f.masks[m]):
            nb = g.neighbors(i)
            if nb.size == 0:
                if fallback_row is None:
                    fallback_row = _fallback_row(f, m, fallback)
                x[i] = fallback_row
            else:
                # left fold in ascending neighbor order; the accumulation
                # order is part of the determinism contract
                acc = np.zeros(f.dim(m))
                for j in nb:
                    acc += base[j]
                x[i] = acc / nb.size
        out[m] = x
    return _cleared(f, out)


def _propagate(
    f: FeatureSet,
    hops: int,
    apply_op: Callable[[str, int, np.ndarray], np.ndarray],
    clamp: bool,
    on_iteration: IterationHook | None,
) -> dict[str, np.ndarray]:
    """Shared hop loop: zero-init, apply, optionally re-pin observed rows."""
    out = {}
    for m in f.modalities:
        mask = f.masks[m]
        observed = ~mask
        original = f.matrices[m]
        x = _zero_init(f, m)
        for t in range(1, hops + 1):
            x = apply_op(m, t, x)
            if clamp:
                x[observed] = original[observed]
            if on_iteration is not None:
                on_iteration(m, t, x)
        final = original.copy()
        final[mask] = x[mask]
        out[m] = final
    return out


def impute_multihop(
    f: FeatureSet,
    op: NormalizedOperator,
    hops: int,
    clamp: bool = True,
    on_iteration: IterationHook | None = None,
) -> FeatureSet:
    """Propagate features over the symmetric-normalized graph for `hops` steps.

    Missing rows start from zero; after every step the observed rows are
    reset to their original values (unless `clamp` is disabled), so
    information always flows outward from observed items.
    """
    if op.mode != MODE_SYM:
        raise InvalidParameter("multihop requires a sym-laplacian operator")
    if hops < 1:
        raise InvalidParameter(f"hops must be at least 1, got {hops}")
    _check_graph(f, op.base)
    s = op.matrix
    out = _propagate(f, hops, lambda m, t, x: s @ x, clamp, on_iteration)
    return _cleared(f, out)


def _ppr_fixed_point(
    a_sl, alpha: float, x0: np.ndarray, tolerance: float, step_cap: int
) -> tuple[np.ndarray, int, float]:
    """Fixed point of x = alpha * x0 + (1 - alpha) * A_sl @ x.

    Converges to alpha * B^-1 @ x0 when (1 - alpha) * rho(A_sl) < 1;
    otherwise the residual stalls and the step cap trips.
    """
    target = alpha * x0
    x = x0.copy()
    residual = 0.0
    for step in range(1, step_cap + 1):
        x_next = target + (1.0 - alpha) * (a_sl @ x)
        residual = float(np.max(np.abs(x_next - x))) if x.size else 0.0
        x = x_next
        if residual < tolerance:
            return x, step, residual
    raise DivergentDiffusion(
        f"personalized-PageRank fixed point did not reach residual {tolerance} "
        f"within {step_cap} steps at alpha={alpha} (last residual {residual:.3e})"
    )


def _pers_pagerank(
    f: FeatureSet,
    g: ItemGraph,
    alpha: float,
    hops: int,
    mode: str = "exact",
    iter_tolerance: float = 1e-8,
    clamp: bool = True,
    step_cap: int = FIXED_POINT_STEP_CAP,
    exact_cap: int | None = None,
    on_iteration: IterationHook | None = None,
) -> tuple[FeatureSet, dict[str, dict]]:
    if hops < 1:
        raise InvalidParameter(f"hops must be at least 1, got {hops}")
    if not (iter_tolerance > 0.0):
        raise InvalidParameter("iter_tolerance must be positive")
    _check_graph(f, g)
    stats: dict[str, dict] = {m: {} for m in f.modalities}
    if mode == "exact":
        kwargs = {} if exact_cap is None else {"cap": exact_cap}
        diffusion = ppr_exact(g, alpha, **kwargs).matrix
        out = _propagate(f, hops, lambda m, t, x: diffusion @ x, clamp, on_iteration)
    elif mode == "iterative":
        a_sl = ppr_iterative(g, alpha).matrix
        steps: dict[str, list[int]] = {m: [] for m in f.modalities}
        residuals: dict[str, list[float]] = {m: [] for m in f.modalities}

        def apply(m, t, x):
            result, n_steps, residual = _ppr_fixed_point(a_sl, alpha, x, iter_tolerance, step_cap)
            steps[m].append(n_steps)
            residuals[m].append(residual)
            return result

        out = _propagate(f, hops, apply, clamp, on_iteration)
        for m in f.modalities:
            stats[m]["fixed_point_steps"] = steps[m]
            stats[m]["fixed_point_residuals"] = residuals[m]
    else:
        raise InvalidParameter(f"unknown ppr mode '{mode}'")
    return _cleared(f, out), stats


def impute_pers_pagerank(
    f: FeatureSet,
    g: ItemGraph,
    alpha: float,
    hops: int,
    mode: str = "exact",
    iter_tolerance: float = 1e-8,
    clamp: bool = True,
    step_cap: int = FIXED_POINT_STEP_CAP,
    exact_cap: int | None = None,
    on_iteration: IterationHook | None = None,
) -> FeatureSet:
    """Propagate with the personalized-PageRank operator for `hops` steps.

    "exact" applies the dense alpha * B^-1; "iterative" realizes each
    application as a fixed point over the self-loop normalized adjacency
    and matches the dense operator wherever the underlying series
    converges. Observed rows are re-pinned after every application.
    """
    out, _ = _pers_pagerank(
        f, g, alpha, hops,
        mode=mode, iter_tolerance=iter_tolerance, clamp=clamp,
        step_cap=step_cap, exact_cap=exact_cap, on_iteration=on_iteration,
    )
    return out


def _cold_fallback_pass(
    original: FeatureSet, imputed: FeatureSet, g: ItemGraph, fallback: str
) -> FeatureSet:
    """Fill rows diffusion cannot reach (degree 0) with the fallback vector.

    With the "zeros" fallback this is a no-op: unreachable rows already
    sit at their zero placeholders.
    """
    if fallback == "zeros":
        return imputed
    cold = g.degrees == 0
    out = {}
    changed = False
    for m in original.modalities:
        rows = cold & original.masks[m]
        x = imputed.matrices[m]
        if rows.any():
            x = x.copy()
            x[rows] = _fallback_row(original, m, fallback)
            changed = True
        out[m] = x
    return _cleared(original, out) if changed else imputed


def impute(
    f: FeatureSet,
    r: InteractionMatrix,
    cfg: ImputeConfig,
    counts_graph: ItemGraph | None = None,
) -> tuple[FeatureSet, dict]:
    """Dispatch to the configured method, building graph artifacts on demand.

    Returns the imputed feature set and a JSON-ready run report with the
    configuration echo, per-modality counts and diffusion diagnostics.
    `counts_graph` lets sweeps reuse the co-interaction counts.
    """
    if f.n_items != r.n_items:
        raise InconsistentData(
            f"feature matrices have {f.n_items} rows but the dataset has {r.n_items} items"
        )
    started = time.perf_counter()
    details: dict[str, dict] = {
        m: {"imputed_rows": int(f.masks[m].sum()), "dim": f.dim(m)} for m in f.modalities
    }
    method = cfg.method
    if method == "zeros":
        out = impute_zeros(f)
    elif method == "random":
        out = impute_random(f, cfg.seed)
    elif method == "global-mean":
        out = impute_global_mean(f)
    else:
        counts = counts_graph if counts_graph is not None else cooccurrence(r)
        g = topk_sparsify(counts, cfg.top_k)
        for m in f.modalities:
            details[m]["cold_items"] = int(((g.degrees == 0) & f.masks[m]).sum())
        if method == "neigh-mean":
            out = impute_neigh_mean(f, g, cfg.cold_fallback)
        elif method == "multihop":
            out = impute_multihop(f, sym_norm_adjacency(g), cfg.hops, clamp=cfg.clamp)
            out = _cold_fallback_pass(f, out, g, cfg.cold_fallback)
        else:
            out, stats = _pers_pagerank(
                f, g, cfg.alpha, cfg.hops,
                mode=cfg.ppr_mode, iter_tolerance=cfg.iter_tolerance,
                clamp=cfg.clamp, exact_cap=cfg.ppr_exact_cap,
            )
            out = _cold_fallback_pass(f, out, g, cfg.cold_fallback)
            for m in f.modalities:
                details[m].update(stats[m])
    report = {
        "method": method,
        "config": cfg.as_dict(),
        "modalities": details,
        "timing": {"wall_s": time.perf_counter() - started},
    }
    return out, report
