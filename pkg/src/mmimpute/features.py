"""Per-modality item feature matrices with whole-vector missingness masks."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameter
from .graph import InteractionMatrix

METHODS = ("zeros", "random", "global-mean", "neigh-mean", "multihop", "pers-pagerank")
GRAPH_METHODS = ("neigh-mean", "multihop", "pers-pagerank")
PPR_MODES = ("exact", "iterative")
FALLBACKS = ("zeros", "global-mean")


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Dense per-modality feature matrices over a shared item axis.

    `masks[m][i]` is True when item i's modality-m vector is missing; the
    corresponding matrix row is a zero placeholder until an imputer fills
    it. Modalities may have different dimensionalities. Matrices are held
    as float64; the on-disk format is single precision (see `io`).
    """

    modalities: tuple[str, ...]
    matrices: dict[str, np.ndarray]
    masks: dict[str, np.ndarray]

    def __post_init__(self):
        if not self.modalities:
            raise InvalidParameter("at least one modality is required")
        if len(set(self.modalities)) != len(self.modalities):
            raise InvalidParameter("duplicate modality names")
        if set(self.modalities) != set(self.matrices) or set(self.modalities) != set(self.masks):
            raise InvalidParameter("modalities, matrices and masks must use the same names")
        matrices = {}
        masks = {}
        n_items = None
        for m in self.modalities:
            mat = np.ascontiguousarray(np.asarray(self.matrices[m], dtype=np.float64))
            if mat.ndim != 2:
                raise InvalidParameter(f"modality '{m}': feature matrix must be 2-d")
            if n_items is None:
                n_items = mat.shape[0]
            elif mat.shape[0] != n_items:
                raise InvalidParameter(f"modality '{m}': row count differs across modalities")
            mask = np.asarray(self.masks[m], dtype=bool)
            if mask.shape != (mat.shape[0],):
                raise InvalidParameter(f"modality '{m}': mask must have one flag per item")
            matrices[m] = mat
            masks[m] = mask
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "masks", masks)

    @property
    def n_items(self) -> int:
        return self.matrices[self.modalities[0]].shape[0]

    def dim(self, modality: str) -> int:
        return self.matrices[modality].shape[1]

    def missing_counts(self) -> dict[str, int]:
        return {m: int(self.masks[m].sum()) for m in self.modalities}

    @classmethod
    def create(
        cls,
        matrices: Mapping[str, np.ndarray] | Sequence[tuple[str, np.ndarray]],
        masks: Mapping[str, np.ndarray] | None = None,
    ) -> "FeatureSet":
        """Build from (name, matrix) pairs; masks default to all-observed."""
        items = list(matrices.items()) if isinstance(matrices, Mapping) else list(matrices)
        names = tuple(name for name, _ in items)
        mats = {name: np.asarray(mat, dtype=np.float64) for name, mat in items}
        if masks is None:
            masks = {name: np.zeros(mat.shape[0], dtype=bool) for name, mat in mats.items()}
        else:
            masks = {name: np.asarray(masks[name], dtype=bool) for name in names}
        return cls(names, mats, masks)


@dataclass(frozen=True)
class ImputeConfig:
    """Method selector plus hyper-parameters for the dispatcher.

    `top_k` controls graph sparsification, `hops` the propagation depth,
    `alpha` the teleport probability, `ppr_mode` the dense-vs-fixed-point
    realization, `cold_fallback` how degree-0 masked items are filled,
    and `clamp` whether observed rows are re-pinned after every hop.
    """

    method: str
    top_k: int = 20
    hops: int = 10
    alpha: float = 0.85
    seed: int = 0
    ppr_mode: str = "exact"
    cold_fallback: str = "global-mean"
    iter_tolerance: float = 1e-8
    clamp: bool = True
    ppr_exact_cap: int = 2000

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameter(
                f"unknown method '{self.method}'; expected one of {', '.join(METHODS)}"
            )
        if self.top_k < 1:
            raise InvalidParameter(f"top_k must be at least 1, got {self.top_k}")
        if self.hops < 1:
            raise InvalidParameter(f"hops must be at least 1, got {self.hops}")
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidParameter(f"alpha must be in (0, 1], got {self.alpha}")
        if not (0 <= self.seed < 2**64):
            raise InvalidParameter("seed must be an unsigned 64-bit integer")
        if self.ppr_mode not in PPR_MODES:
            raise InvalidParameter(f"unknown ppr_mode '{self.ppr_mode}'")
        if self.cold_fallback not in FALLBACKS:
            raise InvalidParameter(f"unknown cold_fallback '{self.cold_fallback}'")
        if not (self.iter_tolerance > 0.0):
            raise InvalidParameter("iter_tolerance must be positive")
        if self.ppr_exact_cap < 1:
            raise InvalidParameter("ppr_exact_cap must be at least 1")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ValidationReport:
    """Outcome of consistency checks between features and interactions."""

    ok: bool
    missing: dict[str, int]
    problems: list[str]


def _format_indices(idx: np.ndarray, limit: int = 5) -> str:
    shown = ", ".join(str(i) for i in idx[:limit])
    more = f", ... ({idx.size} total)" if idx.size > limit else ""
    return shown + more


def validate(f: FeatureSet, r: InteractionMatrix) -> ValidationReport:
    """Report structural problems instead of raising.

    Checks row counts against the interaction matrix, finiteness of
    observed rows, and the all-zero placeholder contract of masked rows.
    """
    problems: list[str] = []
    if f.n_items != r.n_items:
        problems.append(
            f"feature matrices have {f.n_items} rows but the dataset has {r.n_items} items"
        )
    for m in f.modalities:
        mat, mask = f.matrices[m], f.masks[m]
        observed = ~mask
        bad_finite = np.flatnonzero(observed & ~np.isfinite(mat).all(axis=1))
        if bad_finite.size:
            problems.append(
                f"modality '{m}': non-finite values in observed rows {_format_indices(bad_finite)}"
            )
        bad_zero = np.flatnonzero(mask & (mat != 0.0).any(axis=1))
        if bad_zero.size:
            problems.append(
                f"modality '{m}': masked rows are not zero placeholders: {_format_indices(bad_zero)}"
            )
    return ValidationReport(ok=not problems, missing=f.missing_counts(), problems=problems)
