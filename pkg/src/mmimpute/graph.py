"""Interaction matrices and item-item co-interaction graphs.

The imputation pipeline works on three structures: the binary user-item
incidence matrix, the item-item co-interaction graph derived from it
(edge weight = number of users shared by two items), and normalized
diffusion operators over the top-k sparsified binary graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    EmptyDataset,
    GraphTooLarge,
    InvalidParameter,
    SingularDiffusion,
)

KIND_COUNTS = "counts"
KIND_BINARY = "binary"

MODE_SYM = "sym-laplacian"
MODE_PPR_EXACT = "ppr-exact"
MODE_PPR_ITERATIVE = "ppr-iterative"

# Dense personalized-PageRank solves are refused above this many items.
PPR_EXACT_CAP = 2000

# 1-norm condition estimates above this are treated as singular.
CONDITION_LIMIT = 1e12


def _binary_csr(rows, cols, shape) -> sp.csr_matrix:
    data = np.ones(len(rows), dtype=np.int64)
    matrix = sp.coo_matrix((data, (rows, cols)), shape=shape).tocsr()
    matrix.data[:] = 1  # collapse duplicate pairs
    matrix.sort_indices()
    return matrix


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Binary user-item incidence plus the external id vocabularies.

    `matrix` is CSR of shape (n_users, n_items) with every stored value 1.
    Indices follow first appearance in the source stream, so a dataset
    written to disk and re-read reproduces the same indexing.
    """

    matrix: sp.csr_matrix
    user_ids: tuple[str, ...]
    item_ids: tuple[str, ...]

    def __post_init__(self):
        n_users, n_items = self.matrix.shape
        if len(self.user_ids) != n_users or len(self.item_ids) != n_items:
            raise InvalidParameter("id vocabularies do not match the matrix shape")
        if len(set(self.user_ids)) != n_users:
            raise InvalidParameter("duplicate user ids")
        if len(set(self.item_ids)) != n_items:
            raise InvalidParameter("duplicate item ids")

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_items(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_interactions(self) -> int:
        return int(self.matrix.nnz)

    def iter_entries(self):
        """Yield (user_index, item_index) pairs in row-major order."""
        indptr, indices = self.matrix.indptr, self.matrix.indices
        for u in range(self.n_users):
            for i in indices[indptr[u]:indptr[u + 1]]:
                yield u, int(i)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[int, int]],
        n_users: int,
        n_items: int,
        user_ids: Sequence[str] | None = None,
        item_ids: Sequence[str] | None = None,
    ) -> "InteractionMatrix":
        """Build from integer index pairs with fixed dimensions.

        Unlike `build_interaction_matrix`, rows and columns without any
        interaction are preserved.
        """
        rows, cols = [], []
        for u, i in pairs:
            if not (0 <= u < n_users and 0 <= i < n_items):
                raise InvalidParameter(f"entry ({u}, {i}) out of range")
            rows.append(u)
            cols.append(i)
        if user_ids is None:
            user_ids = tuple(f"u{k}" for k in range(n_users))
        if item_ids is None:
            item_ids = tuple(f"i{k}" for k in range(n_items))
        matrix = _binary_csr(rows, cols, (n_users, n_items))
        return cls(matrix, tuple(user_ids), tuple(item_ids))


def build_interaction_matrix(pairs: Iterable[tuple[str, str]]) -> InteractionMatrix:
    """Index users and items by first appearance and build the incidence matrix.

    Duplicate (user, item) pairs collapse to a single entry.
    """
    users: dict[str, int] = {}
    items: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    for user_id, item_id in pairs:
        rows.append(users.setdefault(user_id, len(users)))
        cols.append(items.setdefault(item_id, len(items)))
    if not rows:
        raise EmptyDataset("no interactions")
    matrix = _binary_csr(rows, cols, (len(users), len(items)))
    return InteractionMatrix(matrix, tuple(users), tuple(items))


@dataclass(frozen=True, eq=False)
class ItemGraph:
    """Symmetric item-item graph with a zero diagonal.

    kind "counts": weights are shared-user counts (integers >= 1).
    kind "binary": all stored weights are 1. `degrees[i]` is the number of
    stored off-diagonal neighbors of item i.
    """

    adjacency: sp.csr_matrix
    kind: str
    degrees: np.ndarray

    @property
    def n_items(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        """Neighbor indices of item i, ascending."""
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]


def _row_nnz(matrix: sp.csr_matrix) -> np.ndarray:
    return np.diff(matrix.indptr).astype(np.int64)


def cooccurrence(r: InteractionMatrix) -> ItemGraph:
    """Item-item co-interaction counts.

    Entry (i, j) is the number of users who interacted with both items,
    obtained as the off-diagonal part of the Gram matrix of the incidence
    columns. The diagonal (per-item popularity) carries no inter-item
    signal and is discarded.
    """
    m = r.matrix
    gram = (m.T @ m).tocoo()
    off = gram.row != gram.col
    counts = sp.csr_matrix(
        (gram.data[off], (gram.row[off], gram.col[off])),
        shape=(r.n_items, r.n_items),
        dtype=np.int64,
    )
    counts.sort_indices()
    return ItemGraph(counts, KIND_COUNTS, _row_nnz(counts))


def topk_sparsify(g: ItemGraph, k: int) -> ItemGraph:
    """Keep each row's k strongest co-interaction edges and binarize.

    Ties in counts break toward the lower item index. An edge survives if
    either endpoint selects it, so the result stays symmetric.
    """
    if g.kind != KIND_COUNTS:
        raise InvalidParameter("top-k sparsification expects a counts graph")
    if k < 1:
        raise InvalidParameter(f"top-k must be at least 1, got {k}")
    adj = g.adjacency
    indptr, indices, data = adj.indptr, adj.indices, adj.data
    sel_rows: list[np.ndarray] = []
    sel_cols: list[np.ndarray] = []
    for i in range(g.n_items):
        cols = indices[indptr[i]:indptr[i + 1]]
        if cols.size == 0:
            continue
        if cols.size > k:
            counts = data[indptr[i]:indptr[i + 1]]
            keep = np.lexsort((cols, -counts))[:k]  # count desc, index asc
            cols = cols[keep]
        sel_rows.append(np.full(cols.size, i, dtype=np.int64))
        sel_cols.append(cols.astype(np.int64))
    n = g.n_items
    if not sel_rows:
        empty = sp.csr_matrix((n, n), dtype=np.int64)
        return ItemGraph(empty, KIND_BINARY, np.zeros(n, dtype=np.int64))
    rows = np.concatenate(sel_rows)
    cols = np.concatenate(sel_cols)
    directed = sp.coo_matrix(
        (np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(n, n)
    ).tocsr()
    sym = (directed + directed.T).tocsr()
    sym.data[:] = 1
    sym.sort_indices()
    return ItemGraph(sym, KIND_BINARY, _row_nnz(sym))


@dataclass(frozen=True, eq=False)
class NormalizedOperator:
    """A diffusion operator derived from a binary item graph.

    mode "sym-laplacian": `matrix` is the sparse symmetric normalization
    of the adjacency, entry (i, j) = 1/(sqrt(d_i) sqrt(d_j)) for
    neighbors, with no self term. Zero-degree items give zero rows.

    mode "ppr-exact": `matrix` is the dense personalized-PageRank
    operator alpha * B^-1 with B = I - (1 - alpha) * A_sl.

    mode "ppr-iterative": `matrix` is the sparse self-loop normalized
    adjacency A_sl (diagonal 1/d_i, off-diagonal as above) used by the
    fixed-point solver.
    """

    base: ItemGraph
    mode: str
    alpha: float | None
    matrix: sp.csr_matrix | np.ndarray


def _require_binary(g: ItemGraph):
    if g.kind != KIND_BINARY:
        raise InvalidParameter("a binary (sparsified) item graph is required")


def _check_alpha(alpha: float):
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameter(f"alpha must be in (0, 1], got {alpha}")


def _degree_scaled(g: ItemGraph, with_self_loops: bool) -> sp.csr_matrix:
    d = g.degrees.astype(np.float64)
    pos = d > 0
    inv_sqrt = np.zeros_like(d)
    inv_sqrt[pos] = 1.0 / np.sqrt(d[pos])
    scale = sp.diags(inv_sqrt)
    w = (scale @ g.adjacency.astype(np.float64) @ scale).tocsr()
    if with_self_loops:
        inv = np.zeros_like(d)
        inv[pos] = 1.0 / d[pos]
        w = (w + sp.diags(inv)).tocsr()
    w.sort_indices()
    return w


def sym_norm_adjacency(g: ItemGraph) -> NormalizedOperator:
    """Symmetric degree normalization of a binary item graph."""
    _require_binary(g)
    return NormalizedOperator(g, MODE_SYM, None, _degree_scaled(g, with_self_loops=False))


def ppr_iterative(g: ItemGraph, alpha: float) -> NormalizedOperator:
    """Operator for fixed-point personalized-PageRank diffusion.

    Carries the self-loop normalized adjacency; each application of the
    diffusion is later realized as the fixed point of
    x = alpha * x0 + (1 - alpha) * A_sl @ x.
    """
    _check_alpha(alpha)
    _require_binary(g)
    return NormalizedOperator(g, MODE_PPR_ITERATIVE, alpha, _degree_scaled(g, with_self_loops=True))


def ppr_exact(g: ItemGraph, alpha: float, cap: int = PPR_EXACT_CAP) -> NormalizedOperator:
    """Dense personalized-PageRank diffusion operator alpha * B^-1.

    B = I - (1 - alpha) * A_sl, solved directly; isolated items reduce to
    identity rows. Intended for small graphs; beyond `cap` items use the
    iterative mode instead.
    """
    _check_alpha(alpha)
    _require_binary(g)
    n = g.n_items
    if n > cap:
        raise GraphTooLarge(f"{n} items exceeds the dense diffusion cap of {cap}")
    b = np.eye(n) - (1.0 - alpha) * _degree_scaled(g, with_self_loops=True).toarray()
    try:
        diffusion = np.linalg.solve(b, alpha * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise SingularDiffusion(f"diffusion system is singular at alpha={alpha}") from exc
    if n:
        # 1-norm condition estimate; the inverse is already in hand.
        cond = np.abs(b).sum(axis=0).max() * np.abs(diffusion / alpha).sum(axis=0).max()
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularDiffusion(
                f"diffusion system is ill-conditioned at alpha={alpha} (condition ~{cond:.2e})"
            )
    return NormalizedOperator(g, MODE_PPR_EXACT, alpha, diffusion)
