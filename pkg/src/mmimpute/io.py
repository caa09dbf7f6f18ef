"""File formats and dataset round-tripping.

Interactions are UTF-8 text, one "user_id<TAB>item_id" per line; blank
lines and lines starting with '#' are ignored. Feature matrices use a
little-endian binary format: the 8-byte magic "FMATv1\\0\\0", two u64
dimensions (rows, columns), then the float32 row-major payload. Masks
are text, one "item_id<TAB>modality_name" per line, resolved against
the interaction vocabulary.

Feature rows are keyed by item index, i.e. by first appearance of the
item id in the interactions file.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    EmptyDataset,
    FormatError,
    InconsistentData,
    ParseError,
    UnknownItem,
    UnknownModality,
)
from .features import FeatureSet
from .graph import InteractionMatrix, build_interaction_matrix

FEATURE_MAGIC = b"FMATv1\x00\x00"
_HEADER = struct.Struct("<8sQQ")


def _data_lines(path):
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def _split_pair(path, lineno: int, line: str, what: str) -> tuple[str, str]:
    parts = [p.strip() for p in line.split("\t")]
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ParseError(f"{path}:{lineno}: expected '{what}', got {line!r}")
    return parts[0], parts[1]


def read_interactions(path) -> InteractionMatrix:
    """Load a user/item pair file, indexing ids by first appearance."""
    pairs = [
        _split_pair(path, lineno, line, "user_id<TAB>item_id")
        for lineno, line in _data_lines(path)
    ]
    if not pairs:
        raise EmptyDataset(f"{path}: no interactions")
    return build_interaction_matrix(pairs)


def write_interactions(path, r: InteractionMatrix):
    with open(path, "w", encoding="utf-8") as handle:
        for u, i in r.iter_entries():
            handle.write(f"{r.user_ids[u]}\t{r.item_ids[i]}\n")


def read_feature_matrix(path) -> np.ndarray:
    """Load one modality's matrix; returns float64 widened from float32."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n_items, dim = _HEADER.unpack_from(data)
    if magic != FEATURE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + n_items * dim * 4
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload is {len(data) - _HEADER.size} bytes, "
            f"expected {n_items} x {dim} x 4"
        )
    payload = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    return payload.reshape(n_items, dim).astype(np.float64)


def write_feature_matrix(path, matrix: np.ndarray):
    """Store a matrix at single precision. Values must be finite.

    Single-precision inputs round-trip bit-exactly; higher precision is
    rounded to float32 on write.
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise FormatError("feature matrix must be 2-d")
    if arr.size and not np.isfinite(arr).all():
        raise FormatError(f"{path}: refusing to write non-finite values")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    with open(path, "wb") as handle:
        handle.write(_HEADER.pack(FEATURE_MAGIC, arr.shape[0], arr.shape[1]))
        handle.write(payload.tobytes())


def read_mask(path, r: InteractionMatrix) -> dict[str, set[int]]:
    """Load per-modality missing-item sets; duplicate lines collapse."""
    index = {item_id: i for i, item_id in enumerate(r.item_ids)}
    out: dict[str, set[int]] = {}
    for lineno, line in _data_lines(path):
        item_id, modality = _split_pair(path, lineno, line, "item_id<TAB>modality_name")
        if item_id not in index:
            raise UnknownItem(f"{path}:{lineno}: unknown item id '{item_id}'")
        out.setdefault(modality, set()).add(index[item_id])
    return out


def load_feature_set(
    modality_paths: Sequence[tuple[str, str]],
    r: InteractionMatrix,
    mask_path=None,
) -> FeatureSet:
    """Assemble a FeatureSet from per-modality files plus an optional mask."""
    matrices = []
    for name, path in modality_paths:
        mat = read_feature_matrix(path)
        if mat.shape[0] != r.n_items:
            raise InconsistentData(
                f"{path}: {mat.shape[0]} feature rows but the dataset has {r.n_items} items"
            )
        matrices.append((name, mat))
    names = [name for name, _ in matrices]
    masks = None
    if mask_path is not None:
        sets = read_mask(mask_path, r)
        unknown = set(sets) - set(names)
        if unknown:
            raise UnknownModality(
                f"{mask_path}: mask references unknown modalities: {', '.join(sorted(unknown))}"
            )
        masks = {}
        for name, _ in matrices:
            mask = np.zeros(r.n_items, dtype=bool)
            if name in sets:
                mask[sorted(sets[name])] = True
            masks[name] = mask
    return FeatureSet.create(matrices, masks)


def write_feature_set(directory, f: FeatureSet) -> dict[str, str]:
    """Write one .fmat file per modality; returns the file names used."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = {}
    for m in f.modalities:
        name = f"{m}.fmat"
        write_feature_matrix(directory / name, f.matrices[m])
        names[m] = name
    return names


def canonicalize_dataset(
    r: InteractionMatrix, f: FeatureSet | None = None
) -> tuple[InteractionMatrix, FeatureSet | None]:
    """Reindex items by first appearance in the row-major entry traversal.

    A dataset in canonical order survives a write/read cycle with
    identical indexing. Items or users without interactions cannot be
    represented in the interaction file and are rejected.
    """
    counts_u = np.diff(r.matrix.indptr)
    if (counts_u == 0).any():
        bad = [r.user_ids[u] for u in np.flatnonzero(counts_u == 0)[:5]]
        raise InconsistentData(
            f"users without interactions cannot be serialized: {', '.join(bad)}"
        )
    stream = r.matrix.indices  # row-major column stream
    seen = np.zeros(r.n_items, dtype=bool)
    seen[stream] = True
    if not seen.all():
        bad = [r.item_ids[i] for i in np.flatnonzero(~seen)[:5]]
        raise InconsistentData(
            f"items without interactions cannot be serialized: {', '.join(bad)}"
        )
    _, first_pos = np.unique(stream, return_index=True)
    appearance = stream[np.sort(first_pos)]
    item_new = np.empty(r.n_items, dtype=np.int64)
    item_new[appearance] = np.arange(r.n_items)
    if (item_new == np.arange(r.n_items)).all():
        return r, f
    coo = r.matrix.tocoo()
    matrix = InteractionMatrix.from_pairs(
        zip(coo.row, item_new[coo.col]),
        r.n_users,
        r.n_items,
        user_ids=r.user_ids,
        item_ids=tuple(r.item_ids[i] for i in appearance),
    )
    if f is None:
        return matrix, None
    old_of_new = appearance
    reordered = FeatureSet(
        f.modalities,
        {m: f.matrices[m][old_of_new] for m in f.modalities},
        {m: f.masks[m][old_of_new] for m in f.modalities},
    )
    return matrix, reordered


def write_dataset(directory, r: InteractionMatrix, f: FeatureSet) -> dict:
    """Write interactions plus feature files in canonical index order."""
    if f.n_items != r.n_items:
        raise InconsistentData(
            f"feature matrices have {f.n_items} rows but the dataset has {r.n_items} items"
        )
    r2, f2 = canonicalize_dataset(r, f)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_interactions(directory / "interactions.tsv", r2)
    feature_files = write_feature_set(directory, f2)
    return {"interactions": "interactions.tsv", "features": feature_files}
