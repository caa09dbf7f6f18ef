import numpy as np
import pytest

from mmimpute import (
    EmptyDataset,
    FormatError,
    InconsistentData,
    ParseError,
    UnknownItem,
    UnknownModality,
)
from mmimpute.graph import InteractionMatrix
from mmimpute.io import (
    canonicalize_dataset,
    load_feature_set,
    read_feature_matrix,
    read_interactions,
    read_mask,
    write_dataset,
    write_feature_matrix,
    write_interactions,
)

from helpers import feature_set


def test_read_interactions_basic(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("u1\ta\nu1\tb\n")
    r = read_interactions(path)
    assert (r.n_users, r.n_items) == (1, 2)


def test_read_interactions_skips_comments_and_blanks(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("# comment\n\nu1\ta\n")
    r = read_interactions(path)
    assert (r.n_users, r.n_items, r.n_interactions) == (1, 1, 1)


def test_read_interactions_space_is_parse_error(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("u1 a\n")
    with pytest.raises(ParseError) as excinfo:
        read_interactions(path)
    assert ":1:" in str(excinfo.value)


def test_read_interactions_extra_field_is_parse_error(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("u1\ta\nu1\ta\tb\n")
    with pytest.raises(ParseError) as excinfo:
        read_interactions(path)
    assert ":2:" in str(excinfo.value)


def test_read_interactions_empty(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("# nothing\n")
    with pytest.raises(EmptyDataset):
        read_interactions(path)


def test_feature_matrix_round_trip(tmp_path):
    path = tmp_path / "m.fmat"
    rng = np.random.default_rng(1)
    # single-precision values round-trip bit-exactly
    matrix = rng.standard_normal((7, 5)).astype(np.float32).astype(np.float64)
    write_feature_matrix(path, matrix)
    again = read_feature_matrix(path)
    assert again.dtype == np.float64
    assert again.tobytes() == matrix.tobytes()
    # and the byte stream is a fixed point of write(read(...))
    first = path.read_bytes()
    write_feature_matrix(path, again)
    assert path.read_bytes() == first


def test_feature_matrix_empty_rows(tmp_path):
    path = tmp_path / "m.fmat"
    write_feature_matrix(path, np.zeros((0, 4)))
    assert read_feature_matrix(path).shape == (0, 4)


def test_feature_matrix_truncated(tmp_path):
    path = tmp_path / "m.fmat"
    write_feature_matrix(path, np.ones((3, 2)))
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(FormatError):
        read_feature_matrix(path)


def test_feature_matrix_bad_magic(tmp_path):
    path = tmp_path / "m.fmat"
    write_feature_matrix(path, np.ones((1, 1)))
    data = bytearray(path.read_bytes())
    data[0] = ord("X")
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        read_feature_matrix(path)


def test_feature_matrix_rejects_nonfinite(tmp_path):
    with pytest.raises(FormatError):
        write_feature_matrix(tmp_path / "m.fmat", np.array([[np.inf]]))


def interactions_abc(tmp_path):
    path = tmp_path / "r.tsv"
    path.write_text("u1\ta\nu1\tb\nu2\tc\n")
    return read_interactions(path)


def test_read_mask_resolves_ids(tmp_path):
    r = interactions_abc(tmp_path)
    mask_path = tmp_path / "mask.tsv"
    mask_path.write_text("a\ttext\na\ttext\nc\tvisual\n")
    sets = read_mask(mask_path, r)
    assert sets == {"text": {0}, "visual": {2}}


def test_read_mask_unknown_item(tmp_path):
    r = interactions_abc(tmp_path)
    mask_path = tmp_path / "mask.tsv"
    mask_path.write_text("zzz\ttext\n")
    with pytest.raises(UnknownItem) as excinfo:
        read_mask(mask_path, r)
    assert ":1:" in str(excinfo.value)


def test_load_feature_set_applies_mask_and_checks(tmp_path):
    r = interactions_abc(tmp_path)
    fpath = tmp_path / "text.fmat"
    write_feature_matrix(fpath, np.arange(6, dtype=float).reshape(3, 2))
    mask_path = tmp_path / "mask.tsv"
    mask_path.write_text("b\ttext\n")
    f = load_feature_set([("text", fpath)], r, mask_path)
    assert f.masks["text"].tolist() == [False, True, False]

    bad = tmp_path / "short.fmat"
    write_feature_matrix(bad, np.zeros((2, 2)))
    with pytest.raises(InconsistentData):
        load_feature_set([("text", bad)], r)

    mask_path.write_text("b\taudio\n")
    with pytest.raises(UnknownModality):
        load_feature_set([("text", fpath)], r, mask_path)


def test_write_dataset_round_trip(tmp_path):
    # an entry order whose first appearances disagree with index order
    r = InteractionMatrix.from_pairs([(0, 2), (0, 0), (1, 1), (1, 2)], 2, 3)
    f = feature_set(np.arange(12, dtype=np.float32).reshape(3, 4), [False] * 3)
    out = tmp_path / "ds"
    write_dataset(out, r, f)
    r2 = read_interactions(out / "interactions.tsv")
    m2 = read_feature_matrix(out / "m.fmat")
    # re-read indexing matches the written feature rows: the row for an
    # item id must equal the original row for that id
    for new_idx, item_id in enumerate(r2.item_ids):
        old_idx = r.item_ids.index(item_id)
        assert np.array_equal(m2[new_idx], f.matrices["m"][old_idx])
    # row-major traversal visits u0's items in index order, so the
    # first-appearance order is i0, i2, i1
    assert r2.item_ids == ("i0", "i2", "i1")
    assert np.array_equal(r2.matrix.toarray(), r.matrix.toarray()[:, [0, 2, 1]])


def test_write_dataset_rejects_isolated_items(tmp_path):
    r = InteractionMatrix.from_pairs([(0, 0)], 1, 2)
    f = feature_set(np.ones((2, 2)), [False, False])
    with pytest.raises(InconsistentData):
        write_dataset(tmp_path / "ds", r, f)


def test_canonicalize_identity_for_file_data(tmp_path):
    r = interactions_abc(tmp_path)
    r2, _ = canonicalize_dataset(r)
    assert r2 is r


def test_write_interactions_round_trip(tmp_path):
    r = interactions_abc(tmp_path)
    out = tmp_path / "again.tsv"
    write_interactions(out, r)
    r2 = read_interactions(out)
    assert r2.user_ids == r.user_ids
    assert r2.item_ids == r.item_ids
    assert np.array_equal(r2.matrix.toarray(), r.matrix.toarray())
