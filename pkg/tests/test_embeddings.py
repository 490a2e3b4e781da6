import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from argrel.embeddings import VectorTable, embed_sequence, load_vectors


def test_load_two_words(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("hi 1.0 2.0\nyo 3.0 4.0\n")
    table = load_vectors(path, 2)
    assert len(table) == 2 and table.dim == 2
    np.testing.assert_array_equal(table.get("YO"), [3.0, 4.0])


def test_dimension_mismatch(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("hi 1.0 2.0\nyo 3.0 4.0 5.0\n")
    with pytest.raises(ValueError, match="2"):
        load_vectors(path, 2)


def test_empty_file(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("")
    table = load_vectors(path, 3)
    assert len(table) == 0 and table.get("any") is None


def test_duplicates_keep_first_and_header_skipped(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("2 2\nhi 1 2\nhi 5 6\n")
    np.testing.assert_array_equal(load_vectors(path, 2).get("hi"), [1, 2])


TABLE = VectorTable(3, {"a": np.array([1.0, 2.0, 3.0]), "b": np.array([-1.0, 0.5, 0.0])})


def test_truncation():
    seq = embed_sequence(["a"] * 120, TABLE, 100)
    assert seq.matrix.shape == (100, 3) and seq.mask.all()


def test_padding():
    seq = embed_sequence(["a", "b", "a"], TABLE, 100)
    assert seq.mask[:3].all() and not seq.mask[3:].any()
    assert not seq.matrix[3:].any()


def test_oov_row_zero_but_unmasked():
    seq = embed_sequence(["zzz", "a"], TABLE, 4)
    np.testing.assert_array_equal(seq.matrix[0], 0.0)
    assert seq.mask[0]


@given(st.lists(st.sampled_from(["a", "b", "oov"]), max_size=15), st.integers(1, 10))
def test_shape_and_mask_count(tokens, max_len):
    seq = embed_sequence(tokens, TABLE, max_len)
    assert seq.matrix.shape == (max_len, 3)
    assert seq.mask.sum() == min(len(tokens), max_len)
    assert not seq.matrix[~seq.mask].any()
    again = embed_sequence(tokens, TABLE, max_len)
    np.testing.assert_array_equal(seq.matrix, again.matrix)
