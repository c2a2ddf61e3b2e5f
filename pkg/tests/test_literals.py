import numpy as np
import pytest

from kgfuse import LiteralProjection, Vocabulary, load_literal_file, \
    write_literal_file
from kgfuse.errors import DataError
from kgfuse.literals import project, read_literal_records, store_from_arrays


@pytest.fixture
def vocab():
    return Vocabulary(["a", "b", "q"], ["r1", "r2"])


def write_tsv(path, rows):
    path.write_text("".join("\t".join(r) + "\n" for r in rows), encoding="utf-8")
    return path


def test_full_coverage(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [
        ("E", "a", "1 0"), ("E", "b", "0 1"), ("E", "q", "1 1"),
        ("R", "r1", "2 2"), ("R", "r2", "3 3")])
    store = load_literal_file(f, vocab)
    assert store.dim == 2
    assert store.coverage["missing_entities"] == 0
    assert store.coverage["missing_relations"] == 0
    assert np.array_equal(store.entity_vectors[vocab.entity_index["q"]], [1, 1])


def test_missing_policy_zeros(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [
        ("E", "a", "1 0"), ("E", "b", "0 1"),
        ("R", "r1", "2 2"), ("R", "r2", "3 3")])
    store = load_literal_file(f, vocab, missing_policy="zeros")
    assert store.coverage["missing_entities"] == 1
    assert np.array_equal(store.entity_vectors[vocab.entity_index["q"]], [0, 0])


def test_missing_policy_mean(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [
        ("E", "a", "1 3"), ("E", "b", "3 1"),
        ("R", "r1", "2 2"), ("R", "r2", "4 4")])
    store = load_literal_file(f, vocab, missing_policy="mean")
    assert np.array_equal(store.entity_vectors[vocab.entity_index["q"]], [2, 2])


def test_unknown_names_ignored_with_count(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [
        ("E", "a", "1 0"), ("E", "stranger", "9 9")])
    store = load_literal_file(f, vocab)
    assert store.coverage["ignored_names"] == 1


def test_dimension_disagreement_rejected(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [("E", "a", "1 0"), ("E", "b", "1 0 0")])
    with pytest.raises(DataError):
        load_literal_file(f, vocab)


def test_binary_roundtrip_canonical_order(tmp_path, vocab):
    rng = np.random.default_rng(0)
    store = store_from_arrays(rng.standard_normal((3, 4)).astype(np.float32),
                              rng.standard_normal((2, 4)).astype(np.float32))
    p1 = tmp_path / "a.leb"
    p2 = tmp_path / "b.leb"
    write_literal_file(p1, store, vocab)
    reloaded = load_literal_file(p1, vocab)
    assert np.array_equal(reloaded.entity_vectors, store.entity_vectors)
    assert np.array_equal(reloaded.relation_vectors, store.relation_vectors)
    write_literal_file(p2, reloaded, vocab)
    assert p1.read_bytes() == p2.read_bytes()


def test_binary_bad_version_rejected(tmp_path, vocab):
    p = tmp_path / "bad.leb"
    data = bytearray()
    data += b"LEB1"
    import struct
    data += struct.pack("<IIQ", 99, 2, 0)
    p.write_bytes(bytes(data))
    with pytest.raises(DataError, match="version"):
        read_literal_records(p)


def test_coverage_equals_set_difference(tmp_path, vocab):
    f = write_tsv(tmp_path / "l.tsv", [("E", "a", "1 0"), ("R", "r2", "1 1")])
    store = load_literal_file(f, vocab)
    present_e = {"a"}
    present_r = {"r2"}
    assert store.coverage["found_entities"] == len(present_e)
    assert store.coverage["missing_entities"] == len(set(vocab.entity_names) - present_e)
    assert store.coverage["missing_relations"] == len(set(vocab.relation_names) - present_r)


def test_tab_escape_in_tsv_names(tmp_path):
    vocab = Vocabulary(["with\ttab"], ["r"])
    f = write_tsv(tmp_path / "l.tsv", [("E", "with\\ttab", "1 2"),
                                       ("R", "r", "0 0")])
    store = load_literal_file(f, vocab)
    assert store.coverage["missing_entities"] == 0


def test_projection_identity_and_constant():
    store = store_from_arrays(np.array([[1.0, 2.0], [3.0, 4.0]]),
                              np.zeros((1, 2)))
    ident = LiteralProjection(np.eye(2), np.zeros(2))
    ent, _ = project(store, ident)
    assert np.allclose(ent, store.entity_vectors)
    const = LiteralProjection(np.zeros((2, 2)), np.array([5.0, -1.0]))
    ent, rel = project(store, const)
    assert np.allclose(ent, [[5, -1], [5, -1]])
    assert np.allclose(rel, [[5, -1]])


def test_projection_against_dot_product_oracle():
    rng = np.random.default_rng(2)
    store = store_from_arrays(rng.standard_normal((4, 5)), rng.standard_normal((2, 5)))
    proj = LiteralProjection(rng.standard_normal((3, 5)), rng.standard_normal(3))
    ent, rel = project(store, proj)
    for table, out in ((store.entity_vectors, ent), (store.relation_vectors, rel)):
        for i in range(len(table)):
            for o in range(3):
                expected = proj.bias[o] + sum(
                    proj.weight[o, j] * table[i, j] for j in range(5))
                assert out[i, o] == pytest.approx(expected, abs=1e-6)


def test_projection_shape_mismatch():
    store = store_from_arrays(np.zeros((2, 4)), np.zeros((1, 4)))
    proj = LiteralProjection(np.zeros((3, 5)), np.zeros(3))
    with pytest.raises(ValueError):
        project(store, proj)
