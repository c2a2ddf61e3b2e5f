import numpy as np
import pytest

from kgfuse import DataError, Triple, build_vocab, load_triples, \
    make_clustered, make_synthetic
from kgfuse.data import dataset_stats, lattice_positions, write_triple_file


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return p


def test_vocab_lexicographic_indexing(tmp_path):
    f = write(tmp_path, "t.txt", ["a\tr\tb", "b\tr\tc"])
    vocab = build_vocab([f])
    assert vocab.entity_names == ["a", "b", "c"]
    assert vocab.relation_names == ["r"]
    assert vocab.entity_index == {"a": 0, "b": 1, "c": 2}


def test_vocab_roundtrip_and_no_duplicates(tmp_path):
    f = write(tmp_path, "t.txt", ["x\tp\ty", "y\tq\tx", "x\tp\ty"])
    vocab = build_vocab([f])
    for name, idx in vocab.entity_index.items():
        assert vocab.entity_names[idx] == name
    assert len(set(vocab.entity_names)) == len(vocab.entity_names)


def test_self_loop_accepted(tmp_path):
    f = write(tmp_path, "t.txt", ["x\trel\tx"])
    vocab = build_vocab([f])
    ts = load_triples(f, vocab, "train")
    assert vocab.entity_names == ["x"]
    assert vocab.relation_names == ["rel"]
    assert ts.triples == [Triple(0, 0, 0)]


def test_vocab_includes_valid_test_only_names(tmp_path):
    train = write(tmp_path, "train.txt", ["a\tr\tb"])
    test = write(tmp_path, "test.txt", ["a\tr\tz"])
    vocab = build_vocab([train, test])
    assert "z" in vocab.entity_index


def test_malformed_line_reports_location(tmp_path):
    f = write(tmp_path, "bad.txt", ["a\tr\tb", "only two\tfields"])
    with pytest.raises(DataError, match="bad.txt:2"):
        build_vocab([f])


def test_empty_file_set_rejected():
    with pytest.raises(DataError):
        build_vocab([])


def test_whitespace_trim_and_blank_lines(tmp_path):
    f = write(tmp_path, "t.txt", [" a \tr\t b ", "", "   "])
    vocab = build_vocab([f])
    assert vocab.entity_names == ["a", "b"]


def test_duplicate_triples_dropped_with_warning(tmp_path):
    f = write(tmp_path, "t.txt", ["a\tr\tb", "a\tr\tb"])
    vocab = build_vocab([f])
    ts = load_triples(f, vocab, "train")
    assert len(ts) == 1
    assert ts.duplicate_warnings == 1


def test_unknown_name_rejected(tmp_path):
    train = write(tmp_path, "train.txt", ["a\tr\tb"])
    other = write(tmp_path, "other.txt", ["a\tr\tmystery"])
    vocab = build_vocab([train])
    with pytest.raises(DataError, match="mystery"):
        load_triples(other, vocab, "test")


def test_contains_agrees_with_linear_scan(tmp_path):
    f = write(tmp_path, "t.txt", [f"e{i}\tr\te{(i * 3) % 7}" for i in range(7)])
    vocab = build_vocab([f])
    ts = load_triples(f, vocab, "train")
    for h in range(vocab.n_entities):
        for t in range(vocab.n_entities):
            expected = any(x.head == h and x.relation == 0 and x.tail == t
                           for x in ts.triples)
            assert ts.contains(h, 0, t) == expected


def test_stats_counts(tmp_path):
    train = write(tmp_path, "train.txt", ["a\tr\tb", "b\tr\tc"])
    valid = write(tmp_path, "valid.txt", ["a\tr\tc"])
    test = write(tmp_path, "test.txt", ["c\tr\ta"])
    vocab = build_vocab([train, valid, test])
    s = dataset_stats(vocab, load_triples(train, vocab, "train"),
                      load_triples(valid, vocab, "valid"),
                      load_triples(test, vocab, "test"))
    assert s.to_dict() == {"entities": 3, "relations": 1, "train": 2,
                           "valid": 1, "test": 1}


def test_synthetic_triples_match_planted_offsets():
    vocab, splits, planted = make_synthetic(30, 2, 2, seed=3)
    positions = lattice_positions(30, 2)
    all_triples = [t for s in splits.values() for t in s]
    for t in all_triples:
        off = planted[t.relation]
        assert tuple(b - a for a, b in zip(positions[t.head],
                                           positions[t.tail])) == off
    # brute-force enumeration of lattice pairs gives the same count
    expected = sum(1 for off in planted.values() for p in positions
                   if tuple(a + b for a, b in zip(p, off)) in set(positions))
    assert len(all_triples) == expected


def test_synthetic_deterministic():
    a = make_synthetic(25, 1, 2, seed=9)
    b = make_synthetic(25, 1, 2, seed=9)
    assert a[0] == b[0]
    assert a[2] == b[2]
    for role in ("train", "valid", "test"):
        assert [t.as_tuple() for t in a[1][role]] == \
               [t.as_tuple() for t in b[1][role]]


def test_synthetic_zero_offset_rejected():
    with pytest.raises(ValueError, match="zero offset"):
        make_synthetic(25, 1, 2, seed=0, offsets=[(0, 0)])


def test_synthetic_explicit_offset_count_matches_hand_enumeration():
    # 5x5 grid, offset (1, 0): every row pair except the last column -> 20
    vocab, splits, planted = make_synthetic(25, 1, 2, seed=0, offsets=[(1, 0)])
    assert planted == {0: (1, 0)}
    assert sum(len(s) for s in splits.values()) == 20


def test_synthetic_too_small_rejected():
    with pytest.raises(ValueError):
        make_synthetic(4, 1, 2, seed=0)


def test_clustered_generator_links_follow_clusters():
    vocab, splits, literals = make_clustered(40, 4, seed=5, train_fraction=0.1)
    assert literals.shape == (40, 4)
    assert np.all(literals.sum(axis=1) == 1.0)
    cluster = literals.argmax(axis=1)
    for s in splits.values():
        for t in s:
            assert cluster[t.tail] == (cluster[t.head] + 1) % 4


def test_triple_file_roundtrip(tmp_path):
    vocab, splits, _ = make_synthetic(25, 1, 2, seed=2)
    out = tmp_path / "train.txt"
    write_triple_file(out, vocab, splits["train"])
    vocab2 = build_vocab([out])
    reloaded = load_triples(out, vocab2, "train")
    names = lambda v, t: (v.entity_names[t.head], v.relation_names[t.relation],
                          v.entity_names[t.tail])
    assert [names(vocab2, t) for t in reloaded] == \
           [names(vocab, t) for t in splits["train"]]
