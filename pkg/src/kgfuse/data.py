"""Triple file loading, vocabulary indexing, and synthetic graph generators."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

__all__ = [
    "Triple", "Vocabulary", "TripleSet", "DatasetStats",
    "build_vocab", "load_triples", "dataset_stats", "lattice_positions",
    "make_synthetic", "make_clustered", "write_triple_file",
]


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int

    def as_tuple(self):
        return (self.head, self.relation, self.tail)


class Vocabulary:
    """Bidirectional name<->index maps for entities and relations.

    Indices are dense, 0-based, and assigned in ascending lexicographic
    order of names, so two runs over the same files agree exactly.
    """

    def __init__(self, entity_names, relation_names):
        self.entity_names = sorted(set(entity_names))
        self.relation_names = sorted(set(relation_names))
        self.entity_index = {n: i for i, n in enumerate(self.entity_names)}
        self.relation_index = {n: i for i, n in enumerate(self.relation_names)}

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    def __eq__(self, other):
        return (isinstance(other, Vocabulary)
                and self.entity_names == other.entity_names
                and self.relation_names == other.relation_names)


class TripleSet:
    """Ordered, duplicate-free list of triples with O(1) membership lookup."""

    def __init__(self, triples, role: str):
        if role not in ("train", "valid", "test"):
            raise ValueError(f"unknown role {role!r}")
        self.role = role
        self.triples = []
        self._members = set()
        self.duplicate_warnings = 0
        for t in triples:
            key = t.as_tuple()
            if key in self._members:
                self.duplicate_warnings += 1
                continue
            self._members.add(key)
            self.triples.append(t)
        if self.duplicate_warnings:
            logger.warning("%s set: dropped %d duplicate triples",
                           role, self.duplicate_warnings)

    def contains(self, head: int, relation: int, tail: int) -> bool:
        return (head, relation, tail) in self._members

    def as_array(self) -> np.ndarray:
        """(n, 3) int64 array of (head, relation, tail) rows."""
        return np.array([t.as_tuple() for t in self.triples], dtype=np.int64)

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)


@dataclass(frozen=True)
class DatasetStats:
    n_entities: int
    n_relations: int
    n_train: int
    n_valid: int
    n_test: int

    def to_dict(self):
        return {"entities": self.n_entities, "relations": self.n_relations,
                "train": self.n_train, "valid": self.n_valid, "test": self.n_test}


def _parse_lines(path):
    """Yield (line_number, head, relation, tail) for each nonempty line."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = line.rstrip("\n").rstrip("\r").split("\t")
            if len(parts) != 3:
                raise DataError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
            h, r, t = (p.strip() for p in parts)
            if not h or not r or not t:
                raise DataError(f"{path}:{lineno}: empty field")
            yield lineno, h, r, t


def build_vocab(triple_files) -> Vocabulary:
    """Index every entity/relation name occurring in any of the files.

    Names present only in valid/test files are included too, so the model
    can score them at evaluation time.
    """
    files = list(triple_files)
    if not files:
        raise DataError("no triple files given")
    entities, relations = set(), set()
    for path in files:
        for _, h, r, t in _parse_lines(path):
            entities.add(h)
            entities.add(t)
            relations.add(r)
    if not entities:
        raise DataError("no triples found in any input file")
    return Vocabulary(entities, relations)


def load_triples(path, vocab: Vocabulary, role: str) -> TripleSet:
    """Load one split, mapping names to indices through ``vocab``."""
    triples = []
    for lineno, h, r, t in _parse_lines(path):
        try:
            triples.append(Triple(vocab.entity_index[h],
                                  vocab.relation_index[r],
                                  vocab.entity_index[t]))
        except KeyError as exc:
            raise DataError(f"{path}:{lineno}: unknown name {exc.args[0]!r}") from None
    return TripleSet(triples, role)


def dataset_stats(vocab: Vocabulary, train: TripleSet, valid: TripleSet,
                  test: TripleSet) -> DatasetStats:
    return DatasetStats(vocab.n_entities, vocab.n_relations,
                        len(train), len(valid), len(test))


def _split_triples(named_triples, seed):
    """Seeded shuffle, then 80/10/10 split (train takes the remainder)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(named_triples))
    shuffled = [named_triples[i] for i in order]
    n = len(shuffled)
    n_valid = n // 10
    n_test = n // 10
    return (shuffled[: n - n_valid - n_test],
            shuffled[n - n_valid - n_test: n - n_test],
            shuffled[n - n_test:])


def _index_split(vocab, named, role):
    return TripleSet([Triple(vocab.entity_index[h], vocab.relation_index[r],
                             vocab.entity_index[t]) for h, r, t in named], role)


def lattice_positions(n_entities: int, grid_dim: int):
    """Lattice coordinates of entity i, in entity-index order."""
    side = 1
    while side ** grid_dim < n_entities:
        side += 1
    return list(itertools.product(range(side), repeat=grid_dim))[:n_entities]


def make_synthetic(n_entities: int, n_relations: int, grid_dim: int, seed: int,
                   offsets=None):
    """Planted-lattice KG: entities are lattice points, relations are offsets.

    A triple (h, r, t) exists iff pos(t) = pos(h) + offset(r), so the graph
    is exactly translational.  Offsets default to distinct random nonzero
    steps with components in {-1, 0, 1}; an explicit list may be passed
    instead (the all-zero offset is rejected, it would only generate
    self-loops).  Returns (vocab, splits dict, offsets) where ``offsets``
    maps relation index -> offset tuple.
    """
    if n_entities < 20:
        raise ValueError("n_entities must be >= 20")
    if n_relations < 1:
        raise ValueError("n_relations must be >= 1")
    if grid_dim < 1:
        raise ValueError("grid_dim must be >= 1")

    coords = lattice_positions(n_entities, grid_dim)
    names = [f"e{i:05d}" for i in range(n_entities)]
    pos = dict(zip(names, coords))
    pos_to_name = {c: n for n, c in pos.items()}

    rng = np.random.default_rng(seed)
    if offsets is not None:
        offsets = [tuple(o) for o in offsets]
        if len(offsets) != n_relations:
            raise ValueError("need one offset per relation")
        for off in offsets:
            if len(off) != grid_dim:
                raise ValueError(f"offset {off} is not {grid_dim}-dimensional")
            if not any(off):
                raise ValueError("the all-zero offset is rejected")
        offsets = dict(enumerate(offsets))
    else:
        candidates = [off for off in itertools.product((-1, 0, 1), repeat=grid_dim)
                      if any(off)]
        if n_relations > len(candidates):
            raise ValueError(f"at most {len(candidates)} distinct offsets in {grid_dim}-d")
        chosen = rng.permutation(len(candidates))[:n_relations]
        offsets = {j: candidates[c] for j, c in enumerate(sorted(chosen))}
    rel_names = [f"r{j:03d}" for j in range(n_relations)]

    named_triples = []
    for name, c in pos.items():
        for j, off in offsets.items():
            target = tuple(a + b for a, b in zip(c, off))
            if target in pos_to_name:
                named_triples.append((name, rel_names[j], pos_to_name[target]))
    if len(named_triples) < 10:
        raise ValueError(f"parameters yield only {len(named_triples)} triples (< 10)")

    vocab = Vocabulary(names, rel_names)
    tr, va, te = _split_triples(named_triples, seed)
    splits = {"train": _index_split(vocab, tr, "train"),
              "valid": _index_split(vocab, va, "valid"),
              "test": _index_split(vocab, te, "test")}
    planted = {vocab.relation_index[rel_names[j]]: off for j, off in offsets.items()}
    return vocab, splits, planted


def make_clustered(n_entities: int, n_clusters: int, seed: int,
                   train_fraction: float = 0.1):
    """Literal-informative KG for the joint-uplift check.

    Entities belong to clusters; (h, "next", t) holds iff cluster(t) =
    cluster(h) + 1 (mod n_clusters).  All triples of the graph are emitted
    across the splits, but the train split is kept sparse (train_fraction of
    the total), so structure alone underdetermines most entities.  Each
    entity carries a one-hot literal vector of its cluster id; the returned
    (n_entities, n_clusters) float array is that literal table.
    """
    if n_entities < 20:
        raise ValueError("n_entities must be >= 20")
    if n_clusters < 2 or n_entities % n_clusters != 0:
        raise ValueError("n_clusters must be >= 2 and divide n_entities")
    if not 0.0 < train_fraction < 0.8:
        raise ValueError("train_fraction must lie in (0, 0.8)")

    per = n_entities // n_clusters
    names = [f"e{i:05d}" for i in range(n_entities)]
    cluster = {names[i]: i // per for i in range(n_entities)}
    rel = "next"

    named_triples = [(h, rel, t) for h in names for t in names
                     if cluster[t] == (cluster[h] + 1) % n_clusters]

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(named_triples))
    shuffled = [named_triples[i] for i in order]
    n = len(shuffled)
    n_train = max(1, int(round(train_fraction * n)))
    n_valid = max(1, n // 10)
    tr = shuffled[:n_train]
    va = shuffled[n_train:n_train + n_valid]
    te = shuffled[n_train + n_valid:]

    vocab = Vocabulary(names, [rel])
    splits = {"train": _index_split(vocab, tr, "train"),
              "valid": _index_split(vocab, va, "valid"),
              "test": _index_split(vocab, te, "test")}
    literals = np.zeros((n_entities, n_clusters), dtype=np.float32)
    for name, c in cluster.items():
        literals[vocab.entity_index[name], c] = 1.0
    return vocab, splits, literals


def write_triple_file(path, vocab: Vocabulary, triples: TripleSet) -> None:
    """Write a split back to the tab-separated text format."""
    with open(path, "w", encoding="utf-8") as f:
        for t in triples:
            f.write(f"{vocab.entity_names[t.head]}\t"
                    f"{vocab.relation_names[t.relation]}\t"
                    f"{vocab.entity_names[t.tail]}\n")
