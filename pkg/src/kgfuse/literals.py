"""Literal embedding storage: binary/TSV loading, missing-value policies,
and the optional affine projection to a smaller working dimension."""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from .data import Vocabulary
from .errors import DataError

logger = logging.getLogger(__name__)

MAGIC = b"LEB1"
VERSION = 1

KIND_ENTITY = 0
KIND_RELATION = 1

__all__ = ["LiteralStore", "LiteralProjection", "load_literal_file",
           "write_literal_file", "read_literal_records", "project",
           "store_from_arrays"]


@dataclass
class LiteralStore:
    dim: int
    entity_vectors: np.ndarray    # (|E|, dim)
    relation_vectors: np.ndarray  # (|R|, dim)
    coverage: dict                # found/missing counts per kind + ignored names


@dataclass
class LiteralProjection:
    weight: np.ndarray  # (dim_out, dim_in)
    bias: np.ndarray    # (dim_out,)
    trainable: bool = True

    @property
    def dim_in(self):
        return self.weight.shape[1]

    @property
    def dim_out(self):
        return self.weight.shape[0]


def read_literal_records(path):
    """Parse a literal embedding file into [(kind, name, vector), ...].

    Accepts the canonical binary format (magic ``LEB1``) and the TSV debug
    format ``E|R <TAB> name <TAB> space-separated floats``.
    """
    with open(path, "rb") as f:
        head = f.read(4)
        if head == MAGIC:
            return _read_binary(f, path)
    return _read_tsv(path)


def _read_binary(f, path):
    header = f.read(16)
    if len(header) != 16:
        raise DataError(f"{path}: truncated header")
    version, dim, count = struct.unpack("<IIQ", header)
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    records = []
    for i in range(count):
        meta = f.read(5)
        if len(meta) != 5:
            raise DataError(f"{path}: truncated record {i}")
        kind, name_len = struct.unpack("<BI", meta)
        if kind not in (KIND_ENTITY, KIND_RELATION):
            raise DataError(f"{path}: record {i}: bad kind {kind}")
        name = f.read(name_len).decode("utf-8")
        vec = np.frombuffer(f.read(4 * dim), dtype="<f4")
        if vec.size != dim:
            raise DataError(f"{path}: record {i}: truncated vector")
        records.append((kind, name, vec.astype(np.float32)))
    return records


def _read_tsv(path):
    records = []
    dim = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            kind_s, name, values = parts
            if kind_s not in ("E", "R"):
                raise DataError(f"{path}:{lineno}: kind must be E or R")
            vec = np.array([float(v) for v in values.split()], dtype=np.float32)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise DataError(f"{path}:{lineno}: dimension {vec.size} != {dim}")
            kind = KIND_ENTITY if kind_s == "E" else KIND_RELATION
            records.append((kind, name.replace("\\t", "\t"), vec))
    if not records:
        raise DataError(f"{path}: no literal records")
    return records


def load_literal_file(path, vocab: Vocabulary,
                      missing_policy: str = "zeros") -> LiteralStore:
    """Bind literal vectors to vocabulary indices.

    Names in the file that the vocabulary does not know are ignored (and
    counted); vocabulary names absent from the file are filled per
    ``missing_policy``: "zeros" or "mean" (mean of present vectors of the
    same kind).
    """
    if missing_policy not in ("zeros", "mean"):
        raise ValueError(f"unknown missing_policy {missing_policy!r}")
    records = read_literal_records(path)
    dims = {v.size for _, _, v in records}
    if len(dims) != 1:
        raise DataError(f"{path}: inconsistent dimensions {sorted(dims)}")
    dim = dims.pop()

    entity = np.zeros((vocab.n_entities, dim), dtype=np.float32)
    relation = np.zeros((vocab.n_relations, dim), dtype=np.float32)
    seen_e, seen_r = set(), set()
    ignored = 0
    for kind, name, vec in records:
        index = (vocab.entity_index if kind == KIND_ENTITY
                 else vocab.relation_index).get(name)
        if index is None:
            ignored += 1
            continue
        if kind == KIND_ENTITY:
            entity[index] = vec
            seen_e.add(index)
        else:
            relation[index] = vec
            seen_r.add(index)

    missing_e = vocab.n_entities - len(seen_e)
    missing_r = vocab.n_relations - len(seen_r)
    if missing_policy == "mean":
        if seen_e and missing_e:
            fill = entity[sorted(seen_e)].mean(axis=0)
            for i in range(vocab.n_entities):
                if i not in seen_e:
                    entity[i] = fill
        if seen_r and missing_r:
            fill = relation[sorted(seen_r)].mean(axis=0)
            for i in range(vocab.n_relations):
                if i not in seen_r:
                    relation[i] = fill

    coverage = {"found_entities": len(seen_e), "missing_entities": missing_e,
                "found_relations": len(seen_r), "missing_relations": missing_r,
                "ignored_names": ignored}
    if missing_e or missing_r or ignored:
        logger.info("literal coverage: %s", coverage)
    return LiteralStore(dim, entity, relation, coverage)


def store_from_arrays(entity_vectors: np.ndarray,
                      relation_vectors: np.ndarray) -> LiteralStore:
    """Wrap already-indexed literal matrices (e.g. from a synthetic generator)."""
    if entity_vectors.shape[1] != relation_vectors.shape[1]:
        raise ValueError("entity/relation literal dims differ")
    coverage = {"found_entities": len(entity_vectors), "missing_entities": 0,
                "found_relations": len(relation_vectors), "missing_relations": 0,
                "ignored_names": 0}
    return LiteralStore(entity_vectors.shape[1],
                        np.asarray(entity_vectors, dtype=np.float32),
                        np.asarray(relation_vectors, dtype=np.float32), coverage)


def write_literal_file(path, store: LiteralStore, vocab: Vocabulary) -> None:
    """Write the canonical binary format, records in vocabulary order."""
    n = vocab.n_entities + vocab.n_relations
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIQ", VERSION, store.dim, n))
        for kind, names, table in ((KIND_ENTITY, vocab.entity_names, store.entity_vectors),
                                   (KIND_RELATION, vocab.relation_names, store.relation_vectors)):
            for i, name in enumerate(names):
                raw = name.encode("utf-8")
                f.write(struct.pack("<BI", kind, len(raw)))
                f.write(raw)
                f.write(np.asarray(table[i], dtype="<f4").tobytes())


def project(store: LiteralStore, projection: LiteralProjection):
    """Row-wise affine map of both literal tables to projection.dim_out."""
    if projection.dim_in != store.dim:
        raise ValueError(f"projection expects dim {projection.dim_in}, "
                         f"store has {store.dim}")
    ent = store.entity_vectors @ projection.weight.T + projection.bias
    rel = store.relation_vectors @ projection.weight.T + projection.bias
    return ent, rel
