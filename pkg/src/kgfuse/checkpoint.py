"""Versioned checkpoint files for structural and joint models.

A checkpoint is an .npz archive with a JSON metadata blob (format version,
config, vocabulary hashes) and the raw parameter arrays, stored exactly so
save -> load -> evaluate reproduces the in-memory results bit for bit.
The vocabulary name lists are embedded, making checkpoints self-contained
for evaluation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict

import numpy as np

from .data import Vocabulary
from .errors import DataError
from .joint import PARAM_NAMES, GruParams, JointModel
from .literals import LiteralProjection
from .numeric import SgdConfig
from .structural import StructuralModel

FORMAT = "kgfuse-checkpoint"
VERSION = 1

__all__ = ["save_structural", "load_structural", "save_joint", "load_joint",
           "checkpoint_kind", "vocab_hashes"]


def vocab_hashes(vocab: Vocabulary):
    def digest(names):
        h = hashlib.sha256()
        for n in names:
            h.update(n.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()
    return {"entities": digest(vocab.entity_names),
            "relations": digest(vocab.relation_names)}


def _meta(kind, config, vocab, extra=None):
    meta = {"format": FORMAT, "version": VERSION, "kind": kind,
            "config": asdict(config), "vocab_sha256": vocab_hashes(vocab)}
    if extra:
        meta.update(extra)
    return np.array(json.dumps(meta, sort_keys=True))


def _load_meta(data, path, expected_kind):
    if "meta" not in data:
        raise DataError(f"{path}: not a checkpoint (missing metadata)")
    meta = json.loads(str(data["meta"]))
    if meta.get("format") != FORMAT:
        raise DataError(f"{path}: bad magic {meta.get('format')!r}")
    if meta.get("version") != VERSION:
        raise DataError(f"{path}: unsupported version {meta.get('version')}")
    if expected_kind and meta["kind"] != expected_kind:
        raise DataError(f"{path}: expected {expected_kind} checkpoint, "
                        f"found {meta['kind']}")
    return meta


def _vocab_arrays(vocab):
    return {"entity_names": np.array(vocab.entity_names),
            "relation_names": np.array(vocab.relation_names)}


def _restore_vocab(data):
    return Vocabulary([str(n) for n in data["entity_names"]],
                      [str(n) for n in data["relation_names"]])


def checkpoint_kind(path) -> str:
    with np.load(path, allow_pickle=False) as data:
        return _load_meta(data, path, None)["kind"]


def save_structural(path, model: StructuralModel, vocab: Vocabulary) -> None:
    with open(path, "wb") as f:
        np.savez_compressed(f, meta=_meta("structural", model.config, vocab),
                            entity_emb=model.entity_emb,
                            relation_emb=model.relation_emb,
                            **_vocab_arrays(vocab))


def load_structural(path):
    with np.load(path, allow_pickle=False) as data:
        meta = _load_meta(data, path, "structural")
        vocab = _restore_vocab(data)
        model = StructuralModel(data["entity_emb"].copy(),
                                data["relation_emb"].copy(),
                                SgdConfig(**meta["config"]))
    return model, vocab


def save_joint(path, model: JointModel, vocab: Vocabulary) -> None:
    extra = {"has_projection": model.projection is not None,
             "freeze_structural": model.freeze_structural,
             "freeze_literals": model.freeze_literals}
    arrays = {"entity_emb": model.structural.entity_emb,
              "relation_emb": model.structural.relation_emb,
              "lit_entity": model.lit_entity,
              "lit_relation": model.lit_relation,
              **_vocab_arrays(vocab)}
    for key in ("gru_head", "gru_relation", "gru_tail"):
        for name, arr in getattr(model, key).arrays():
            arrays[f"{key}.{name}"] = arr
    if model.projection is not None:
        arrays["proj_weight"] = model.projection.weight
        arrays["proj_bias"] = model.projection.bias
        extra["proj_trainable"] = model.projection.trainable
    with open(path, "wb") as f:
        np.savez_compressed(f, meta=_meta("joint", model.config, vocab, extra),
                            **arrays)


def load_joint(path):
    with np.load(path, allow_pickle=False) as data:
        meta = _load_meta(data, path, "joint")
        vocab = _restore_vocab(data)
        config = SgdConfig(**meta["config"])
        structural = StructuralModel(data["entity_emb"].copy(),
                                     data["relation_emb"].copy(), config)
        grus = {}
        for key in ("gru_head", "gru_relation", "gru_tail"):
            grus[key] = GruParams(*(data[f"{key}.{n}"].copy() for n in PARAM_NAMES))
        projection = None
        if meta.get("has_projection"):
            projection = LiteralProjection(data["proj_weight"].copy(),
                                           data["proj_bias"].copy(),
                                           meta.get("proj_trainable", True))
        model = JointModel(structural, data["lit_entity"].copy(),
                           data["lit_relation"].copy(),
                           grus["gru_head"], grus["gru_relation"],
                           grus["gru_tail"], config, projection,
                           freeze_structural=meta.get("freeze_structural", False),
                           freeze_literals=meta.get("freeze_literals", False))
    return model, vocab
