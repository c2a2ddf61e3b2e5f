"""Gated fusion of structural and literal embeddings.

Three independent single-layer GRU cells (one each for heads, relations,
tails) take the structural vector as input and the literal vector as the
initial hidden state, and their single-step output is the joint vector:

    r   = sigmoid(W_sr x + b_sr + W_lr h0 + b_lr)
    z   = sigmoid(W_sz x + b_sz + W_lz h0 + b_lz)
    n   = tanh(W_sn x + b_sn + r * (W_ln h0 + b_ln))
    out = (1 - z) * n + z * h0

The joint score is the same translation distance as the structural phase,
applied to the three GRU outputs, and training minimizes the same margin
ranking loss over corrupted triples.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Triple, TripleSet
from .errors import NumericError
from .literals import LiteralProjection, LiteralStore
from .numeric import SgdConfig, sgd_step
from .structural import StructuralModel, sample_corruptions

logger = logging.getLogger(__name__)

__all__ = ["GruParams", "JointModel", "gru_forward", "gru_backward",
           "joint_score", "train_joint"]

WEIGHT_NAMES = ("W_sr", "W_sz", "W_sn", "W_lr", "W_lz", "W_ln")
BIAS_NAMES = ("b_sr", "b_sz", "b_sn", "b_lr", "b_lz", "b_ln")
PARAM_NAMES = WEIGHT_NAMES + BIAS_NAMES


@dataclass
class GruParams:
    """Weights and biases of one GRU cell used as a gated fusion unit."""

    W_sr: np.ndarray
    W_sz: np.ndarray
    W_sn: np.ndarray
    W_lr: np.ndarray
    W_lz: np.ndarray
    W_ln: np.ndarray
    b_sr: np.ndarray
    b_sz: np.ndarray
    b_sn: np.ndarray
    b_lr: np.ndarray
    b_lz: np.ndarray
    b_ln: np.ndarray

    @classmethod
    def initialize(cls, input_dim: int, hidden_dim: int,
                   rng: np.random.Generator, dtype=np.float32) -> "GruParams":
        bound = 1.0 / math.sqrt(hidden_dim)

        def u(*shape):
            return rng.uniform(-bound, bound, size=shape).astype(dtype)

        return cls(u(hidden_dim, input_dim), u(hidden_dim, input_dim),
                   u(hidden_dim, input_dim), u(hidden_dim, hidden_dim),
                   u(hidden_dim, hidden_dim), u(hidden_dim, hidden_dim),
                   u(hidden_dim), u(hidden_dim), u(hidden_dim),
                   u(hidden_dim), u(hidden_dim), u(hidden_dim))

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int, dtype=np.float32) -> "GruParams":
        z = np.zeros
        return cls(z((hidden_dim, input_dim), dtype), z((hidden_dim, input_dim), dtype),
                   z((hidden_dim, input_dim), dtype), z((hidden_dim, hidden_dim), dtype),
                   z((hidden_dim, hidden_dim), dtype), z((hidden_dim, hidden_dim), dtype),
                   z(hidden_dim, dtype), z(hidden_dim, dtype), z(hidden_dim, dtype),
                   z(hidden_dim, dtype), z(hidden_dim, dtype), z(hidden_dim, dtype))

    def zeros_like(self) -> "GruParams":
        return GruParams(*(np.zeros_like(getattr(self, n)) for n in PARAM_NAMES))

    def arrays(self):
        return [(n, getattr(self, n)) for n in PARAM_NAMES]

    @property
    def input_dim(self):
        return self.W_sr.shape[1]

    @property
    def hidden_dim(self):
        return self.W_sr.shape[0]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gru_forward_batch(params: GruParams, x: np.ndarray, h0: np.ndarray):
    """Batched single-step forward pass; returns (output, cache)."""
    if x.shape[1] != params.input_dim or h0.shape[1] != params.hidden_dim:
        raise ValueError("input shapes inconsistent with GRU parameters")
    r = _sigmoid(x @ params.W_sr.T + params.b_sr + h0 @ params.W_lr.T + params.b_lr)
    z = _sigmoid(x @ params.W_sz.T + params.b_sz + h0 @ params.W_lz.T + params.b_lz)
    m = h0 @ params.W_ln.T + params.b_ln
    n = np.tanh(x @ params.W_sn.T + params.b_sn + r * m)
    out = (1.0 - z) * n + z * h0
    cache = {"x": x, "h0": h0, "r": r, "z": z, "n": n, "m": m}
    return out, cache


def gru_backward_batch(params: GruParams, cache: dict, upstream: np.ndarray):
    """Gradients of the batched forward pass.

    Returns (param_grads, dx, dh0) where param_grads is a GruParams of the
    same shapes.
    """
    if cache is None:
        raise ValueError("forward cache required for backward pass")
    x, h0 = cache["x"], cache["h0"]
    r, z, n, m = cache["r"], cache["z"], cache["n"], cache["m"]
    g = upstream

    dn = g * (1.0 - z)
    dz = g * (h0 - n)
    dh0 = g * z

    da_n = dn * (1.0 - n * n)
    dr = da_n * m
    dm = da_n * r
    dh0 = dh0 + dm @ params.W_ln

    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)

    dx = da_n @ params.W_sn + da_z @ params.W_sz + da_r @ params.W_sr
    dh0 = dh0 + da_z @ params.W_lz + da_r @ params.W_lr

    grads = GruParams(
        W_sr=da_r.T @ x, W_sz=da_z.T @ x, W_sn=da_n.T @ x,
        W_lr=da_r.T @ h0, W_lz=da_z.T @ h0, W_ln=dm.T @ h0,
        b_sr=da_r.sum(axis=0), b_sz=da_z.sum(axis=0), b_sn=da_n.sum(axis=0),
        b_lr=da_r.sum(axis=0), b_lz=da_z.sum(axis=0), b_ln=dm.sum(axis=0))
    return grads, dx, dh0


def gru_forward(params: GruParams, x: np.ndarray, h0: np.ndarray) -> np.ndarray:
    """Single-vector forward pass (convenience wrapper)."""
    out, _ = gru_forward_batch(params, np.atleast_2d(x), np.atleast_2d(h0))
    return out[0]


def gru_backward(params: GruParams, cache: dict, upstream: np.ndarray):
    """Single-vector backward pass; upstream has the output's shape."""
    grads, dx, dh0 = gru_backward_batch(params, cache, np.atleast_2d(upstream))
    return grads, dx[0], dh0[0]


@dataclass
class JointModel:
    structural: StructuralModel
    lit_entity: np.ndarray     # (|E|, L) working copies, trainable by default
    lit_relation: np.ndarray   # (|R|, L)
    gru_head: GruParams
    gru_relation: GruParams
    gru_tail: GruParams
    config: SgdConfig
    projection: LiteralProjection = None
    freeze_structural: bool = False
    freeze_literals: bool = False
    loss_history: list = field(default_factory=list)

    @classmethod
    def initialize(cls, structural: StructuralModel, literals: LiteralStore,
                   config: SgdConfig, joint_dim: int = None,
                   freeze_structural: bool = False,
                   freeze_literals: bool = False) -> "JointModel":
        """Build a joint model around a (pre-trained) structural model.

        The joint dimension defaults to the native literal dimension; a
        trainable affine projection is inserted only when a smaller
        ``joint_dim`` is requested.
        """
        dtype = structural.entity_emb.dtype
        rng = np.random.default_rng(config.seed + 7)
        dim_j = joint_dim if joint_dim is not None else literals.dim
        projection = None
        if dim_j != literals.dim:
            bound = 1.0 / math.sqrt(literals.dim)
            projection = LiteralProjection(
                rng.uniform(-bound, bound, size=(dim_j, literals.dim)).astype(dtype),
                np.zeros(dim_j, dtype=dtype))
        k = structural.entity_emb.shape[1]
        return cls(structural,
                   literals.entity_vectors.astype(dtype).copy(),
                   literals.relation_vectors.astype(dtype).copy(),
                   GruParams.initialize(k, dim_j, rng, dtype),
                   GruParams.initialize(k, dim_j, rng, dtype),
                   GruParams.initialize(k, dim_j, rng, dtype),
                   config, projection,
                   freeze_structural=freeze_structural,
                   freeze_literals=freeze_literals)

    @property
    def joint_dim(self):
        return self.gru_head.hidden_dim

    def _hidden(self, table: np.ndarray, idx: np.ndarray) -> np.ndarray:
        lit = table[idx]
        if self.projection is not None:
            return lit @ self.projection.weight.T + self.projection.bias
        return lit

    def forward_entities(self, idx: np.ndarray, gru: GruParams):
        x = self.structural.entity_emb[idx]
        h0 = self._hidden(self.lit_entity, idx)
        return gru_forward_batch(gru, x, h0)

    def forward_relations(self, idx: np.ndarray):
        x = self.structural.relation_emb[idx]
        h0 = self._hidden(self.lit_relation, idx)
        return gru_forward_batch(self.gru_relation, x, h0)

    def joint_tables(self):
        """GRU outputs for every entity (head and tail roles) and relation."""
        e_idx = np.arange(self.structural.entity_emb.shape[0])
        r_idx = np.arange(self.structural.relation_emb.shape[0])
        heads, _ = self.forward_entities(e_idx, self.gru_head)
        tails, _ = self.forward_entities(e_idx, self.gru_tail)
        rels, _ = self.forward_relations(r_idx)
        return heads, tails, rels


def joint_score(model: JointModel, triple: Triple) -> float:
    """Translation distance of the three GRU outputs for one triple."""
    idx = np.array([triple.head]), np.array([triple.tail])
    h_j, _ = model.forward_entities(idx[0], model.gru_head)
    t_j, _ = model.forward_entities(idx[1], model.gru_tail)
    r_j, _ = model.forward_relations(np.array([triple.relation]))
    d = h_j[0] + r_j[0] - t_j[0]
    if model.config.norm_order == 2:
        return float(np.dot(d, d))
    return float(np.sum(np.abs(d)))


def _pair_scores(d_pos, d_neg, norm_order):
    if norm_order == 2:
        s_pos = np.einsum("ij,ij->i", d_pos, d_pos)
        s_neg = np.einsum("ij,ij->i", d_neg, d_neg)
        g_pos, g_neg = 2.0 * d_pos, 2.0 * d_neg
    else:
        s_pos = np.sum(np.abs(d_pos), axis=1)
        s_neg = np.sum(np.abs(d_neg), axis=1)
        g_pos, g_neg = np.sign(d_pos), np.sign(d_neg)
    return s_pos, s_neg, g_pos, g_neg


def joint_batch_loss(model: JointModel, pos: np.ndarray, neg: np.ndarray) -> float:
    """Margin ranking loss of the joint score, summed over a batch."""
    h_p, _ = model.forward_entities(pos[:, 0], model.gru_head)
    t_p, _ = model.forward_entities(pos[:, 2], model.gru_tail)
    h_n, _ = model.forward_entities(neg[:, 0], model.gru_head)
    t_n, _ = model.forward_entities(neg[:, 2], model.gru_tail)
    r_j, _ = model.forward_relations(pos[:, 1])
    s_pos, s_neg, _, _ = _pair_scores(h_p + r_j - t_p, h_n + r_j - t_n,
                                      model.config.norm_order)
    hinge = np.maximum(0.0, model.config.margin + s_pos - s_neg)
    return float(np.sum(hinge, dtype=np.float64))


def joint_batch_grads(model: JointModel, pos: np.ndarray, neg: np.ndarray):
    """Loss and analytic gradients for every trainable parameter group.

    Corruption never replaces the relation, so ``neg[:, 1]`` must equal
    ``pos[:, 1]``; the relation GRU runs once per pair.
    """
    h_p, c_hp = model.forward_entities(pos[:, 0], model.gru_head)
    t_p, c_tp = model.forward_entities(pos[:, 2], model.gru_tail)
    h_n, c_hn = model.forward_entities(neg[:, 0], model.gru_head)
    t_n, c_tn = model.forward_entities(neg[:, 2], model.gru_tail)
    r_j, c_r = model.forward_relations(pos[:, 1])

    s_pos, s_neg, g_pos, g_neg = _pair_scores(h_p + r_j - t_p, h_n + r_j - t_n,
                                              model.config.norm_order)
    active = (model.config.margin + s_pos - s_neg) > 0
    loss = float(np.sum(np.maximum(0.0, model.config.margin + s_pos - s_neg),
                        dtype=np.float64))
    act = active[:, None]
    g_pos = g_pos * act
    g_neg = g_neg * act

    grads = {
        "entity_emb": np.zeros_like(model.structural.entity_emb),
        "relation_emb": np.zeros_like(model.structural.relation_emb),
        "lit_entity": np.zeros_like(model.lit_entity),
        "lit_relation": np.zeros_like(model.lit_relation),
        "gru_head": model.gru_head.zeros_like(),
        "gru_relation": model.gru_relation.zeros_like(),
        "gru_tail": model.gru_tail.zeros_like(),
    }
    if model.projection is not None:
        grads["proj_weight"] = np.zeros_like(model.projection.weight)
        grads["proj_bias"] = np.zeros_like(model.projection.bias)

    def backprop(gru_key, cache, upstream, idx, kind):
        g, dx, dh0 = gru_backward_batch(getattr(model, gru_key), cache, upstream)
        acc = grads[gru_key]
        for name, arr in g.arrays():
            getattr(acc, name).__iadd__(arr)
        if kind == "entity":
            np.add.at(grads["entity_emb"], idx, dx)
            lit_key = "lit_entity"
        else:
            np.add.at(grads["relation_emb"], idx, dx)
            lit_key = "lit_relation"
        if model.projection is not None:
            lit = (model.lit_entity if kind == "entity" else model.lit_relation)[idx]
            grads["proj_weight"] += dh0.T @ lit
            grads["proj_bias"] += dh0.sum(axis=0)
            np.add.at(grads[lit_key], idx, dh0 @ model.projection.weight)
        else:
            np.add.at(grads[lit_key], idx, dh0)

    backprop("gru_head", c_hp, g_pos, pos[:, 0], "entity")
    backprop("gru_tail", c_tp, -g_pos, pos[:, 2], "entity")
    backprop("gru_head", c_hn, -g_neg, neg[:, 0], "entity")
    backprop("gru_tail", c_tn, g_neg, neg[:, 2], "entity")
    backprop("gru_relation", c_r, g_pos - g_neg, pos[:, 1], "relation")
    return loss, grads


def train_joint(model: JointModel, train: TripleSet, config: SgdConfig = None,
                log_every: int = 100) -> JointModel:
    """Mini-batch SGD over GRU parameters, structural and literal embeddings."""
    if config is None:
        config = model.config
    if len(train) == 0:
        raise ValueError("empty train set")
    n_entities = model.structural.entity_emb.shape[0]
    rng = np.random.default_rng(config.seed + 13)
    triples = train.as_array()
    n = len(triples)
    lr = config.learning_rate

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            pos = triples[order[start:start + config.batch_size]]
            neg = sample_corruptions(pos, n_entities, rng)
            loss, grads = joint_batch_grads(model, pos, neg)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite joint loss at epoch {epoch}")
            for key in ("gru_head", "gru_relation", "gru_tail"):
                for name, arr in grads[key].arrays():
                    sgd_step(getattr(getattr(model, key), name), arr, lr)
            if not model.freeze_structural:
                sgd_step(model.structural.entity_emb, grads["entity_emb"], lr)
                sgd_step(model.structural.relation_emb, grads["relation_emb"], lr)
                model.structural.renormalize_entities()
            if not model.freeze_literals:
                sgd_step(model.lit_entity, grads["lit_entity"], lr)
                sgd_step(model.lit_relation, grads["lit_relation"], lr)
            if model.projection is not None and model.projection.trainable:
                sgd_step(model.projection.weight, grads["proj_weight"], lr)
                sgd_step(model.projection.bias, grads["proj_bias"], lr)
            epoch_loss += loss
        model.loss_history.append(epoch_loss)
        if epoch % log_every == 0 or epoch == 1:
            logger.info("joint epoch %d: loss %.4f", epoch, epoch_loss)
    return model
