"""Gradient-check harnesses for every analytic backward pass.

All checks run in double precision on small random instances and report
the worst relative error between analytic gradients and central finite
differences.  Used by both the test suite and the ``gradcheck`` CLI
command.
"""

from __future__ import annotations

import numpy as np

from .joint import JointModel, gru_backward_batch, gru_forward_batch, \
    joint_batch_grads, joint_batch_loss, GruParams
from .literals import LiteralStore
from .numeric import SgdConfig, grad_check
from .structural import StructuralModel, batch_grads, batch_loss

__all__ = ["structural_gradcheck", "gru_gradcheck", "joint_gradcheck"]


def _toy_config(dim, seed, norm_order=2):
    return SgdConfig(learning_rate=0.01, batch_size=8, margin=1.0, dim=dim,
                     epochs=1, seed=seed, norm_order=norm_order)


def _random_pairs(rng, n_entities, n_relations, n_triples):
    pos = np.column_stack([rng.integers(0, n_entities, n_triples),
                           rng.integers(0, n_relations, n_triples),
                           rng.integers(0, n_entities, n_triples)])
    neg = pos.copy()
    slot = np.where(rng.random(n_triples) < 0.5, 0, 2)
    neg[np.arange(n_triples), slot] = rng.integers(0, n_entities, n_triples)
    return pos, neg


def structural_gradcheck(k: int = 3, n_entities: int = 8, n_relations: int = 2,
                         n_triples: int = 5, seed: int = 0,
                         norm_order: int = 2, epsilon: float = 1e-5) -> float:
    """Worst relative error of the margin-ranking-loss gradients."""
    rng = np.random.default_rng(seed)
    model = StructuralModel(rng.standard_normal((n_entities, k)),
                            rng.standard_normal((n_relations, k)),
                            _toy_config(k, seed, norm_order))
    pos, neg = _random_pairs(rng, n_entities, n_relations, n_triples)
    _, grad_e, grad_r = batch_grads(model, pos, neg)
    loss = lambda: batch_loss(model, pos, neg)
    return max(grad_check(loss, grad_e, model.entity_emb, epsilon),
               grad_check(loss, grad_r, model.relation_emb, epsilon))


def gru_gradcheck(k: int = 3, dim_j: int = 4, batch: int = 3, seed: int = 0,
                  epsilon: float = 1e-5) -> float:
    """Worst relative error of the GRU backward pass, all parameter groups."""
    rng = np.random.default_rng(seed)
    params = GruParams.initialize(k, dim_j, rng, dtype=np.float64)
    x = rng.standard_normal((batch, k))
    h0 = rng.standard_normal((batch, dim_j))
    w = rng.standard_normal((batch, dim_j))  # fixed projection makes a scalar loss

    def loss():
        out, _ = gru_forward_batch(params, x, h0)
        return float(np.sum(out * w))

    _, cache = gru_forward_batch(params, x, h0)
    grads, dx, dh0 = gru_backward_batch(params, cache, w)
    worst = max(grad_check(loss, dx, x, epsilon),
                grad_check(loss, dh0, h0, epsilon))
    for name, arr in grads.arrays():
        worst = max(worst, grad_check(loss, arr, getattr(params, name), epsilon))
    return worst


def joint_gradcheck(k: int = 3, dim_j: int = 4, n_entities: int = 6,
                    n_relations: int = 2, n_triples: int = 5, seed: int = 0,
                    with_projection: bool = False, lit_dim: int = None,
                    epsilon: float = 1e-5) -> float:
    """Worst relative error across every parameter group of the joint loss."""
    rng = np.random.default_rng(seed)
    config = _toy_config(k, seed)
    structural = StructuralModel(rng.standard_normal((n_entities, k)),
                                 rng.standard_normal((n_relations, k)), config)
    lit_dim = lit_dim if lit_dim is not None else (dim_j if not with_projection else dim_j + 2)
    store = LiteralStore(lit_dim,
                         rng.standard_normal((n_entities, lit_dim)),
                         rng.standard_normal((n_relations, lit_dim)),
                         coverage={})
    model = JointModel.initialize(structural, store, config,
                                  joint_dim=dim_j if with_projection else None)
    pos, neg = _random_pairs(rng, n_entities, n_relations, n_triples)
    neg[:, 1] = pos[:, 1]  # corruption never replaces the relation

    _, grads = joint_batch_grads(model, pos, neg)
    loss = lambda: joint_batch_loss(model, pos, neg)

    worst = 0.0
    checks = [(grads["entity_emb"], model.structural.entity_emb),
              (grads["relation_emb"], model.structural.relation_emb),
              (grads["lit_entity"], model.lit_entity),
              (grads["lit_relation"], model.lit_relation)]
    for key in ("gru_head", "gru_relation", "gru_tail"):
        gru = getattr(model, key)
        checks += [(getattr(grads[key], n), getattr(gru, n))
                   for n, _ in gru.arrays()]
    if model.projection is not None:
        checks += [(grads["proj_weight"], model.projection.weight),
                   (grads["proj_bias"], model.projection.bias)]
    for analytic, params in checks:
        worst = max(worst, grad_check(loss, analytic, params, epsilon))
    return worst
