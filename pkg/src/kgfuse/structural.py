"""Translation-based structural embedding training.

Score: f(h, r, t) = ||h + r - t||^2 (order 2) or the L1 norm (order 1);
lower means more plausible.  Training minimizes the margin ranking loss
over corrupted triples with mini-batch SGD, renormalizing entity rows to
unit L2 norm after every batch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .data import Triple, TripleSet, Vocabulary
from .errors import NumericError
from .numeric import SgdConfig, init_uniform, sgd_step

logger = logging.getLogger(__name__)

__all__ = ["StructuralModel", "score", "margin_term", "corrupt",
           "train_structural", "sample_corruptions"]


def score(h_vec, r_vec, t_vec, norm_order: int = 2) -> float:
    """Translation distance of one triple (squared L2 or L1)."""
    h_vec, r_vec, t_vec = np.asarray(h_vec), np.asarray(r_vec), np.asarray(t_vec)
    if not (h_vec.shape == r_vec.shape == t_vec.shape):
        raise ValueError("h, r, t must have equal dimensions")
    d = h_vec + r_vec - t_vec
    if norm_order == 2:
        return float(np.dot(d, d))
    if norm_order == 1:
        return float(np.sum(np.abs(d)))
    raise ValueError("norm_order must be 1 or 2")


def margin_term(pos_score: float, neg_score: float, margin: float) -> float:
    """Hinge term [margin + pos - neg]_+ of the ranking loss."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    return max(0.0, margin + pos_score - neg_score)


def corrupt(triple: Triple, vocab: Vocabulary, rng: np.random.Generator) -> Triple:
    """Replace head or tail (p=0.5 each) with a different random entity.

    The relation is never touched.  The result may still be a true triple
    of the graph; negatives are not filtered during training.
    """
    n = vocab.n_entities
    if n < 2:
        raise ValueError("corruption needs at least 2 entities")
    replace_head = rng.random() < 0.5
    original = triple.head if replace_head else triple.tail
    draw = int(rng.integers(n - 1))
    if draw >= original:
        draw += 1
    if replace_head:
        return Triple(draw, triple.relation, triple.tail)
    return Triple(triple.head, triple.relation, draw)


def sample_corruptions(batch: np.ndarray, n_entities: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Vectorized corruption of a (B, 3) triple batch, one negative each."""
    neg = batch.copy()
    b = len(batch)
    replace_head = rng.random(b) < 0.5
    slot = np.where(replace_head, 0, 2)
    original = neg[np.arange(b), slot]
    draw = rng.integers(0, n_entities - 1, size=b)
    draw = np.where(draw >= original, draw + 1, draw)
    neg[np.arange(b), slot] = draw
    return neg


@dataclass
class StructuralModel:
    entity_emb: np.ndarray     # (|E|, k)
    relation_emb: np.ndarray   # (|R|, k)
    config: SgdConfig
    loss_history: list = field(default_factory=list)

    @classmethod
    def initialize(cls, n_entities: int, n_relations: int, config: SgdConfig,
                   dtype=np.float32) -> "StructuralModel":
        model = cls(init_uniform(n_entities, config.dim, config.seed, dtype=dtype),
                    init_uniform(n_relations, config.dim, config.seed + 1, dtype=dtype),
                    config)
        model.renormalize_entities()
        return model

    def renormalize_entities(self) -> None:
        norms = np.linalg.norm(self.entity_emb, axis=1, keepdims=True)
        np.maximum(norms, 1e-12, out=norms)
        self.entity_emb /= norms

    def score_triple(self, triple: Triple) -> float:
        return score(self.entity_emb[triple.head],
                     self.relation_emb[triple.relation],
                     self.entity_emb[triple.tail],
                     self.config.norm_order)

    def score_candidates(self, triple: Triple, side: str) -> np.ndarray:
        """Scores of all candidate triples with ``side`` replaced by every entity."""
        r = self.relation_emb[triple.relation]
        if side == "head":
            d = self.entity_emb + (r - self.entity_emb[triple.tail])
        elif side == "tail":
            d = (self.entity_emb[triple.head] + r) - self.entity_emb
        else:
            raise ValueError(f"unknown side {side!r}")
        if self.config.norm_order == 2:
            return np.einsum("ij,ij->i", d, d)
        return np.sum(np.abs(d), axis=1)


def batch_loss(model: StructuralModel, pos: np.ndarray, neg: np.ndarray) -> float:
    """Margin ranking loss summed over a batch of (positive, negative) pairs."""
    d_pos = (model.entity_emb[pos[:, 0]] + model.relation_emb[pos[:, 1]]
             - model.entity_emb[pos[:, 2]])
    d_neg = (model.entity_emb[neg[:, 0]] + model.relation_emb[neg[:, 1]]
             - model.entity_emb[neg[:, 2]])
    if model.config.norm_order == 2:
        s_pos = np.einsum("ij,ij->i", d_pos, d_pos)
        s_neg = np.einsum("ij,ij->i", d_neg, d_neg)
    else:
        s_pos = np.sum(np.abs(d_pos), axis=1)
        s_neg = np.sum(np.abs(d_neg), axis=1)
    hinge = np.maximum(0.0, model.config.margin + s_pos - s_neg)
    return float(np.sum(hinge, dtype=np.float64))


def batch_grads(model: StructuralModel, pos: np.ndarray, neg: np.ndarray):
    """Analytic gradients of ``batch_loss`` w.r.t. both embedding tables.

    Returns (loss, grad_entities, grad_relations) with grads of full table
    shape (untouched rows stay zero).
    """
    E, R = model.entity_emb, model.relation_emb
    d_pos = E[pos[:, 0]] + R[pos[:, 1]] - E[pos[:, 2]]
    d_neg = E[neg[:, 0]] + R[neg[:, 1]] - E[neg[:, 2]]
    if model.config.norm_order == 2:
        s_pos = np.einsum("ij,ij->i", d_pos, d_pos)
        s_neg = np.einsum("ij,ij->i", d_neg, d_neg)
        g_pos = 2.0 * d_pos
        g_neg = 2.0 * d_neg
    else:
        s_pos = np.sum(np.abs(d_pos), axis=1)
        s_neg = np.sum(np.abs(d_neg), axis=1)
        g_pos = np.sign(d_pos)
        g_neg = np.sign(d_neg)
    active = (model.config.margin + s_pos - s_neg) > 0
    loss = float(np.sum(np.maximum(0.0, model.config.margin + s_pos - s_neg),
                        dtype=np.float64))
    g_pos = g_pos * active[:, None]
    g_neg = g_neg * active[:, None]

    grad_e = np.zeros_like(E)
    grad_r = np.zeros_like(R)
    np.add.at(grad_e, pos[:, 0], g_pos)
    np.add.at(grad_e, pos[:, 2], -g_pos)
    np.add.at(grad_r, pos[:, 1], g_pos)
    np.add.at(grad_e, neg[:, 0], -g_neg)
    np.add.at(grad_e, neg[:, 2], g_neg)
    np.add.at(grad_r, neg[:, 1], -g_neg)
    return loss, grad_e, grad_r


def train_structural(train: TripleSet, vocab: Vocabulary, config: SgdConfig,
                     valid: TripleSet = None, all_known=None,
                     eval_every: int = 25, patience: int = 50,
                     log_every: int = 100) -> StructuralModel:
    """Run the full structural training loop.

    If ``valid`` and ``all_known`` are given, filtered Mean Rank on the
    validation split is checked every ``eval_every`` epochs and training
    stops after ``patience`` consecutive evaluations without improvement.
    """
    if len(train) == 0:
        raise ValueError("empty train set")
    model = StructuralModel.initialize(vocab.n_entities, vocab.n_relations, config)
    rng = np.random.default_rng(config.seed)
    triples = train.as_array()
    n = len(triples)

    best_mr = np.inf
    stale = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            pos = triples[order[start:start + config.batch_size]]
            neg = sample_corruptions(pos, vocab.n_entities, rng)
            loss, grad_e, grad_r = batch_grads(model, pos, neg)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            sgd_step(model.entity_emb, grad_e, config.learning_rate)
            sgd_step(model.relation_emb, grad_r, config.learning_rate)
            model.renormalize_entities()
            epoch_loss += loss
        model.loss_history.append(epoch_loss)
        if epoch % log_every == 0 or epoch == 1:
            logger.info("epoch %d: loss %.4f", epoch, epoch_loss)

        if valid is not None and all_known is not None and epoch % eval_every == 0:
            from .evaluation import evaluate, structural_scorer
            report = evaluate(structural_scorer(model), valid, all_known,
                              vocab.n_entities)
            mr = report.all["mr_filtered"]
            if mr < best_mr - 1e-9:
                best_mr = mr
                stale = 0
            else:
                stale += 1
                if stale >= patience:
                    logger.info("early stop at epoch %d (valid MR %.2f)", epoch, best_mr)
                    break
    return model
