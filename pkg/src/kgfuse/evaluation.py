"""Link prediction: candidate ranking and raw/filtered Mean Rank, Hits@10.

For each test triple both the head and the tail are predicted: every
entity is substituted into the missing slot, candidates are scored with
the model's translation distance and ranked ascending (lowest score =
rank 1).  In the filtered setting, competitors that form a known true
triple (train + valid + test) are removed before ranking.  Ties place the
target at the mean rank of its tie group, rounded up.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .data import Triple, TripleSet

logger = logging.getLogger(__name__)

__all__ = ["EvalReport", "rank_query", "evaluate",
           "structural_scorer", "joint_scorer", "KnownTriples"]


class KnownTriples:
    """Membership index over the union of all dataset splits.

    Also keeps completion maps (relation, tail) -> heads and
    (head, relation) -> tails so filtered ranking touches only the known
    competitors instead of every entity.
    """

    def __init__(self, *triple_sets):
        self._members = set()
        self._heads = {}
        self._tails = {}
        for ts in triple_sets:
            for t in ts:
                key = t.as_tuple()
                if key in self._members:
                    continue
                self._members.add(key)
                self._heads.setdefault((t.relation, t.tail), []).append(t.head)
                self._tails.setdefault((t.head, t.relation), []).append(t.tail)

    def contains(self, head: int, relation: int, tail: int) -> bool:
        return (head, relation, tail) in self._members

    def known_completions(self, triple: Triple, side: str):
        """Entity indices that complete the query into a known triple."""
        if side == "head":
            return self._heads.get((triple.relation, triple.tail), [])
        return self._tails.get((triple.head, triple.relation), [])

    def __len__(self):
        return len(self._members)


def structural_scorer(model):
    """Scorer closure over a frozen structural model."""
    return model.score_candidates


def joint_scorer(model):
    """Scorer over a frozen joint model; GRU outputs are precomputed once."""
    heads, tails, rels = model.joint_tables()
    order = model.config.norm_order

    def score_candidates(triple: Triple, side: str) -> np.ndarray:
        if side == "head":
            d = heads + (rels[triple.relation] - tails[triple.tail])
        elif side == "tail":
            d = (heads[triple.head] + rels[triple.relation]) - tails
        else:
            raise ValueError(f"unknown side {side!r}")
        if order == 2:
            return np.einsum("ij,ij->i", d, d)
        return np.sum(np.abs(d), axis=1)

    return score_candidates


def _rank_from_scores(scores: np.ndarray, target: int, keep: np.ndarray) -> int:
    """1-based rank of ``target`` among candidates where ``keep`` is True."""
    s_t = scores[target]
    kept = scores[keep]
    better = int(np.count_nonzero(kept < s_t))
    ties = int(np.count_nonzero(kept == s_t))  # includes the target itself
    return better + math.ceil((ties + 1) / 2)


def rank_query(score_candidates, query: Triple, side: str,
               all_known: KnownTriples, filtered: bool,
               n_entities: int = None) -> int:
    """Rank the true entity among all candidate completions of one query."""
    scores = np.asarray(score_candidates(query, side), dtype=np.float64)
    target = query.head if side == "head" else query.tail
    if target >= len(scores):
        raise ValueError(f"target entity {target} outside candidate range")
    keep = np.ones(len(scores), dtype=bool)
    if filtered:
        for e in all_known.known_completions(query, side):
            if e != target:
                keep[e] = False
    return _rank_from_scores(scores, target, keep)


@dataclass
class EvalReport:
    queries: int
    head: dict
    tail: dict
    all: dict

    def to_dict(self):
        def rounded(d):
            return {k: round(float(v), 4) for k, v in d.items()}
        return {"queries": self.queries, "head": rounded(self.head),
                "tail": rounded(self.tail), "all": rounded(self.all)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _aggregate(raw_ranks, filtered_ranks):
    raw = np.asarray(raw_ranks, dtype=np.float64)
    filt = np.asarray(filtered_ranks, dtype=np.float64)
    return {"mr_raw": raw.mean(), "mr_filtered": filt.mean(),
            "hits10_raw": float(np.count_nonzero(raw <= 10)) / len(raw),
            "hits10_filtered": float(np.count_nonzero(filt <= 10)) / len(filt)}


def evaluate(score_candidates, test: TripleSet, all_known: KnownTriples,
             n_entities: int, per_query_path=None) -> EvalReport:
    """Run head and tail queries for every test triple, raw and filtered.

    Both settings are derived from a single scoring pass per query.  When
    ``per_query_path`` is given, one JSON line per query (triple, side,
    raw and filtered rank) is written as a sidecar.
    """
    if len(test) == 0:
        raise ValueError("empty test set")
    ranks = {"head": {"raw": [], "filtered": []},
             "tail": {"raw": [], "filtered": []}}
    sidecar = open(per_query_path, "w", encoding="utf-8") if per_query_path else None
    try:
        for triple in test:
            for side in ("head", "tail"):
                scores = np.asarray(score_candidates(triple, side), dtype=np.float64)
                target = triple.head if side == "head" else triple.tail
                raw_rank = _rank_from_scores(scores, target,
                                             np.ones(n_entities, dtype=bool))
                keep = np.ones(n_entities, dtype=bool)
                for e in all_known.known_completions(triple, side):
                    if e != target:
                        keep[e] = False
                filt_rank = _rank_from_scores(scores, target, keep)
                ranks[side]["raw"].append(raw_rank)
                ranks[side]["filtered"].append(filt_rank)
                if sidecar:
                    sidecar.write(json.dumps(
                        {"triple": triple.as_tuple(), "side": side,
                         "rank_raw": raw_rank, "rank_filtered": filt_rank}) + "\n")
    finally:
        if sidecar:
            sidecar.close()

    head = _aggregate(ranks["head"]["raw"], ranks["head"]["filtered"])
    tail = _aggregate(ranks["tail"]["raw"], ranks["tail"]["filtered"])
    overall = _aggregate(ranks["head"]["raw"] + ranks["tail"]["raw"],
                         ranks["head"]["filtered"] + ranks["tail"]["filtered"])
    return EvalReport(2 * len(test), head, tail, overall)
