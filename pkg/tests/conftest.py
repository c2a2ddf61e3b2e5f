import math

import numpy as np
import pytest

from kgfuse import SgdConfig, StructuralModel, Triple


@pytest.fixture
def toy_config():
    return SgdConfig(learning_rate=0.01, batch_size=4, margin=1.0, dim=3,
                     epochs=1, seed=0)


def random_structural(n_entities, n_relations, k, seed, norm_order=2):
    rng = np.random.default_rng(seed)
    cfg = SgdConfig(learning_rate=0.01, batch_size=4, margin=1.0, dim=k,
                    epochs=1, seed=seed, norm_order=norm_order)
    return StructuralModel(rng.standard_normal((n_entities, k)),
                           rng.standard_normal((n_relations, k)), cfg)


def oracle_rank(scores, target, removed):
    """Sort-based ranking oracle, independent of the production path.

    Sorts the kept candidates by score, locates the tie group containing
    the target, and places the target at the mean rank of the group,
    rounded up.
    """
    kept = [(float(scores[e]), e) for e in range(len(scores))
            if e == target or e not in removed]
    kept.sort(key=lambda p: p[0])
    target_score = float(scores[target])
    positions = [i for i, (s, _) in enumerate(kept) if s == target_score]
    first, size = positions[0], len(positions)
    mean = (first + 1 + first + size) / 2.0
    return math.ceil(mean)


def gru_forward_scalar_oracle(params, x, h0):
    """Direct per-coordinate evaluation of the gating equations."""
    d = len(params.b_sr)
    out = []
    for i in range(d):
        a_r = params.b_sr[i] + params.b_lr[i]
        a_z = params.b_sz[i] + params.b_lz[i]
        a_ns = params.b_sn[i]
        a_nl = params.b_ln[i]
        for j in range(len(x)):
            a_r += params.W_sr[i, j] * x[j]
            a_z += params.W_sz[i, j] * x[j]
            a_ns += params.W_sn[i, j] * x[j]
        for j in range(len(h0)):
            a_r += params.W_lr[i, j] * h0[j]
            a_z += params.W_lz[i, j] * h0[j]
            a_nl += params.W_ln[i, j] * h0[j]
        r = 1.0 / (1.0 + math.exp(-a_r))
        z = 1.0 / (1.0 + math.exp(-a_z))
        n = math.tanh(a_ns + r * a_nl)
        out.append((1.0 - z) * n + z * h0[i])
    return np.array(out)


def score_scalar_oracle(h, r, t, norm_order=2):
    total = 0.0
    for i in range(len(h)):
        d = h[i] + r[i] - t[i]
        total += d * d if norm_order == 2 else abs(d)
    return total
