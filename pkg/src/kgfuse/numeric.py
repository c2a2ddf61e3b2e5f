"""Dense numeric primitives: initialization, SGD updates, gradient checking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError

__all__ = ["SgdConfig", "init_uniform", "sgd_step", "grad_check"]


@dataclass
class SgdConfig:
    """Hyperparameters of the mini-batch SGD training loops.

    Defaults follow the reproduction recipe: lr 0.0005, batch 256,
    margin 1.0, dimension 50.
    """

    learning_rate: float = 0.0005
    batch_size: int = 256
    margin: float = 1.0
    dim: int = 50
    epochs: int = 1000
    seed: int = 0
    norm_order: int = 2

    def __post_init__(self):
        # 0 is allowed so a no-op optimizer pass stays expressible
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if self.norm_order not in (1, 2):
            raise ValueError("norm_order must be 1 or 2")


def init_uniform(rows: int, dim: int, seed: int, dtype=np.float32) -> np.ndarray:
    """Sample a (rows, dim) matrix i.i.d. uniform on [-6/sqrt(dim), +6/sqrt(dim)]."""
    if rows <= 0 or dim <= 0:
        raise ValueError("rows and dim must be positive")
    bound = 6.0 / math.sqrt(dim)
    rng = np.random.default_rng(seed)
    return rng.uniform(-bound, bound, size=(rows, dim)).astype(dtype)


def sgd_step(params: np.ndarray, grads: np.ndarray, lr: float) -> np.ndarray:
    """In-place params <- params - lr * grads."""
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: {params.shape} vs {grads.shape}")
    params -= np.asarray(lr * grads, dtype=params.dtype)
    return params


def grad_check(loss_fn, analytic_grad: np.ndarray, params: np.ndarray,
               epsilon: float = 1e-5) -> float:
    """Compare an analytic gradient against central finite differences.

    ``loss_fn`` must be a pure scalar function of ``params`` (evaluated with
    the array temporarily perturbed in place).  Returns the max over
    coordinates of ``|a - n| / max(1, |a| + |n|)`` in double precision.
    """
    if not (1e-7 <= epsilon <= 1e-3):
        raise ValueError("epsilon must lie in [1e-7, 1e-3]")
    if analytic_grad.shape != params.shape:
        raise ValueError("analytic gradient shape must match params")
    worst = 0.0
    it = np.nditer(params, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = params[idx]
        params[idx] = orig + epsilon
        up = float(loss_fn())
        params[idx] = orig - epsilon
        down = float(loss_fn())
        params[idx] = orig
        if not (math.isfinite(up) and math.isfinite(down)):
            raise NumericError("non-finite loss during gradient check")
        numeric = (up - down) / (2.0 * epsilon)
        analytic = float(analytic_grad[idx])
        err = abs(analytic - numeric) / max(1.0, abs(analytic) + abs(numeric))
        worst = max(worst, err)
        it.iternext()
    return worst
