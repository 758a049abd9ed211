"""Base learners: UCB with confidence scaling and nested Linear Thompson Sampling.

Every learner keeps an internal clock that only advances when the meta-learner
routes an observation to it.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .env import ActionSet, cube_argmax, sphere_argmax
from .errors import ContractViolation, NumericError


def ucb_index(mean: float, n: int, c: float, delta: float) -> float:
    return mean + c * math.sqrt(math.log(n / delta) / n)


def ucb_select(counts: Sequence[int], sums: Sequence[float], c: float, delta: float) -> int:
    """Unplayed arms first (lowest index), then the highest UCB index.

    Ties go to the lowest index.  With ``c == 0`` this is plain greedy.
    """
    best = -math.inf
    arg = 0
    for a, n in enumerate(counts):
        if n == 0:
            return a
        value = sums[a] / n + c * math.sqrt(math.log(n / delta) / n)
        if value > best:
            best = value
            arg = a
    return arg


class UcbLearner:
    def __init__(self, num_arms: int, c: float, delta: float = 0.1):
        if num_arms < 1:
            raise ContractViolation("UCB needs at least one arm")
        if not 0.0 < delta < 1.0:
            raise ContractViolation(f"delta={delta} outside (0, 1)")
        self.c = float(c)
        self.delta = float(delta)
        self.counts = [0] * num_arms
        self.sums = [0.0] * num_arms
        self.clock = 0

    def act(self, context=None) -> int:
        return ucb_select(self.counts, self.sums, self.c, self.delta)

    def update(self, action: int, reward: float) -> None:
        self.counts[action] += 1
        self.sums[action] += reward
        self.clock += 1


def lints_posterior(state: "LinTsLearner"):
    """Ridge estimate ``A^{-1} b`` and the symmetric inverse square root of ``A``."""
    w, vecs = state.eigh()
    theta_hat = vecs @ ((vecs.T @ state.b) / w)
    root = (vecs / np.sqrt(w)) @ vecs.T
    return theta_hat, root


def lints_act(state: "LinTsLearner", context: Optional[np.ndarray], noise: np.ndarray) -> np.ndarray:
    """Pick an action from the perturbed model; pure in (state, context, noise).

    The sample model is ``theta_hat + c * sqrt(d_i) * A^{-1/2} noise``.  Only the
    first ``d_i`` coordinates of an action enter the score; the played action
    is the full ambient vector.  On the sphere and hypercube the maximizer of
    the zero-padded sample model is returned.
    """
    d = state.dim
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (d,):
        raise ContractViolation(f"noise has shape {noise.shape}, expected ({d},)")
    w, vecs = state.eigh()
    theta = vecs @ ((vecs.T @ state.b) / w)
    if state.c != 0.0:
        theta = theta + state.c * math.sqrt(d) * (vecs @ ((vecs.T @ noise) / np.sqrt(w)))

    if state.action_set is ActionSet.SAMPLED_CONTEXT:
        if context is None or context.ndim != 2 or context.shape[1] != state.ambient_dim:
            raise ContractViolation("sampled context missing or of the wrong dimension")
        scores = context[:, :d] @ theta
        return context[int(np.argmax(scores))]
    if d == state.ambient_dim:
        padded = theta
    else:
        padded = np.zeros(state.ambient_dim)
        padded[:d] = theta
    if state.action_set is ActionSet.UNIT_SPHERE:
        return sphere_argmax(padded)
    return cube_argmax(padded, state.cube_scale)


class LinTsLearner:
    """Linear Thompson Sampling on the first ``dim`` coordinates of the actions.

    Keeps ``A = X^T X + lam I`` and ``b = X^T y`` incrementally.
    """

    def __init__(
        self,
        ambient_dim: int,
        action_set: ActionSet,
        c: float,
        dim: Optional[int] = None,
        lam: float = 1.0,
        cube_scale: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        dim = ambient_dim if dim is None else int(dim)
        if not 1 <= dim <= ambient_dim:
            raise ContractViolation(f"operating dimension {dim} not in 1..{ambient_dim}")
        if lam <= 0:
            raise ContractViolation("ridge parameter must be > 0")
        self.ambient_dim = int(ambient_dim)
        self.dim = dim
        self.action_set = ActionSet(action_set)
        self.c = float(c)
        self.lam = float(lam)
        self.cube_scale = 1.0 / math.sqrt(ambient_dim) if cube_scale is None else float(cube_scale)
        self.A = lam * np.eye(dim)
        self.b = np.zeros(dim)
        self.clock = 0
        self.rng = rng if rng is not None else np.random.default_rng()
        self._eig = None

    def eigh(self):
        if self._eig is None:
            w, vecs = np.linalg.eigh(self.A)
            if w[0] <= 0.0:
                raise NumericError(f"Gram matrix is not positive definite (eigenvalue {w[0]:.3e})")
            self._eig = (w, vecs)
        return self._eig

    def posterior(self):
        return lints_posterior(self)

    def act(self, context: Optional[np.ndarray] = None) -> np.ndarray:
        return lints_act(self, context, self.rng.standard_normal(self.dim))

    def update(self, action, reward: float) -> None:
        x = np.asarray(action, dtype=float)[: self.dim]
        self.A += np.outer(x, x)
        self.b += reward * x
        self._eig = None
        self.clock += 1
