"""Stochastic bandit environments that double as exact pseudo-regret oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, ContractViolation

_BLOCK = 4096


class EnvKind(str, Enum):
    GAUSSIAN_MAB = "GaussianMAB"
    BERNOULLI_MAB = "BernoulliMAB"
    LINEAR = "LinearBandit"
    CONTEXTUAL = "ContextualLinearBandit"


class ActionSet(str, Enum):
    UNIT_SPHERE = "UnitSphere"
    HYPERCUBE = "Hypercube"
    SAMPLED_CONTEXT = "SampledContext"


@dataclass(frozen=True)
class EnvironmentSpec:
    """Declarative description of a reward-generating process.

    ``reward_std`` is the Gaussian noise level for both the Gaussian MAB and
    the linear environments.  Bernoulli rewards are ``reward_scale * b`` with
    ``b ~ Bernoulli(mean)``.  ``hypercube_scale`` defaults to ``1/sqrt(d)``.
    """

    kind: EnvKind
    means: tuple = ()
    reward_std: float = 1.0
    reward_scale: float = 1.0
    theta_star: tuple = ()
    action_set: Optional[ActionSet] = None
    hypercube_scale: Optional[float] = None
    context_size: int = 10

    def __post_init__(self):
        object.__setattr__(self, "kind", EnvKind(self.kind))
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "theta_star", tuple(float(w) for w in self.theta_star))
        if self.action_set is not None:
            object.__setattr__(self, "action_set", ActionSet(self.action_set))
        elif self.kind is EnvKind.CONTEXTUAL:
            object.__setattr__(self, "action_set", ActionSet.SAMPLED_CONTEXT)

    @property
    def is_mab(self) -> bool:
        return self.kind in (EnvKind.GAUSSIAN_MAB, EnvKind.BERNOULLI_MAB)

    @property
    def dim(self) -> int:
        return len(self.theta_star)

    @property
    def num_arms(self) -> int:
        return len(self.means)

    @property
    def cube_scale(self) -> float:
        if self.hypercube_scale is not None:
            return float(self.hypercube_scale)
        return 1.0 / math.sqrt(self.dim)

    def validate(self) -> None:
        if not math.isfinite(self.reward_std) or self.reward_std < 0:
            raise ConfigurationError("must be finite and >= 0", "environment.reward_std")
        if self.is_mab:
            if not self.means:
                raise ConfigurationError("arm set is empty", "environment.means")
            if not all(math.isfinite(m) for m in self.means):
                raise ConfigurationError("non-finite mean", "environment.means")
            if self.kind is EnvKind.BERNOULLI_MAB:
                if not all(0.0 <= m <= 1.0 for m in self.means):
                    raise ConfigurationError("Bernoulli means must lie in [0, 1]", "environment.means")
                if not math.isfinite(self.reward_scale):
                    raise ConfigurationError("must be finite", "environment.reward_scale")
            return
        if self.dim < 1:
            raise ConfigurationError("dimension must be >= 1", "environment.theta_star")
        if not all(math.isfinite(w) for w in self.theta_star):
            raise ConfigurationError("non-finite entry", "environment.theta_star")
        if self.kind is EnvKind.LINEAR:
            if self.action_set not in (ActionSet.UNIT_SPHERE, ActionSet.HYPERCUBE):
                raise ConfigurationError(
                    "linear bandits need UnitSphere or Hypercube", "environment.action_set"
                )
            if self.action_set is ActionSet.HYPERCUBE and not self.cube_scale > 0:
                raise ConfigurationError("must be > 0", "environment.hypercube_scale")
        else:
            if self.action_set is not ActionSet.SAMPLED_CONTEXT:
                raise ConfigurationError(
                    "contextual bandits use SampledContext", "environment.action_set"
                )
            if self.context_size < 1:
                raise ConfigurationError("must be >= 1", "environment.context_size")


class RoundOutcome(NamedTuple):
    reward: float
    inst_regret: float
    # expected reward of the played action given the round's action set
    mean_reward: float
    context: Optional[np.ndarray] = None


def sphere_argmax(theta: np.ndarray) -> np.ndarray:
    """Maximizer of <a, theta> over the unit sphere; theta = 0 maps to e_1."""
    norm = float(np.linalg.norm(theta))
    if norm == 0.0:
        out = np.zeros_like(theta, dtype=float)
        out[0] = 1.0
        return out
    return theta / norm


def cube_argmax(theta: np.ndarray, scale: float) -> np.ndarray:
    """Maximizer of <a, theta> over {-scale, +scale}^d; sign(0) counts as +."""
    return np.where(theta >= 0.0, scale, -scale)


def uniform_sphere(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    vecs = rng.standard_normal((count, dim))
    norms = np.linalg.norm(vecs, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        vecs[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(vecs, axis=1)
    return vecs / norms[:, None]


@dataclass
class Environment:
    """Mutable per-repetition environment with a private random stream."""

    spec: EnvironmentSpec
    rng: np.random.Generator
    context: Optional[np.ndarray] = None
    _buf: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    _pos: int = 0

    def __post_init__(self):
        spec = self.spec
        if spec.is_mab:
            self._means = list(spec.means)
            self.v_star = max(self._means)
        else:
            self.theta = np.asarray(spec.theta_star, dtype=float)
            if spec.action_set is ActionSet.UNIT_SPHERE:
                self.v_star = float(np.linalg.norm(self.theta))
            elif spec.action_set is ActionSet.HYPERCUBE:
                self.v_star = spec.cube_scale * float(np.abs(self.theta).sum())
            else:
                # depends on the sampled context
                self.v_star = None

    # -- random stream -------------------------------------------------
    def _draw(self) -> float:
        if self._pos >= len(self._buf):
            if self.spec.kind is EnvKind.BERNOULLI_MAB:
                self._buf = self.rng.random(_BLOCK)
            else:
                self._buf = self.rng.standard_normal(_BLOCK)
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return float(x)

    # -- protocol ----------------------------------------------------------
    @property
    def kind(self) -> EnvKind:
        return self.spec.kind

    def sample_context(self) -> np.ndarray:
        if self.spec.kind is not EnvKind.CONTEXTUAL:
            raise ContractViolation("sample_context called on a non-contextual environment")
        self.context = uniform_sphere(self.rng, self.spec.context_size, self.spec.dim)
        return self.context

    def mean_of(self, action) -> float:
        if self.spec.is_mab:
            return self._means[action]
        return float(np.dot(action, self.theta))

    def step(self, action) -> RoundOutcome:
        spec = self.spec
        if spec.is_mab:
            if not isinstance(action, (int, np.integer)) or not 0 <= action < len(self._means):
                raise ContractViolation(f"arm {action!r} outside 0..{len(self._means) - 1}")
            mean = self._means[action]
            if spec.kind is EnvKind.GAUSSIAN_MAB:
                reward = mean + spec.reward_std * self._draw()
            else:
                reward = spec.reward_scale * (1.0 if self._draw() < mean else 0.0)
            regret = self.v_star - mean
            return RoundOutcome(reward, regret if regret > 0.0 else 0.0, mean)

        a = np.asarray(action, dtype=float)
        if a.shape != (spec.dim,):
            raise ContractViolation(f"action has shape {a.shape}, expected ({spec.dim},)")
        ctx = None
        if spec.kind is EnvKind.CONTEXTUAL:
            ctx = self.context
            if ctx is None:
                raise ContractViolation("no context sampled for this round")
            if float(np.min(np.abs(ctx - a).max(axis=1))) > 1e-12:
                raise ContractViolation("action is not in the sampled context")
            scores = ctx @ self.theta
            best = float(scores.max())
            self.context = None
        elif spec.action_set is ActionSet.UNIT_SPHERE:
            if abs(float(np.linalg.norm(a)) - 1.0) > 1e-9:
                raise ContractViolation("action is not on the unit sphere")
            best = self.v_star
        else:
            if np.any(np.abs(np.abs(a) - spec.cube_scale) > 1e-12):
                raise ContractViolation("action is not a hypercube vertex")
            best = self.v_star
        mean = float(a @ self.theta)
        reward = mean + spec.reward_std * self._draw()
        regret = best - mean
        return RoundOutcome(reward, regret if regret > 0.0 else 0.0, mean, ctx)


def instantiate_env(spec: EnvironmentSpec, seed) -> Environment:
    """Validate ``spec`` and build an environment seeded by ``seed``.

    ``seed`` is anything ``np.random.default_rng`` accepts (int, SeedSequence).
    """
    spec.validate()
    return Environment(spec, np.random.default_rng(seed))
