"""Baseline meta-learners: Corral, EXP3, Greedy, UCB, RB-Grid, single learner."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np

from .base import ucb_select
from .errors import ContractViolation, NumericError
from .meta import conc_width

_BLOCK = 4096


class _Uniforms:
    """Blocked uniform draws from a generator; deterministic per seed."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._buf = rng.random(_BLOCK)
        self._pos = 0

    def __call__(self) -> float:
        if self._pos == _BLOCK:
            self._buf = self.rng.random(_BLOCK)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)


def sample_index(p: Sequence[float], u: float) -> int:
    acc = 0.0
    last = 0
    for i, x in enumerate(p):
        if x > 0.0:
            acc += x
            last = i
            if u < acc:
                return i
    return last


# -- Log-barrier online mirror descent ---------------------------------------

def _barrier_sum(inv_p, loss, eta, lam) -> float:
    s = 0.0
    for ip, l, e in zip(inv_p, loss, eta):
        den = ip + e * (l - lam)
        if den <= 0.0:
            return math.inf
        s += 1.0 / den
    return s


def log_barrier_lambda(p, loss, eta, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Normalizer lambda of the log-barrier OMD step, by bisection.

    The sum ``sum_j 1 / (1/p_j + eta_j (loss_j - lambda))`` is increasing in
    lambda; it is <= 1 at ``min(loss)`` and reaches 1 no later than
    ``max(loss)`` or the first pole, whichever comes first.
    """
    inv_p = [1.0 / x for x in p]
    lo, hi = min(loss), max(loss)
    if lo == hi:
        return float(lo)
    pole = min(l + ip / e for ip, l, e in zip(inv_p, loss, eta))
    if pole < hi:
        hi = pole
    f_lo = _barrier_sum(inv_p, loss, eta, lo) - 1.0
    f_hi = _barrier_sum(inv_p, loss, eta, hi) - 1.0
    if f_lo > 1e-9 or f_hi < -1e-9:
        raise NumericError(f"log-barrier root not bracketed: f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}")
    if abs(f_lo) <= tol:
        return float(lo)
    if abs(f_hi) <= tol:
        return float(hi)
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f = _barrier_sum(inv_p, loss, eta, mid) - 1.0
        if abs(f) <= tol or mid == lo or mid == hi:
            break
        if f < 0.0:
            lo = mid
        else:
            hi = mid
    return float(mid)


def log_barrier_omd(p, loss, eta) -> List[float]:
    """One log-barrier OMD step; returns the updated distribution."""
    p = [float(x) for x in p]
    loss = [float(x) for x in loss]
    eta = [float(x) for x in eta]
    if not (len(p) == len(loss) == len(eta)) or not p:
        raise ContractViolation("p, loss and eta must be non-empty and of equal length")
    if min(p) <= 0.0 or min(eta) <= 0.0:
        raise ContractViolation("p and eta must be strictly positive")
    lam = log_barrier_lambda(p, loss, eta)
    out = []
    for x, l, e in zip(p, loss, eta):
        den = 1.0 / x + e * (l - lam)
        out.append(1.0 / den if den > 0.0 else 0.0)
    total = sum(out)
    if abs(total - 1.0) > 1e-6:
        raise NumericError(f"log-barrier step left the simplex (sum={total!r})")
    return [x / total for x in out]


# -- Corral --------------------------------------------------------------------

class CorralState:
    """Corral with the stochastic wrapper.

    ``loss_mode="reward"`` feeds ``r / p`` on the chosen coordinate straight
    into the OMD step as its loss; ``"one_minus"`` feeds ``(1 - r) / p``.
    """

    def __init__(self, num_learners: int, horizon: int, eta: Optional[float] = None,
                 rng: Optional[np.random.Generator] = None, loss_mode: str = "reward"):
        if loss_mode not in ("reward", "one_minus"):
            raise ContractViolation(f"unknown loss_mode {loss_mode!r}")
        m = num_learners
        self.num_learners = m
        self.horizon = horizon
        self.gamma = 1.0 / horizon
        log_t = math.log(horizon) if horizon > 1 else 1.0
        self.beta = math.exp(1.0 / log_t)
        eta0 = 1.0 / math.sqrt(horizon) if eta is None else float(eta)
        self.eta = [eta0] * m
        self.rho = [2.0 * m] * m
        self.p_low = [1.0 / r for r in self.rho]
        self.p = [1.0 / m] * m
        self.loss_mode = loss_mode
        self._u = _Uniforms(rng if rng is not None else np.random.default_rng())

    potentials = None

    def select(self) -> int:
        return sample_index(self.p, self._u())

    def update(self, i: int, reward: float) -> None:
        corral_step(self, i, reward)


def corral_step(state: CorralState, i: int, reward: float) -> CorralState:
    p_i = state.p[i]
    if p_i <= 0.0:
        raise ContractViolation(f"learner {i} had zero probability")
    value = reward if state.loss_mode == "reward" else 1.0 - reward
    loss = [0.0] * state.num_learners
    loss[i] = value / p_i
    p = log_barrier_omd(state.p, loss, state.eta)
    g = state.gamma
    m = state.num_learners
    p = [(1.0 - g) * x + g / m for x in p]
    for j in range(m):
        if state.p_low[j] > p[j]:
            state.p_low[j] = p[j] / 2.0
            state.eta[j] *= state.beta
        state.rho[j] = 1.0 / state.p_low[j]
    state.p = p
    return state


# -- EXP3 ------------------------------------------------------------------------

class Exp3State:
    def __init__(self, num_learners: int, horizon: int, eta: Optional[float] = None,
                 gamma: Optional[float] = None, rng: Optional[np.random.Generator] = None):
        m = num_learners
        self.num_learners = m
        self.eta = math.sqrt(math.log(m) / (m * horizon)) if eta is None else float(eta)
        self.gamma = 0.1 / math.sqrt(horizon) if gamma is None else float(gamma)
        self.R = [0.0] * m
        self.p = exp3_distribution(self.R, self.eta, self.gamma)
        self._u = _Uniforms(rng if rng is not None else np.random.default_rng())

    potentials = None

    def select(self) -> int:
        return sample_index(self.p, self._u())

    def update(self, i: int, reward: float) -> None:
        exp3_update(self, i, reward)


def exp3_distribution(R: Sequence[float], eta: float, gamma: float) -> List[float]:
    m = len(R)
    scores = [eta * r for r in R]
    top = max(scores)
    w = [math.exp(s - top) for s in scores]
    total = sum(w)
    return [(1.0 - gamma) * x / total + gamma / m for x in w]


def exp3_update(state: Exp3State, i: int, reward: float) -> Exp3State:
    state.R[i] += reward / state.p[i]
    state.p = exp3_distribution(state.R, state.eta, state.gamma)
    return state


# -- Greedy and UCB over learners ---------------------------------------------

def greedy_meta_select(counts: Sequence[int], sums: Sequence[float]) -> int:
    best = -math.inf
    arg = 0
    for i, n in enumerate(counts):
        if n == 0:
            return i
        mean = sums[i] / n
        if mean > best:
            best = mean
            arg = i
    return arg


def ucb_meta_select(counts: Sequence[int], sums: Sequence[float], c: float = 1.0,
                    delta: float = 0.1) -> int:
    return ucb_select(counts, sums, c, delta)


class _CountingMeta:
    def __init__(self, num_learners: int):
        self.num_learners = num_learners
        self.counts = [0] * num_learners
        self.sums = [0.0] * num_learners

    potentials = None

    def update(self, i: int, reward: float) -> None:
        self.counts[i] += 1
        self.sums[i] += reward


class GreedyMeta(_CountingMeta):
    def select(self) -> int:
        return greedy_meta_select(self.counts, self.sums)


class UcbMeta(_CountingMeta):
    def __init__(self, num_learners: int, c: float = 1.0, delta: float = 0.1):
        super().__init__(num_learners)
        if not 0.0 < delta < 1.0:
            raise ContractViolation(f"delta={delta} outside (0, 1)")
        self.c = c
        self.delta = delta

    def select(self) -> int:
        return ucb_select(self.counts, self.sums, self.c, self.delta)


class SingleBase(_CountingMeta):
    """Always follows one learner; running a base learner on its own."""

    def __init__(self, num_learners: int, index: int = 0):
        super().__init__(num_learners)
        if not 0 <= index < num_learners:
            raise ContractViolation(f"index {index} outside 0..{num_learners - 1}")
        self.index = index

    def select(self) -> int:
        return self.index


# -- Regret balancing with a grid of candidate bounds -------------------------

DEFAULT_GRID = (1.0, 2.0, 4.0, 8.0, 16.0)


class RbGridState:
    """Regret balancing over copies of base learners with fixed candidate bounds.

    Copy ``k`` carries candidate coefficient ``bounds[k]``; the caller owns one
    independent base-learner instance per copy.  Selection is the argmin of
    ``bound * sqrt(n)`` over active copies.
    """

    def __init__(self, bounds: Sequence[float], delta: float = 0.05, c: float = 1.0):
        if not bounds:
            raise ContractViolation("RB-Grid needs at least one copy")
        self.bounds = [float(b) for b in bounds]
        self.num_learners = len(self.bounds)
        self.delta = delta
        self.c = c
        self.active = [True] * self.num_learners
        self.counts = [0] * self.num_learners
        self.sums = [0.0] * self.num_learners
        self.lower = [-math.inf] * self.num_learners

    potentials = None

    def select(self) -> int:
        best = math.inf
        arg = -1
        for k in range(self.num_learners):
            if self.active[k]:
                value = self.bounds[k] * math.sqrt(self.counts[k])
                if value < best:
                    best = value
                    arg = k
        return arg

    def update(self, i: int, reward: float) -> None:
        rb_grid_update(self, i, reward)


def expand_grid(num_base: int, grid: Sequence[float] = DEFAULT_GRID):
    """(base index, bound) for every copy, base-major."""
    return [(b, float(g)) for b in range(num_base) for g in grid]


def rb_grid_update(state: RbGridState, i: int, reward: float) -> RbGridState:
    if not state.active[i]:
        raise ContractViolation(f"copy {i} is inactive")
    state.counts[i] += 1
    state.sums[i] += reward
    n = state.counts[i]
    width = conc_width(n, state.num_learners, state.delta, state.c)
    mean = state.sums[i] / n
    state.lower[i] = mean - width
    rhs = max(state.lower[j] for j in range(state.num_learners) if state.active[j])
    if mean + state.bounds[i] * math.sqrt(n) / n + width < rhs:
        state.active[i] = False
        if not any(state.active):
            top = max(range(state.num_learners), key=lambda k: (state.bounds[k], -k))
            state.active[top] = True
    return state
