"""Data-driven regret balancing meta-learners (D3RB and ED2RB).

Both variants pick the learner with the smallest balancing potential and
route the reward to it alone.  They differ only in how the chosen learner's
regret coefficient and potential are refreshed afterwards:

* D3RB doubles the coefficient whenever the misspecification test fires and
  sets the potential to ``d_hat * sqrt(n)``.
* ED2RB estimates the coefficient directly from the reward gap to the best
  lower confidence bound and clips the new potential to ``[phi, 2 phi]``.

Concentration widths use ``L(n) = ln(M * max(ln n, 1) / delta)`` so they stay
finite for ``n`` in {1, 2}.  All maxima over learners skip unplayed ones.
"""

from __future__ import annotations

import math
from enum import Enum

from .errors import ContractViolation


class Variant(str, Enum):
    D3RB = "D3RB"
    ED2RB = "ED2RB"


def log_term(n: int, num_learners: int, delta: float) -> float:
    return math.log(num_learners * max(math.log(n), 1.0) / delta)


def conc_width(n: int, num_learners: int, delta: float, c: float) -> float:
    if n < 1:
        raise ContractViolation("concentration width needs n >= 1")
    return c * math.sqrt(log_term(n, num_learners, delta) / n)


class BalancingState:
    """Counts, reward sums, coefficients and potentials of the balancing loop."""

    def __init__(self, num_learners: int, variant=Variant.ED2RB, d_min: float = 1.0,
                 delta: float = 0.05, c: float = 1.0):
        if num_learners < 1:
            raise ContractViolation("need at least one base learner")
        if d_min < 1.0:
            raise ContractViolation("d_min must be >= 1")
        if not 0.0 < delta < 1.0:
            raise ContractViolation(f"delta={delta} outside (0, 1)")
        if c <= 0:
            raise ContractViolation("concentration constant must be > 0")
        self.variant = Variant(variant)
        self.num_learners = num_learners
        self.d_min = float(d_min)
        self.delta = float(delta)
        self.c = float(c)
        self.counts = [0] * num_learners
        self.sums = [0.0] * num_learners
        self.dhat = [self.d_min] * num_learners
        self.phi = [self.d_min] * num_learners
        # û/n - width for played learners, -inf otherwise
        self.lower = [-math.inf] * num_learners
        self.t = 0

    def width(self, i: int) -> float:
        return conc_width(self.counts[i], self.num_learners, self.delta, self.c)

    def best_lower(self) -> float:
        return max(self.lower)

    def _record(self, i: int, reward: float) -> None:
        self.t += 1
        self.counts[i] += 1
        self.sums[i] += reward
        self.lower[i] = self.sums[i] / self.counts[i] - self.width(i)

    # uniform meta-learner protocol
    @property
    def potentials(self):
        return self.phi

    def select(self) -> int:
        return select_learner(self)

    def update(self, i: int, reward: float) -> None:
        if self.variant is Variant.D3RB:
            d3rb_update(self, i, reward)
        else:
            ed2rb_update(self, i, reward)


def select_learner(state: BalancingState) -> int:
    """Smallest potential, lowest index on ties."""
    phi = state.phi
    best = phi[0]
    arg = 0
    for i in range(1, len(phi)):
        if phi[i] < best:
            best = phi[i]
            arg = i
    return arg


def misspec_test(state: BalancingState, i: int) -> bool:
    """True when learner ``i``'s optimistic value falls below the best lower bound."""
    n = state.counts[i]
    if n < 1:
        raise ContractViolation(f"learner {i} has not been played")
    rhs = state.best_lower()
    if rhs == -math.inf:
        return False
    lhs = state.sums[i] / n + state.dhat[i] * math.sqrt(n) / n + state.width(i)
    return lhs < rhs


def ed2rb_estimate(state: BalancingState, i: int) -> float:
    n = state.counts[i]
    if n < 1:
        raise ContractViolation(f"learner {i} has not been played")
    rhs = state.best_lower()
    if rhs == -math.inf:
        return state.d_min
    gap = rhs - state.sums[i] / n - state.width(i)
    return max(state.d_min, math.sqrt(n) * gap)


def d3rb_update(state: BalancingState, i: int, reward: float) -> BalancingState:
    state._record(i, reward)
    if misspec_test(state, i):
        state.dhat[i] *= 2.0
    state.phi[i] = state.dhat[i] * math.sqrt(state.counts[i])
    return state


def ed2rb_update(state: BalancingState, i: int, reward: float) -> BalancingState:
    state._record(i, reward)
    d = ed2rb_estimate(state, i)
    state.dhat[i] = d
    old = state.phi[i]
    state.phi[i] = min(max(d * math.sqrt(state.counts[i]), old), 2.0 * old)
    return state
