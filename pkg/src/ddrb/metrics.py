"""Regret traces and the diagnostics computed from oracle regrets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import ContractViolation


@dataclass
class RegretTrace:
    """One repetition.  Arrays are indexed by round (0-based).

    ``phi_before``/``phi_after``/``dhat`` describe the chosen learner's
    potential before and after the round and its coefficient after the
    update; they are only recorded for balancing meta-learners.
    """

    chosen: np.ndarray
    inst_regret: np.ndarray
    reward: np.ndarray
    mean_reward: np.ndarray
    num_learners: int
    seed: Optional[int] = None
    phi_before: Optional[np.ndarray] = None
    phi_after: Optional[np.ndarray] = None
    dhat: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return len(self.chosen)

    @property
    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.inst_regret)

    @property
    def has_potentials(self) -> bool:
        return self.phi_after is not None

    def learner_regrets(self, i: int) -> np.ndarray:
        """Instantaneous regrets of learner ``i`` in its internal-clock order."""
        return self.inst_regret[self.chosen == i]

    def play_counts(self) -> np.ndarray:
        return np.bincount(self.chosen, minlength=self.num_learners)


def regret_coefficient(regrets: Sequence[float], d_min: float) -> np.ndarray:
    """``max(sum_{l<=k} reg_l / sqrt(k), d_min)`` for k = 1..len(regrets)."""
    if d_min <= 0:
        raise ContractViolation("d_min must be > 0")
    reg = np.asarray(regrets, dtype=float)
    if reg.size == 0:
        return np.empty(0)
    k = np.arange(1, reg.size + 1)
    return np.maximum(np.cumsum(reg) / np.sqrt(k), d_min)


def monotonic_coefficient(d_seq: Sequence[float]) -> np.ndarray:
    d = np.asarray(d_seq, dtype=float)
    if d.size == 0:
        return np.empty(0)
    return np.maximum.accumulate(d)


def coefficient_at(coeffs: np.ndarray, n: int, d_min: float) -> float:
    """Coefficient after ``n`` plays; an unplayed learner sits at ``d_min``."""
    return float(coeffs[n - 1]) if n > 0 else float(d_min)


@dataclass
class ComparatorQuantities:
    dbar_star: float
    d_star: Optional[float]


def comparator_quantities(trace: RegretTrace, d_min: float = 1.0) -> ComparatorQuantities:
    """Smallest monotonic coefficient and, with potential history, the
    smallest coefficient evaluated at the last non-doubling play of each learner.
    """
    m = trace.num_learners
    coeffs = [regret_coefficient(trace.learner_regrets(i), d_min) for i in range(m)]
    dbar_star = min(
        float(monotonic_coefficient(c)[-1]) if c.size else float(d_min) for c in coeffs
    )
    if not trace.has_potentials:
        return ComparatorQuantities(dbar_star, None)

    # plays of each learner up to and including each round
    counts = np.zeros((trace.horizon, m), dtype=np.int64)
    counts[np.arange(trace.horizon), trace.chosen] = 1
    counts = np.cumsum(counts, axis=0)
    not_doubled = trace.phi_after < 2.0 * trace.phi_before
    last = {}
    for j in range(m):
        rounds = np.nonzero((trace.chosen == j) & not_doubled)[0]
        last[j] = int(rounds[-1]) if rounds.size else None
    d_star = math.inf
    for i in range(m):
        worst = d_min
        for j in range(m):
            t_j = last[j]
            n_i = int(counts[t_j, i]) if t_j is not None else 0
            worst = max(worst, coefficient_at(coeffs[i], n_i, d_min))
        d_star = min(d_star, worst)
    return ComparatorQuantities(dbar_star, float(d_star))


def concentration_event(trace: RegretTrace, c: float, delta: float) -> bool:
    """Whether ``|u_hat - u| <= c sqrt(n L(n))`` held for every learner and round.

    ``u`` accumulates the expected rewards of the played actions.
    """
    m = trace.num_learners
    for i in range(m):
        mask = trace.chosen == i
        dev = np.cumsum(trace.reward[mask] - trace.mean_reward[mask])
        if dev.size == 0:
            continue
        n = np.arange(1, dev.size + 1)
        log_n = np.maximum(np.log(n), 1.0)
        bound = c * np.sqrt(n * np.log(m * log_n / delta))
        if np.any(np.abs(dev) > bound):
            return False
    return True


def checkpoints_for(horizon: int, stride: Optional[int] = None) -> List[int]:
    stride = stride or max(1, horizon // 100)
    rounds = list(range(stride, horizon + 1, stride))
    if not rounds or rounds[-1] != horizon:
        rounds.append(horizon)
    return rounds


@dataclass
class SummaryRow:
    round: int
    mean_regret: float
    two_se: float
    mean_regret_scale: float


def summary_rows(values: np.ndarray, rounds: Sequence[int]) -> List[SummaryRow]:
    """``values[r, k]`` is repetition r's cumulative regret at ``rounds[k]``."""
    values = np.asarray(values, dtype=float)
    reps = values.shape[0]
    if reps < 2:
        raise ContractViolation("standard error needs at least two repetitions")
    rows = []
    for k, t in enumerate(rounds):
        col = values[:, k]
        mean = float(col.mean())
        se = float(np.std(col, ddof=1)) / math.sqrt(reps)
        rows.append(SummaryRow(int(t), mean, 2.0 * se, mean / math.sqrt(t)))
    return rows


def summarize_cumulative(cumulative: np.ndarray, checkpoints: Sequence[int]) -> List[SummaryRow]:
    """``cumulative`` has shape (reps, T); checkpoints are 1-based rounds."""
    cumulative = np.asarray(cumulative, dtype=float)
    horizon = cumulative.shape[1]
    for t in checkpoints:
        if not 1 <= t <= horizon:
            raise ContractViolation(f"checkpoint {t} outside 1..{horizon}")
    cols = [t - 1 for t in checkpoints]
    return summary_rows(cumulative[:, cols], checkpoints)


def summarize(traces: Sequence[RegretTrace], checkpoints: Sequence[int]) -> List[SummaryRow]:
    """Mean cumulative regret and 2 standard errors at each checkpoint."""
    if len(traces) < 2:
        raise ContractViolation("standard error needs at least two repetitions")
    horizons = {t.horizon for t in traces}
    if len(horizons) != 1:
        raise ContractViolation("traces have different horizons")
    return summarize_cumulative(np.stack([t.cumulative_regret for t in traces]), checkpoints)


# -- invariant audits ---------------------------------------------------------

@dataclass
class BalanceReport:
    balance_violations: int = 0
    monotonicity_violations: int = 0
    doubling_violations: int = 0


def audit_potentials(trace: RegretTrace, factor: float, d_min: float = 1.0,
                     check_doublings: bool = False) -> BalanceReport:
    """Replay the recorded potentials and count invariant violations.

    Checks ``max phi <= factor * min phi`` after every round, that the chosen
    learner's potential never decreases and, optionally, that the number of
    doublings of each potential by round t is at most ``log2(t max(1, 1/d_min))``.
    """
    if not trace.has_potentials:
        raise ContractViolation("trace carries no potential history")
    m = trace.num_learners
    phi = [d_min] * m
    doublings = [0] * m
    report = BalanceReport()
    scale = max(1.0, 1.0 / d_min)
    chosen = trace.chosen.tolist()
    before = trace.phi_before.tolist()
    after = trace.phi_after.tolist()
    for t in range(trace.horizon):
        i = chosen[t]
        if before[t] != phi[i]:
            report.monotonicity_violations += 1
        if after[t] < before[t]:
            report.monotonicity_violations += 1
        phi[i] = after[t]
        if max(phi) > factor * min(phi):
            report.balance_violations += 1
        if check_doublings and after[t] >= 2.0 * before[t]:
            doublings[i] += 1
            if doublings[i] > math.log2((t + 1) * scale):
                report.doubling_violations += 1
    return report


def audit_coefficients(trace: RegretTrace, variant: str, d_min: float = 1.0) -> int:
    """Rounds where the estimated coefficient exceeds its oracle bound.

    D3RB: ``d_hat <= 2 * dbar``; ED2RB: ``d_hat <= d``.  Both sides only move
    for the chosen learner, so checking it each round covers every pair.
    """
    if trace.dhat is None:
        raise ContractViolation("trace carries no coefficient history")
    m = trace.num_learners
    coeffs = [regret_coefficient(trace.learner_regrets(i), d_min) for i in range(m)]
    bounds = [
        2.0 * monotonic_coefficient(c) if variant == "D3RB" else c for c in coeffs
    ]
    seen = [0] * m
    violations = 0
    chosen = trace.chosen.tolist()
    dhat = trace.dhat.tolist()
    for t in range(trace.horizon):
        i = chosen[t]
        k = seen[i]
        seen[i] += 1
        if dhat[t] > bounds[i][k] * (1.0 + 1e-12):
            violations += 1
    return violations
