import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddrb.base import ucb_index
from ddrb.baselines import (
    CorralState,
    Exp3State,
    GreedyMeta,
    RbGridState,
    SingleBase,
    UcbMeta,
    corral_step,
    exp3_distribution,
    expand_grid,
    greedy_meta_select,
    log_barrier_lambda,
    log_barrier_omd,
    sample_index,
    ucb_meta_select,
)
from ddrb.errors import ContractViolation
from ddrb.meta import conc_width

from oracles import barrier_sum, omd_grid_root


def test_omd_closed_form():
    lam = log_barrier_lambda([0.5, 0.5], [4.0, 0.0], [1.0, 1.0])
    assert lam == pytest.approx(3.0 - math.sqrt(5.0), abs=1e-9)
    p = log_barrier_omd([0.5, 0.5], [4.0, 0.0], [1.0, 1.0])
    np.testing.assert_allclose(p, [0.190983005625053, 0.809016994374947], atol=1e-9)


def test_omd_single_coordinate_and_equal_losses():
    assert log_barrier_lambda([1.0], [2.5], [0.3]) == 2.5
    assert log_barrier_omd([1.0], [2.5], [0.3]) == [1.0]
    p = [0.2, 0.5, 0.3]
    assert log_barrier_lambda(p, [1.5] * 3, [0.7, 1.0, 2.0]) == 1.5
    np.testing.assert_allclose(log_barrier_omd(p, [1.5] * 3, [0.7, 1.0, 2.0]), p, atol=1e-15)


def test_omd_zero_loss_is_identity():
    p = [0.1, 0.6, 0.3]
    assert log_barrier_lambda(p, [0.0] * 3, [1.0] * 3) == 0.0
    np.testing.assert_allclose(log_barrier_omd(p, [0.0] * 3, [1.0] * 3), p, atol=1e-15)


def test_omd_rejects_bad_input():
    with pytest.raises(ContractViolation):
        log_barrier_omd([0.5, 0.5], [1.0], [1.0, 1.0])
    with pytest.raises(ContractViolation):
        log_barrier_omd([1.0, 0.0], [1.0, 0.0], [1.0, 1.0])


@pytest.mark.parametrize("seed", range(25))
def test_omd_against_grid_scan(seed):
    rng = np.random.default_rng(1000 + seed)
    m = int(rng.integers(2, 6))
    p = rng.dirichlet(np.ones(m))
    eta = rng.uniform(0.05, 3.0, m)
    loss = rng.uniform(0.0, 1.0, m)
    lam = log_barrier_lambda(p, loss, eta)
    assert loss.min() - 1e-12 <= lam <= loss.max() + 1e-12
    assert abs(lam - omd_grid_root(p, loss, eta)) <= 1e-6
    out = log_barrier_omd(p, loss, eta)
    assert abs(sum(out) - 1.0) <= 1e-10
    assert barrier_sum(p, loss, eta, lam) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(0, 2**31),
    st.floats(1e-3, 1e3),
)
def test_omd_importance_weighted_losses(m, seed, scale):
    # the shape Corral produces: one non-zero coordinate r / p_i
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(m)) * 0.99 + 0.01 / m
    eta = rng.uniform(0.001, 1.0, m)
    loss = np.zeros(m)
    i = int(rng.integers(m))
    loss[i] = rng.uniform(-1, 1) * scale / p[i]
    out = log_barrier_omd(p, loss, eta)
    assert abs(sum(out) - 1.0) <= 1e-10
    assert min(out) >= 0.0


def test_corral_init():
    s = CorralState(4, 10000)
    assert s.gamma == 1e-4
    assert s.beta == pytest.approx(math.exp(1.0 / math.log(10000)))
    assert s.eta == [0.01] * 4
    assert s.rho == [8.0] * 4
    assert s.p_low == [0.125] * 4
    assert s.p == [0.25] * 4


def test_corral_zero_reward_only_mixes():
    s = CorralState(3, 100)
    s.p = [0.2, 0.5, 0.3]
    corral_step(s, 1, 0.0)
    g = 0.01
    np.testing.assert_allclose(s.p, [(1 - g) * x + g / 3 for x in (0.2, 0.5, 0.3)], atol=1e-15)


def test_corral_lower_bound_halving():
    s = CorralState(2, 100)
    s.p = [0.5, 0.5]
    s.p_low = [0.1, 0.1]
    eta0 = list(s.eta)
    # drive coordinate 0's mass below its lower bound with a large reward
    corral_step(s, 0, 100.0)
    assert s.p[0] < 0.1
    assert s.p_low[0] == pytest.approx(s.p[0] / 2)
    assert s.eta[0] == pytest.approx(eta0[0] * s.beta)
    assert s.p_low[1] == 0.1 and s.eta[1] == eta0[1]
    assert s.rho == pytest.approx([1 / s.p_low[0], 10.0])


def test_corral_example_numbers():
    # lower bound 0.1 and a post-mix probability of 0.08
    s = CorralState(2, 100, eta=1.0)
    s.p = [0.5, 0.5]
    s.p_low = [0.1, 0.1]
    g = s.gamma
    # choose the reward so that the OMD output on coordinate 0 mixes to 0.08
    target = (0.08 - g / 2) / (1 - g)
    # 1/target = 2 + (l - lam); 1/(1-target) = 2 - lam  (solve for l, lam)
    lam = 2.0 - 1.0 / (1.0 - target)
    loss = 1.0 / target - 2.0 + lam
    corral_step(s, 0, loss * 0.5)
    assert s.p[0] == pytest.approx(0.08, abs=1e-9)
    assert s.p_low[0] == pytest.approx(0.04, abs=1e-9)
    assert s.eta[0] == pytest.approx(s.beta)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(10, 5000), st.integers(0, 2**31))
def test_corral_stays_on_simplex(m, horizon, seed):
    rng = np.random.default_rng(seed)
    s = CorralState(m, horizon, rng=rng)
    for _ in range(200):
        i = s.select()
        s.update(i, float(rng.normal(0.5, 1.0)))
        assert abs(sum(s.p) - 1.0) <= 1e-10
        assert min(s.p) >= s.gamma / m - 1e-15
        assert all(e > 0 for e in s.eta)


def test_corral_one_minus_mode():
    a = CorralState(2, 100, loss_mode="one_minus")
    corral_step(a, 0, 1.0)
    np.testing.assert_allclose(a.p, [0.5, 0.5], atol=1e-15)
    with pytest.raises(ContractViolation):
        CorralState(2, 100, loss_mode="other")


def test_exp3_defaults_and_distribution():
    s = Exp3State(2, 10000)
    assert s.eta == pytest.approx(math.sqrt(math.log(2) / 20000))
    assert s.gamma == pytest.approx(0.001)
    assert s.p == [0.5, 0.5]
    p = exp3_distribution([800.0, 0.0], 1.0, 0.0)
    assert p[0] == pytest.approx(1.0) and p[1] < 1e-300


def test_exp3_update_and_floor():
    s = Exp3State(3, 100, eta=0.5, gamma=0.3)
    p0 = s.p[1]
    s.update(1, 2.0)
    assert s.R == [0.0, 2.0 / p0, 0.0]
    assert abs(sum(s.p) - 1.0) <= 1e-12
    assert min(s.p) >= 0.1 - 1e-15


@given(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=8), st.floats(-1e4, 1e4))
def test_exp3_shift_invariance(R, shift):
    a = exp3_distribution(R, 0.01, 0.05)
    b = exp3_distribution([r + shift for r in R], 0.01, 0.05)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_greedy_meta_rules():
    assert greedy_meta_select([0, 5], [0.0, 3.0]) == 0
    assert greedy_meta_select([1, 1], [0.2, 0.7]) == 1
    assert greedy_meta_select([2, 2], [0.8, 0.8]) == 0


def test_ucb_meta_rules():
    assert ucb_meta_select([3, 0, 0], [1.0, 0.0, 0.0]) == 1
    # frozen from a 30-digit evaluation of 0.5 + sqrt(ln(40) / 4)
    assert ucb_index(0.5, 4, 1.0, 0.1) == pytest.approx(1.46032279131992, abs=1e-12)
    counts, sums = [4, 9, 2], [2.0, 6.0, 0.1]
    assert ucb_meta_select(counts, sums, c=0.0) == greedy_meta_select(counts, sums)


def test_counting_metas():
    g = GreedyMeta(2)
    u = UcbMeta(2)
    for meta in (g, u):
        assert meta.select() == 0
        meta.update(0, 1.0)
        assert meta.select() == 1
        assert meta.potentials is None
    single = SingleBase(3, 2)
    assert [single.select() for _ in range(4)] == [2] * 4
    with pytest.raises(ContractViolation):
        SingleBase(3, 3)


def test_sample_index():
    p = [0.2, 0.0, 0.8]
    assert sample_index(p, 0.0) == 0
    assert sample_index(p, 0.2) == 2
    assert sample_index(p, 0.999999) == 2
    # rounding slack never lands on a zero-probability coordinate
    assert sample_index([0.5, 0.5 - 1e-16, 0.0], 1.0 - 1e-17) == 1


def test_expand_grid():
    assert expand_grid(2, (1, 2)) == [(0, 1.0), (0, 2.0), (1, 1.0), (1, 2.0)]
    assert len(expand_grid(3)) == 15


def test_rb_grid_selection_is_balancing():
    s = RbGridState([1.0, 2.0, 4.0])
    picks = []
    for _ in range(40):
        i = s.select()
        picks.append(i)
        s.update(i, 0.5)
    assert all(s.active)
    counts = np.bincount(picks, minlength=3)
    # bound * sqrt(n) stays balanced: n_k roughly proportional to 1/bound^2
    assert counts[0] > counts[1] > counts[2]


def _rb_pair(bounds, active):
    s = RbGridState(bounds, delta=0.1, c=1.0)
    s.active = list(active)
    s.counts = [9999, 10000]
    s.sums = [3000.0, 9000.0]
    s.lower = [3000 / 9999 - conc_width(9999, 2, 0.1, 1.0), 0.9 - conc_width(10000, 2, 0.1, 1.0)]
    return s


def test_rb_grid_deactivates_violated_copy():
    # same numbers as the firing misspecification example
    s = _rb_pair([1.0, 1.0], [True, True])
    s.update(0, 0.0)
    assert s.active == [False, True]
    with pytest.raises(ContractViolation):
        s.update(0, 1.0)


def test_rb_grid_ignores_inactive_copies():
    s = _rb_pair([1.0, 8.0], [True, False])
    s.update(0, 0.0)
    assert s.active == [True, False]


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.integers(1, 10**6), st.floats(1.0, 16.0))
def test_rb_grid_lone_copy_survives(mean, n, bound):
    s = RbGridState([bound, 2 * bound], delta=0.1)
    s.active = [True, False]
    s.counts[0] = n - 1
    s.sums[0] = mean * (n - 1)
    s.update(0, mean)
    assert s.active[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_rb_grid_active_set_shrinks(num_base, seed):
    rng = np.random.default_rng(seed)
    copies = expand_grid(num_base)
    means = rng.uniform(-1, 1, num_base)
    s = RbGridState([g for _, g in copies])
    active = sum(s.active)
    for _ in range(400):
        k = s.select()
        s.update(k, means[copies[k][0]] + rng.normal())
        now = sum(s.active)
        assert 1 <= now <= active
        active = now
