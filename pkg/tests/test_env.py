import math

import numpy as np
import pytest

from ddrb.env import (
    ActionSet,
    EnvironmentSpec,
    EnvKind,
    cube_argmax,
    instantiate_env,
    sphere_argmax,
    uniform_sphere,
)
from ddrb.errors import ConfigurationError, ContractViolation

MEANS = (0.5, 1.0, 0.2, 0.1, 0.6)


def ramp_theta(d, norm=5.0):
    v = np.arange(d, dtype=float)
    return tuple(v / np.linalg.norm(v) * norm)


def test_gaussian_mab_instantiates():
    env = instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS), 7)
    assert env.spec.num_arms == 5
    assert env.v_star == 1.0


def test_empty_arm_set_rejected():
    with pytest.raises(ConfigurationError) as exc:
        instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=()), 0)
    assert exc.value.field == "environment.means"


@pytest.mark.parametrize("theta", [(), (1.0, math.nan), (math.inf,)])
def test_bad_theta_rejected(theta):
    spec = EnvironmentSpec(EnvKind.LINEAR, theta_star=theta, action_set=ActionSet.UNIT_SPHERE)
    with pytest.raises(ConfigurationError):
        instantiate_env(spec, 0)


def test_bernoulli_means_must_be_probabilities():
    with pytest.raises(ConfigurationError):
        instantiate_env(EnvironmentSpec(EnvKind.BERNOULLI_MAB, means=(0.2, 1.5)), 0)


def test_linear_sphere_dimension():
    spec = EnvironmentSpec(EnvKind.LINEAR, theta_star=ramp_theta(10),
                           action_set=ActionSet.UNIT_SPHERE)
    env = instantiate_env(spec, 0)
    assert spec.dim == 10
    assert env.v_star == pytest.approx(5.0, abs=1e-12)


def test_mab_regret_of_arm_zero():
    env = instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS), 1)
    out = env.step(0)
    assert out.inst_regret == pytest.approx(0.5, abs=1e-15)
    assert out.mean_reward == 0.5


def test_sphere_optimal_action_has_zero_regret():
    theta = ramp_theta(10)
    env = instantiate_env(
        EnvironmentSpec(EnvKind.LINEAR, theta_star=theta, action_set=ActionSet.UNIT_SPHERE), 0
    )
    out = env.step(np.asarray(theta) / 5.0)
    assert out.inst_regret <= 1e-12


def test_sphere_regret_is_norm_minus_value():
    theta = (3.0, 4.0)
    env = instantiate_env(
        EnvironmentSpec(EnvKind.LINEAR, theta_star=theta, action_set=ActionSet.UNIT_SPHERE), 0
    )
    # <a, theta> = 3 for a = e_1; v* = 5
    assert env.step(np.array([1.0, 0.0])).inst_regret == pytest.approx(2.0, abs=1e-12)


def test_hypercube_scales():
    theta = (1.0, -2.0, 0.5, 0.0)
    default = EnvironmentSpec(EnvKind.LINEAR, theta_star=theta, action_set=ActionSet.HYPERCUBE)
    unit = EnvironmentSpec(EnvKind.LINEAR, theta_star=theta, action_set=ActionSet.HYPERCUBE,
                           hypercube_scale=1.0)
    assert default.cube_scale == pytest.approx(0.5)
    assert instantiate_env(default, 0).v_star == pytest.approx(0.5 * 3.5)
    env = instantiate_env(unit, 0)
    best = cube_argmax(np.asarray(theta), 1.0)
    np.testing.assert_array_equal(best, [1.0, -1.0, 1.0, 1.0])
    assert env.step(best).inst_regret == 0.0
    with pytest.raises(ContractViolation):
        env.step(np.array([0.5, -1.0, 1.0, 1.0]))


def test_sphere_argmax_zero_goes_to_first_axis():
    np.testing.assert_array_equal(sphere_argmax(np.zeros(3)), [1.0, 0.0, 0.0])


def test_contexts_are_unit_vectors_and_deterministic():
    spec = EnvironmentSpec(EnvKind.CONTEXTUAL, theta_star=ramp_theta(10, 1.0), context_size=10)
    a, b = instantiate_env(spec, 3), instantiate_env(spec, 3)
    for _ in range(5):
        ca, cb = a.sample_context(), b.sample_context()
        assert ca.shape == (10, 10)
        np.testing.assert_allclose(np.linalg.norm(ca, axis=1), 1.0, atol=1e-9)
        np.testing.assert_array_equal(ca, cb)
        a.step(ca[0])
        b.step(cb[0])


def test_contextual_regret_is_conditional_on_context():
    spec = EnvironmentSpec(EnvKind.CONTEXTUAL, theta_star=ramp_theta(5, 1.0), context_size=4)
    env = instantiate_env(spec, 11)
    for _ in range(50):
        ctx = env.sample_context()
        values = ctx @ np.asarray(spec.theta_star)
        k = int(np.argmin(values))
        out = env.step(ctx[k])
        assert out.inst_regret == pytest.approx(values.max() - values[k], abs=1e-12)
        assert out.inst_regret >= 0.0


def test_contextual_needs_a_sampled_context():
    spec = EnvironmentSpec(EnvKind.CONTEXTUAL, theta_star=(1.0, 0.0))
    env = instantiate_env(spec, 0)
    with pytest.raises(ContractViolation):
        env.step(np.array([1.0, 0.0]))
    ctx = env.sample_context()
    with pytest.raises(ContractViolation):
        env.step(ctx[0] * 0.5)
    with pytest.raises(ContractViolation):
        instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS), 0).sample_context()


def test_bad_arm_is_a_contract_violation():
    env = instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS), 0)
    for bad in (-1, 5, 1.0):
        with pytest.raises(ContractViolation):
            env.step(bad)


def test_regret_zero_iff_optimal_mab():
    env = instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS), 0)
    for a in range(5):
        out = env.step(a)
        assert (out.inst_regret == 0.0) == (MEANS[a] == max(MEANS))
        assert out.inst_regret >= 0.0


def test_empirical_mean_converges():
    n = 100_000
    env = instantiate_env(EnvironmentSpec(EnvKind.GAUSSIAN_MAB, means=MEANS, reward_std=1.0), 5)
    rewards = np.array([env.step(4).reward for _ in range(n)])
    assert abs(rewards.mean() - 0.6) < 4.0 / math.sqrt(n)


def test_bernoulli_rewards_are_scaled_draws():
    n = 100_000
    env = instantiate_env(
        EnvironmentSpec(EnvKind.BERNOULLI_MAB, means=(0.1, 0.2), reward_scale=30.0), 5
    )
    rewards = np.array([env.step(1).reward for _ in range(n)])
    assert set(np.unique(rewards)) <= {0.0, 30.0}
    sigma = 30.0 * math.sqrt(0.2 * 0.8)
    assert abs(rewards.mean() - 6.0) < 4.0 * sigma / math.sqrt(n)


def test_uniform_sphere_isotropic():
    vecs = uniform_sphere(np.random.default_rng(0), 100_000, 10)
    assert np.linalg.norm(vecs.mean(axis=0)) < 0.02


def test_replay_is_bit_identical():
    spec = EnvironmentSpec(EnvKind.LINEAR, theta_star=ramp_theta(4),
                           action_set=ActionSet.UNIT_SPHERE)
    actions = uniform_sphere(np.random.default_rng(1), 200, 4)
    runs = []
    for _ in range(2):
        env = instantiate_env(spec, 42)
        runs.append([env.step(a).reward for a in actions])
    assert runs[0] == runs[1]


def test_linear_rewards_are_not_clipped():
    spec = EnvironmentSpec(EnvKind.LINEAR, theta_star=(5.0,), action_set=ActionSet.UNIT_SPHERE)
    env = instantiate_env(spec, 0)
    rewards = [env.step(np.array([1.0])).reward for _ in range(1000)]
    assert max(rewards) > 5.0 and min(rewards) < 5.0
