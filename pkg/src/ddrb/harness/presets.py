"""Built-in experiment presets.

Default horizons: exp1 20000, exp2 10000, exp3-5 1000, exp6 20000, and 20000
for expA-expL.  ``preset(name, long_horizon=True)`` gives any preset 20000
rounds.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable, Dict, Optional, Sequence

from ..env import ActionSet, EnvironmentSpec, EnvKind
from ..errors import ConfigurationError
from .config import ExperimentConfig, make_base, make_meta

LONG_HORIZON = 20000
CONF_SCALINGS = (0.0, 0.16, 2.5, 5.0, 25.0)


def ramp(length: int, norm: Optional[float] = None, ambient: Optional[int] = None):
    """(0, 1, ..., length-1), optionally rescaled to ``norm`` and zero-padded."""
    v = [float(k) for k in range(length)]
    if norm is not None:
        s = math.sqrt(sum(x * x for x in v))
        v = [x / s * norm for x in v]
    if ambient is not None:
        v += [0.0] * (ambient - length)
    return tuple(v)


def _mab(name, means, scalings, horizon, kind=EnvKind.GAUSSIAN_MAB, std=1.0, scale=1.0):
    env = EnvironmentSpec(kind, means=means, reward_std=std, reward_scale=scale)
    return ExperimentConfig(
        name=name,
        environment=env,
        base_learners=tuple(make_base("UCB", c=c, delta=0.1) for c in scalings),
        meta=make_meta("ED2RB"),
        horizon=horizon,
    )


def _linear(name, theta, action_set, horizon, scalings=CONF_SCALINGS, dims=None,
            cube_scale=None):
    kind = EnvKind.CONTEXTUAL if action_set is ActionSet.SAMPLED_CONTEXT else EnvKind.LINEAR
    env = EnvironmentSpec(kind, theta_star=theta, reward_std=1.0, action_set=action_set,
                          hypercube_scale=cube_scale, context_size=10)
    if dims is None:
        bases = tuple(make_base("LinTS", c=c, lam=1.0) for c in scalings)
    else:
        bases = tuple(make_base("LinTS", c=scalings[0], dim=d, lam=1.0) for d in dims)
    return ExperimentConfig(
        name=name, environment=env, base_learners=bases, meta=make_meta("ED2RB"), horizon=horizon
    )


SPHERE = ActionSet.UNIT_SPHERE
CUBE = ActionSet.HYPERCUBE
CONTEXT = ActionSet.SAMPLED_CONTEXT
MAB_MEANS = (0.5, 1.0, 0.2, 0.1, 0.6)

_BUILDERS: Dict[str, Callable[[], ExperimentConfig]] = {
    "exp1": lambda: _mab("exp1", MAB_MEANS, [0.0] * 10, 20000),
    "exp2": lambda: _mab("exp2", MAB_MEANS, [0.0, 4.0, 6.0, 20.0], 10000),
    "exp3": lambda: _linear("exp3", ramp(10, 5.0), SPHERE, 1000),
    "exp4": lambda: _linear("exp4", ramp(10), CONTEXT, 1000),
    "exp5": lambda: _linear("exp5", ramp(5, ambient=15), SPHERE, 1000,
                            scalings=(2.0,), dims=(2, 5, 10, 15)),
    "exp6": lambda: _linear("exp6", ramp(5, 1.0, ambient=15), CONTEXT, 20000,
                            scalings=(2.0,), dims=(2, 5, 10, 15)),
    "expA": lambda: _mab("expA", (0.1, 0.2, 0.5, 0.8),
                         [0.0, 0.08, 0.16, 0.64, 1.24, 2.5, 5.0, 10.0, 25.0], LONG_HORIZON,
                         kind=EnvKind.BERNOULLI_MAB),
    "expB": lambda: _mab("expB", (0.1, 0.2), [1.0] * 10, LONG_HORIZON,
                         kind=EnvKind.BERNOULLI_MAB, scale=30.0),
    "expC": lambda: _linear("expC", ramp(5, 5.0), CUBE, LONG_HORIZON, cube_scale=1.0),
    "expD": lambda: _linear("expD", ramp(10, 5.0), CUBE, LONG_HORIZON),
    "expE": lambda: _linear("expE", ramp(100, 5.0), CUBE, LONG_HORIZON),
    "expF": lambda: _linear("expF", ramp(5, 5.0), SPHERE, LONG_HORIZON),
    "expG": lambda: _linear("expG", ramp(100, 5.0), SPHERE, LONG_HORIZON),
    "expH": lambda: _linear("expH", ramp(5, 5.0), CONTEXT, LONG_HORIZON),
    "expI": lambda: _linear("expI", ramp(100, 5.0), CONTEXT, LONG_HORIZON),
    "expJ": lambda: _linear("expJ", ramp(30, 5.0, ambient=100), SPHERE, LONG_HORIZON,
                            scalings=(2.0,), dims=(10, 30, 50, 100)),
    "expK": lambda: _linear("expK", ramp(5, ambient=15), CUBE, LONG_HORIZON,
                            scalings=(2.0,), dims=(2, 5, 10, 15)),
    "expL": lambda: _linear("expL", ramp(30, 5.0, ambient=100), CUBE, LONG_HORIZON,
                            scalings=(2.0,), dims=(10, 30, 50, 100)),
    "fig1": lambda: _mab("fig1", (1.0, 0.6, 0.5, 0.2, 0.1), [3.0, 4.0], 10000, std=6.0),
}

PRESETS: Sequence[str] = tuple(_BUILDERS)

DESCRIPTIONS = {
    "exp1": "Gaussian MAB, self selection over 10 greedy UCB learners",
    "exp2": "Gaussian MAB, UCB confidence scalings {0, 4, 6, 20}",
    "exp3": "linear bandit on the 10-d sphere, LinTS scalings",
    "exp4": "contextual linear bandit, 10 sampled actions in 10-d, LinTS scalings",
    "exp5": "nested linear bandit on the sphere, LinTS dims {2, 5, 10, 15}",
    "exp6": "nested contextual linear bandit, LinTS dims {2, 5, 10, 15}",
    "expA": "Bernoulli MAB, 9 UCB confidence scalings",
    "expB": "two-armed 30x Bernoulli bandit, self selection over 10 UCB learners",
    "expC": "linear bandit on {-1, 1}^5, LinTS scalings",
    "expD": "linear bandit on the 10-d hypercube, LinTS scalings",
    "expE": "linear bandit on the 100-d hypercube, LinTS scalings",
    "expF": "linear bandit on the 5-d sphere, LinTS scalings",
    "expG": "linear bandit on the 100-d sphere, LinTS scalings",
    "expH": "contextual linear bandit in 5-d, LinTS scalings",
    "expI": "contextual linear bandit in 100-d, LinTS scalings",
    "expJ": "nested linear bandit on the 100-d sphere, LinTS dims {10, 30, 50, 100}",
    "expK": "nested linear bandit on the 15-d hypercube, LinTS dims {2, 5, 10, 15}",
    "expL": "nested linear bandit on the 100-d hypercube, LinTS dims {10, 30, 50, 100}",
    "fig1": "5-armed Gaussian MAB with std 6, UCB c in {3, 4}",
}


def preset(name: str, long_horizon: bool = False) -> ExperimentConfig:
    if name not in _BUILDERS:
        raise ConfigurationError(f"unknown preset {name!r}", "preset")
    cfg = _BUILDERS[name]()
    if long_horizon:
        cfg = replace(cfg, horizon=LONG_HORIZON)
    return cfg.validate()
