"""Experiment configuration: schema, defaults and YAML loading."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

import yaml

from ..baselines import DEFAULT_GRID
from ..env import ActionSet, EnvironmentSpec
from ..errors import ConfigurationError

# Fields accepted per meta kind, with defaults.  ``None`` means "derived from
# the horizon" when the config is resolved.
_META_FIELDS: Dict[str, Dict[str, Any]] = {
    "D3RB": {"c": 1.0, "delta": 0.05, "d_min": 1.0},
    "ED2RB": {"c": 1.0, "delta": 0.05, "d_min": 1.0},
    "Corral": {"eta": None, "eta_scale": 1.0, "loss_mode": "reward"},
    "EXP3": {"eta": None, "gamma": None, "gamma_scale": 0.1},
    "UCB": {"c": 1.0, "delta": 0.1},
    "Greedy": {},
    "RBGrid": {"grid": list(DEFAULT_GRID), "c": 1.0, "delta": 0.05},
    "SingleBase": {"index": 0},
}

# Named variants accepted wherever a meta kind is.
META_ALIASES: Dict[str, tuple] = {
    "CorralLow": ("Corral", {"eta_scale": 0.1}),
    "CorralHigh": ("Corral", {"eta_scale": 10.0}),
    "EXP3Low": ("EXP3", {"gamma_scale": 0.0}),
    "EXP3High": ("EXP3", {"gamma_scale": 1.0}),
}

_BASE_FIELDS: Dict[str, Dict[str, Any]] = {
    "UCB": {"c": 1.0, "delta": 0.1},
    "LinTS": {"c": 1.0, "dim": None, "lam": 1.0},
}

_ENV_FIELDS = {
    "kind", "means", "reward_std", "reward_scale", "theta_star", "action_set",
    "hypercube_scale", "context_size",
}
_TOP_FIELDS = {
    "name", "environment", "base_learners", "meta", "horizon", "repetitions",
    "seed", "checkpoint_stride",
}

SEED_DERIVATION = (
    "numpy SeedSequence(entropy=seed, spawn_key=(rep_index, role)); "
    "role 0 = environment, 1 = meta-learner, 2 + i = base learner i"
)


@dataclass(frozen=True)
class BaseLearnerSpec:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def get(self, key):
        return self.params[key]


@dataclass(frozen=True)
class MetaSpec:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def resolved(self, horizon: int, num_learners: int) -> Dict[str, Any]:
        """Parameters with horizon-dependent defaults filled in."""
        p = dict(self.params)
        if self.kind == "Corral" and p.get("eta") is None:
            p["eta"] = p["eta_scale"] / math.sqrt(horizon)
        if self.kind == "EXP3":
            if p.get("eta") is None:
                m = num_learners
                p["eta"] = math.sqrt(math.log(m) / (m * horizon))
            if p.get("gamma") is None:
                p["gamma"] = p["gamma_scale"] / math.sqrt(horizon)
        return p

    @property
    def label(self) -> str:
        if self.kind == "SingleBase":
            return f"SingleBase:{self.params['index']}"
        for alias, (kind, extra) in META_ALIASES.items():
            if kind == self.kind and all(self.params.get(k) == v for k, v in extra.items()):
                return alias
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    environment: EnvironmentSpec
    base_learners: tuple
    meta: MetaSpec
    horizon: int
    repetitions: int = 100
    seed: int = 0
    checkpoint_stride: Optional[int] = None

    @property
    def stride(self) -> int:
        return self.checkpoint_stride or max(1, self.horizon // 100)

    def with_meta(self, meta) -> "ExperimentConfig":
        if isinstance(meta, str):
            meta = parse_meta(meta)
        return replace(self, meta=meta)

    def validate(self) -> "ExperimentConfig":
        if self.horizon < 1:
            raise ConfigurationError("must be >= 1", "horizon")
        if self.repetitions < 1:
            raise ConfigurationError("must be >= 1", "repetitions")
        if not self.base_learners:
            raise ConfigurationError("at least one base learner required", "base_learners")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ConfigurationError("must be >= 1", "checkpoint_stride")
        self.environment.validate()
        env = self.environment
        for k, b in enumerate(self.base_learners):
            path = f"base_learners[{k}]"
            if b.kind == "UCB":
                if not env.is_mab:
                    raise ConfigurationError("UCB needs a multi-armed environment", path)
                if not 0 < b.params["delta"] < 1:
                    raise ConfigurationError("delta must lie in (0, 1)", path + ".delta")
            else:
                if env.is_mab:
                    raise ConfigurationError("LinTS needs a linear environment", path)
                dim = b.params["dim"]
                if dim is not None and not 1 <= dim <= env.dim:
                    raise ConfigurationError(
                        f"dimension {dim} exceeds ambient dimension {env.dim}", path + ".dim"
                    )
                if b.params["lam"] <= 0:
                    raise ConfigurationError("must be > 0", path + ".lam")
            if b.params["c"] < 0:
                raise ConfigurationError("must be >= 0", path + ".c")
        m = self.meta
        if m.kind in ("D3RB", "ED2RB", "RBGrid", "UCB"):
            if not 0 < m.params["delta"] < 1:
                raise ConfigurationError("must lie in (0, 1)", "meta.delta")
        if m.kind in ("D3RB", "ED2RB"):
            if m.params["d_min"] < 1:
                raise ConfigurationError("must be >= 1", "meta.d_min")
            if m.params["c"] <= 0:
                raise ConfigurationError("must be > 0", "meta.c")
        if m.kind == "SingleBase" and not 0 <= m.params["index"] < len(self.base_learners):
            raise ConfigurationError("index out of range", "meta.index")
        if m.kind == "RBGrid":
            grid = m.params["grid"]
            if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigurationError("grid must be non-empty and strictly increasing", "meta.grid")
        if m.kind == "Corral" and m.params["loss_mode"] not in ("reward", "one_minus"):
            raise ConfigurationError("must be 'reward' or 'one_minus'", "meta.loss_mode")
        return self

    def to_dict(self) -> Dict[str, Any]:
        env = self.environment
        env_d = {
            "kind": env.kind.value,
            "means": list(env.means),
            "reward_std": env.reward_std,
            "reward_scale": env.reward_scale,
            "theta_star": list(env.theta_star),
            "action_set": env.action_set.value if env.action_set else None,
            "hypercube_scale": env.cube_scale if env.action_set is ActionSet.HYPERCUBE else None,
            "context_size": env.context_size,
        }
        meta = self.meta.resolved(self.horizon, len(self.base_learners))
        return {
            "name": self.name,
            "environment": env_d,
            "base_learners": [{"kind": b.kind, **b.params} for b in self.base_learners],
            "meta": {"kind": self.meta.kind, **meta},
            "horizon": self.horizon,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "checkpoint_stride": self.stride,
        }


# -- parsing ---------------------------------------------------------------------

def _check_keys(d: Dict[str, Any], allowed, path: str) -> None:
    if not isinstance(d, dict):
        raise ConfigurationError("expected a mapping", path or "<root>")
    for key in d:
        if key not in allowed:
            raise ConfigurationError("unknown key", f"{path}.{key}" if path else key)


def _fill(kind: str, given: Dict[str, Any], table, path: str) -> Dict[str, Any]:
    if kind not in table:
        raise ConfigurationError(f"unknown kind {kind!r}", path + ".kind")
    defaults = table[kind]
    _check_keys({k: v for k, v in given.items() if k != "kind"}, defaults, path)
    out = {k: (list(v) if isinstance(v, list) else v) for k, v in defaults.items()}
    out.update({k: v for k, v in given.items() if k != "kind"})
    return out


def make_meta(kind: str, **params) -> MetaSpec:
    if kind in META_ALIASES:
        base, extra = META_ALIASES[kind]
        kind, params = base, {**extra, **params}
    return MetaSpec(kind, _fill(kind, params, _META_FIELDS, "meta"))


def parse_meta(text: str) -> MetaSpec:
    """``ED2RB``, ``CorralHigh``, ``SingleBase:2`` and so on."""
    name, _, arg = text.partition(":")
    if name == "SingleBase":
        try:
            return make_meta("SingleBase", index=int(arg or 0))
        except ValueError:
            raise ConfigurationError(f"bad learner index {arg!r}", "meta.index") from None
    if arg:
        raise ConfigurationError(f"unexpected argument in {text!r}", "meta")
    return make_meta(name)


def make_base(kind: str, **params) -> BaseLearnerSpec:
    return BaseLearnerSpec(kind, _fill(kind, params, _BASE_FIELDS, "base_learner"))


def config_from_dict(d: Dict[str, Any]) -> ExperimentConfig:
    _check_keys(d, _TOP_FIELDS, "")
    for key in ("environment", "base_learners", "meta", "horizon"):
        if key not in d:
            raise ConfigurationError("missing required key", key)
    env_d = d["environment"]
    _check_keys(env_d, _ENV_FIELDS, "environment")
    if "kind" not in env_d:
        raise ConfigurationError("missing required key", "environment.kind")
    try:
        env = EnvironmentSpec(**env_d)
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc), "environment") from None
    if not isinstance(d["base_learners"], list):
        raise ConfigurationError("expected a list", "base_learners")
    bases = []
    for k, b in enumerate(d["base_learners"]):
        path = f"base_learners[{k}]"
        if not isinstance(b, dict):
            raise ConfigurationError("expected a mapping", path)
        _check_keys(b, set(_BASE_FIELDS.get(b.get("kind"), {})) | {"kind"}, path)
        kind = b.get("kind")
        bases.append(BaseLearnerSpec(kind, _fill(kind, b, _BASE_FIELDS, path)))
    meta_d = d["meta"]
    if isinstance(meta_d, str):
        meta = parse_meta(meta_d)
    else:
        _check_keys(meta_d, set().union(*_META_FIELDS.values()) | {"kind"}, "meta")
        kind = meta_d.get("kind")
        if kind in META_ALIASES:
            base, extra = META_ALIASES[kind]
            meta_d = {**extra, **meta_d, "kind": base}
            kind = base
        meta = MetaSpec(kind, _fill(kind, meta_d, _META_FIELDS, "meta"))
    for key in ("horizon", "repetitions", "seed", "checkpoint_stride"):
        if key in d and d[key] is not None and not isinstance(d[key], int):
            raise ConfigurationError("expected an integer", key)
    cfg = ExperimentConfig(
        name=str(d.get("name", "custom")),
        environment=env,
        base_learners=tuple(bases),
        meta=meta,
        horizon=d["horizon"],
        repetitions=d.get("repetitions", 100),
        seed=d.get("seed", 0),
        checkpoint_stride=d.get("checkpoint_stride"),
    )
    return cfg.validate()


def parse_config(source: str) -> ExperimentConfig:
    """Load a preset by name or a YAML config file by path."""
    from .presets import PRESETS, preset

    if source in PRESETS:
        return preset(source)
    if not os.path.exists(source):
        raise ConfigurationError(
            f"no preset or file named {source!r} (presets: {', '.join(PRESETS)})"
        )
    try:
        with open(source, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed config file: {exc}") from None
    return config_from_dict(data)
