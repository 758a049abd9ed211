"""Data-driven regret balancing for bandit model selection."""

from .base import LinTsLearner, UcbLearner
from .baselines import CorralState, Exp3State, GreedyMeta, RbGridState, SingleBase, UcbMeta
from .env import ActionSet, Environment, EnvironmentSpec, EnvKind, instantiate_env
from .errors import ConfigurationError, ContractViolation, NumericError
from .meta import BalancingState, Variant
from .metrics import RegretTrace, comparator_quantities, summarize

__version__ = "0.1.0"

__all__ = [
    "ActionSet",
    "BalancingState",
    "ConfigurationError",
    "ContractViolation",
    "CorralState",
    "Environment",
    "EnvironmentSpec",
    "EnvKind",
    "Exp3State",
    "GreedyMeta",
    "LinTsLearner",
    "NumericError",
    "RbGridState",
    "RegretTrace",
    "SingleBase",
    "UcbLearner",
    "UcbMeta",
    "Variant",
    "comparator_quantities",
    "instantiate_env",
    "summarize",
]
