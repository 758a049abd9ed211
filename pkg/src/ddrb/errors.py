class ConfigurationError(ValueError):
    """Invalid environment, learner or experiment configuration."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ContractViolation(ValueError):
    """A caller broke an operation's precondition."""


class NumericError(ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""
