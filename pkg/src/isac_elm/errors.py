"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    pass


class ConfigError(ValueError):
    """Raised for malformed or infeasible system configurations."""


class DegenerateInputError(ValueError):
    pass


class RankDeficiencyError(ValueError):
    pass


class DependencyError(RuntimeError):
    """A required upstream artifact (e.g. stage-1 estimates) is missing."""


class NumericError(ArithmeticError):
    pass
