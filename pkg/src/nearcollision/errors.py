"""Exception hierarchy shared by all pipeline stages."""


class NearCollisionError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(NearCollisionError, ValueError):
    """An operation was called with arguments outside its domain."""


class PrecisionError(NearCollisionError, ArithmeticError):
    """A numerical routine could not reach the requested accuracy."""


class ExceptionalPointError(NearCollisionError):
    """A birational map was evaluated where its denominator vanishes."""


class DivergenceError(NearCollisionError):
    """The bound inequality never failed below the iteration cap."""


class ReductionStall(NearCollisionError):
    """De Weger reduction kept failing the |b0| test."""


class ConfigError(NearCollisionError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
