"""Exception hierarchy shared by all modules."""


class HardyError(Exception):
    """Base class for every error raised by the package."""


class DomainError(HardyError, ValueError):
    pass


class RegimeError(HardyError, ValueError):
    """Operation not defined for the sign of m carried by the parameters."""


class ParamError(HardyError, ValueError):
    pass


class NonConvergence(HardyError, ArithmeticError):
    pass


class NonFinite(HardyError, ArithmeticError):
    pass


class DivergentTail(HardyError, ArithmeticError):
    pass


class KernelDomainError(HardyError, ValueError):
    pass


class DegenerateError(HardyError, ArithmeticError):
    pass


class NoOracle(HardyError):
    """Family has no closed form; ``bounds`` carries the sandwich interval instead."""

    def __init__(self, message, bounds=None):
        super().__init__(message)
        self.bounds = bounds


class MembershipError(HardyError, ValueError):
    pass


class GenerationFailure(HardyError, RuntimeError):
    pass


class Inconsistent(HardyError, ValueError):
    pass


class ConfigError(HardyError, ValueError):
    pass
