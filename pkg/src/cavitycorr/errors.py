"""Exception types raised by the simulation pipeline."""


class CavityCorrError(Exception):
    """Base class for all package errors."""


class GridMismatchError(CavityCorrError, ValueError):
    pass


class QuadratureError(CavityCorrError, ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


class StepRejectedError(CavityCorrError, ArithmeticError):
    def __init__(self, step, value, bound):
        super().__init__(
            f"step {step}: |u| = {value:.6g} exceeds {bound:.6g}; "
            "time step too large or kernel unphysical"
        )
        self.step = step


class TruncationError(CavityCorrError, ArithmeticError):
    pass


class SingularGeneratorError(CavityCorrError, ArithmeticError):
    """The master-equation generator became too stiff or singular to step.

    ``partial`` carries the trajectory computed up to the failure point.
    """

    def __init__(self, message, time, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial


class ValidityWindowError(CavityCorrError, ValueError):
    pass


class ConfigError(CavityCorrError, ValueError):
    pass
