"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operands have incompatible shapes."""


class CapacityError(MemoryError):
    """A dense materialization would exceed the configured size guard."""


class ContractError(RuntimeError):
    """A user-supplied callable violated its contract (e.g. changed the shape)."""


class StateError(RuntimeError):
    """An operation was attempted on a bidiagonalization that already broke down."""


class NoSolutionError(ValueError):
    """The discrepancy equation has no positive root (noise exceeds the signal)."""


class NeedsLargerKError(ArithmeticError):
    """The target lies below the attainable limit at this k; more steps are needed."""


class ConvergenceError(ArithmeticError):
    """An iteration hit its cap before meeting its tolerance."""


class SingularityError(ArithmeticError):
    """A matrix that must be nonsingular is (numerically) singular."""


class HypothesisError(ValueError):
    """The hypothesis of a condition-number bound does not hold."""


class FormatError(ValueError):
    """A file does not follow the expected format."""
