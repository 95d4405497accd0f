"""Exception hierarchy shared by every module of the package."""


class TowerError(Exception):
    """Base class for all package errors."""


class ComplexError(TowerError):
    pass


class DanglingFace(ComplexError):
    pass


class FaceIdentityViolation(ComplexError):
    pass


class GradingError(ComplexError):
    pass


class DimensionOutOfRange(ComplexError):
    pass


class TargetMismatch(ComplexError):
    pass


class InconsistentGluing(ComplexError):
    pass


class NotAnAction(ComplexError):
    pass


class NotPure(ComplexError):
    pass


class InvalidCellMap(ComplexError):
    pass


class BudgetExceeded(TowerError):
    """Raised when a construction or search would exceed its budget.

    ``partial`` carries whatever was built before the stop, if anything.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotConnected(TowerError):
    pass


class NotACocycle(TowerError):
    pass


class IncompatibleTorsionImage(TowerError):
    pass


class CocycleViolation(TowerError):
    pass


class NotAManifold(TowerError):
    pass


class CursorExhausted(TowerError):
    pass


class IndexOutsideView(TowerError):
    pass


class NoEquivariantIso(TowerError):
    pass


class ConstraintUnsatisfiable(TowerError):
    pass


class StageCheckFailure(TowerError):
    def __init__(self, message, stage=None, report=None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.report = report
        self.witness = witness  # the failing stage record, when available


class MatchingViolation(TowerError):
    pass


class ManifoldCheckFailure(TowerError):
    pass


class NotCompatible(TowerError):
    pass


class ConfigError(TowerError):
    pass
