"""Exception hierarchy shared by every module of the package."""


class QuantumError(ValueError):
    """Base class for all validation and numerical errors raised here."""


class DimensionError(QuantumError):
    pass


class HermiticityError(QuantumError):
    pass


class NormalizationError(QuantumError):
    pass


class PositivityError(QuantumError):
    pass


class ParameterError(QuantumError):
    pass


class ConditioningError(QuantumError):
    """Raised when conditioning on an event of (numerically) zero probability."""


class CommutativityError(QuantumError):
    pass


class UnitarityError(QuantumError):
    pass


class UnsupportedError(QuantumError):
    pass


class ReconstructionError(QuantumError):
    """Raised when a probe family is not informationally complete."""
