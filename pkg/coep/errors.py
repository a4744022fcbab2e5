class CoEPError(Exception):
    """Base exception class for co-EP toolkit errors"""
    pass


class InvalidInputError(CoEPError):
    """Raised when an input has non-finite entries or an invalid parameter"""
    pass


class ShapeError(CoEPError):
    """Raised when matrix or subspace shapes do not fit the operation"""
    pass


class SingularityError(CoEPError):
    """Raised when an inverse is requested for a numerically singular matrix"""

    def __init__(self, message: str, margin: float):
        super().__init__(message)
        self.margin = margin


class ContractError(CoEPError):
    """Raised when an input pair breaks the contract of an operation"""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class PreconditionError(CoEPError):
    """Raised when a mathematical hypothesis of an operation is not met"""
    pass


class ConditionPError(PreconditionError):
    """Raised when a perturbation does not obey condition (P)"""

    def __init__(self, message: str, residual: float, contraction: float):
        super().__init__(message)
        self.residual = residual
        self.contraction = contraction


class UnsupportedNormError(CoEPError):
    """Raised when an operation has no implementation for the requested norm"""
    pass


class NumericalError(CoEPError):
    """Raised when a computed result fails its own post-condition"""
    pass


class MatrixFileError(CoEPError):
    """Raised when a matrix file cannot be read or decoded"""
    pass


class FileTooLargeError(MatrixFileError):
    """Raised when the matrix file is too large to process"""
    pass
