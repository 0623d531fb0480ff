"""Exception types raised across the package."""


class FaceredError(Exception):
    """Base class for all package errors."""


class NonSymmetricInput(FaceredError, ValueError):
    """A matrix that must be symmetric is not."""


class BadPackedLength(FaceredError, ValueError):
    """A packed vector length is not a triangular number."""


class DimensionMismatch(FaceredError, ValueError):
    """Operands have incompatible shapes."""


class InvalidProblem(FaceredError, ValueError):
    """A conic problem failed validation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class ParseError(FaceredError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateEntry(ParseError):
    """The same matrix entry was given twice."""


class SchemaError(FaceredError, ValueError):
    """A JSON document does not follow the expected schema."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnsupportedCone(FaceredError, ValueError):
    """The operation cannot handle a cone kind present in the problem."""


class UnsupportedApproximation(FaceredError, ValueError):
    """The approximation family cannot be used for certificate search."""


class GeneratorLimitExceeded(FaceredError, ValueError):
    """Materializing generators would exceed the configured cap."""


class NotPSD(FaceredError, ValueError):
    """A matrix expected to be positive semidefinite is not."""


class NotPSDDirection(NotPSD):
    """A line-search direction is not positive semidefinite."""


class RankDeficient(FaceredError, ValueError):
    """Columns expected to be independent are not."""


class ConvergenceFailure(FaceredError, ArithmeticError):
    """An iterative numerical routine did not converge."""


class NumericalFailure(FaceredError, ArithmeticError):
    """A computed result failed its own consistency checks."""


class AssemblyFailed(FaceredError, ArithmeticError):
    """Extended-dual assembly hit a failed range condition."""


class BadParams(FaceredError, ValueError):
    """Invalid generator parameters."""


class InvalidArchive(FaceredError, ValueError):
    """A face-chain archive does not replay against its problem."""
