"""Exception types shared across the package."""


class EvsikitError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(EvsikitError):
    """A file or config document does not match the expected schema."""


class CsvParseError(EvsikitError):
    """A data cell could not be parsed; message names the row and column."""


class ValidationError(EvsikitError):
    """A config document is schema-valid but internally inconsistent."""


class InsufficientDataError(EvsikitError):
    """Fewer data rows than the operation requires."""


class DomainError(EvsikitError):
    """A numeric argument lies outside its mathematical domain."""


class ShapeError(EvsikitError):
    """Array dimensions do not line up."""


class DegeneratePredictorError(EvsikitError):
    """A regression predictor is constant and spans no basis."""


class UnderdeterminedFitError(EvsikitError):
    """Too few rows to identify the regression coefficients."""


class SingularFitError(EvsikitError):
    """The regression design is rank-deficient beyond ridge repair."""


class UnsupportedFamilyError(EvsikitError):
    """The likelihood family is not supported by this operation."""


class NumericInstabilityError(EvsikitError):
    """A numeric routine produced a non-finite or out-of-domain result."""
