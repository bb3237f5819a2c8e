"""Exception types raised by the audit engine."""


class AuditError(Exception):
    """Base class for all engine errors."""


class SchemaError(AuditError):
    """Schema is malformed or does not match the data file."""


class ParseError(AuditError):
    """A cell could not be parsed; carries the offending row index."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDatasetError(AuditError):
    """File contained a header but no data rows (or no file content at all)."""


class SplitError(AuditError):
    """A train/test split would leave one side empty."""


class DegenerateLabelsError(AuditError):
    """Classification labels contain a single class."""


class SingularSystemError(AuditError):
    """Normal equations are singular and no ridge term was supplied."""


class DimensionMismatchError(AuditError):
    """Matrix/vector shapes do not line up with the model or dataset."""


class AlignmentError(AuditError):
    """An importance file does not align with its dataset (rows or header)."""


class EmptyGroupError(AuditError):
    """Subgroup has zero total membership; averaged disparity is undefined."""


class NonFiniteObjectiveError(AuditError):
    """Optimization produced a non-finite objective; carries the trace so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []
