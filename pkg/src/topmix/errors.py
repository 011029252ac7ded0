"""Exception types raised across the pipeline."""


class TopmixError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TopmixError):
    """A data file row or field could not be parsed."""


class SchemaError(TopmixError):
    """A schema declaration is invalid or data violates it."""


class ContractError(TopmixError):
    """A caller violated a function's preconditions."""


class FitError(TopmixError):
    """A statistic could not be fit (e.g. constant column)."""


class EvaluationError(TopmixError):
    """A split or evaluation run is degenerate."""
