"""Shared exception types for the valuation pipeline."""


class SchemaError(ValueError):
    """An input file does not conform to its documented column schema."""


class ParseError(ValueError):
    """A row of an input file could not be parsed; message names row/column."""


class InvariantError(ValueError):
    """A parsed value violates a domain invariant; message names the row."""


class CollinearityError(ValueError):
    """A design matrix is rank deficient; message names the dependent columns."""


class DependencyError(RuntimeError):
    """A pipeline stage was invoked before the stage(s) it depends on."""
