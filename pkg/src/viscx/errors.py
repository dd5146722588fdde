"""Exception hierarchy shared across the package.

Everything raised on bad data derives from ViscxError so the CLI can map
data problems to a single exit code.
"""


class ViscxError(Exception):
    """Base class for all viscx data and pipeline errors."""


class TaxonomyError(ViscxError):
    """Malformed taxonomy input: cycles, dangling parents, duplicate ids."""


class UnknownConceptError(ViscxError):
    """A concept id does not resolve in the lattice or membership table."""


class UnrelatedConceptsError(ViscxError):
    """A chain-length query was made for concepts with no is_a chain."""


class VisParseError(ViscxError):
    """Syntax or validation error in a VIS document, with source location."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigError(ViscxError):
    """Invalid pipeline configuration file or value."""


class StoreError(ViscxError):
    """Unreadable or inconsistent index store file."""


class UnindexableQueryError(ViscxError):
    """The query text contains no vocabulary concept to search with."""
