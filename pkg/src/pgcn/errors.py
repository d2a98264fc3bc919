"""Exception taxonomy shared by every pgcn module.

Each error class carries a short machine-readable ``code`` so batch
callers (and the CLI) can report failures on a single line without
parsing prose.
"""


class PgcnError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ShapeError(PgcnError, ValueError):
    """Operands have incompatible dimensions."""

    code = "shape"


class ParameterError(PgcnError, ValueError):
    """An argument is outside its documented domain."""

    code = "parameter"


class DataError(PgcnError, ValueError):
    """Input data violates a structural requirement (bad value, bad join, ...)."""

    code = "data"


class ConfigError(PgcnError, ValueError):
    """An experiment or file-based configuration is invalid."""

    code = "config"


class ConsistencyError(PgcnError, ValueError):
    """Two objects that must agree (cache/params, state/params) do not."""

    code = "consistency"


class DegenerateInputError(PgcnError, ValueError):
    """A statistic is undefined for this input (e.g. zero-variance differences)."""

    code = "degenerate-input"
