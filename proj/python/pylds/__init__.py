"""Python access to the lds simulation core and its result tables."""

from ._pylds import (
    ConvergenceError,
    NumericalError,
    ValidationError,
    __version__,
    config_keys,
    eigh,
    filter_frequency,
    fixed_point,
    format_number,
    hamiltonian,
    kms_residuals,
    resolved_config,
    run,
    thermal_populations,
)
from .tables import FIGURE_KINDS, SchemaError, Table, read_table, validate_table

__all__ = [
    "ConvergenceError",
    "NumericalError",
    "ValidationError",
    "__version__",
    "config_keys",
    "eigh",
    "filter_frequency",
    "fixed_point",
    "format_number",
    "hamiltonian",
    "kms_residuals",
    "resolved_config",
    "run",
    "thermal_populations",
    "FIGURE_KINDS",
    "SchemaError",
    "Table",
    "read_table",
    "validate_table",
]
