"""Certified conversion and verification of explicit prime-counting bounds.

The library converts explicit error bounds for psi(x), theta(x) and pi(x)
between each other, in asymptotic and step-table form, with every number
carried through directed-rounding arithmetic so the emitted bounds remain
certified upper bounds.
"""

from .errors import (
    AboveLimit,
    BelowTable,
    BranchMisuse,
    DomainError,
    EmptyTable,
    HypothesisViolated,
    OrderError,
    ParseError,
    PartitionNotCovered,
    PntBoundsError,
    PrecisionExhausted,
)
from .xreal import (
    DOWN,
    EXACT,
    UP,
    Enclosure,
    XReal,
    format_decimal,
    get_precision,
    set_precision,
    working_precision,
    xr_arith,
)
from .special import dawson, exp_integral, j_integral, li2, li_from_log, li_moderate

__all__ = [
    "AboveLimit", "BelowTable", "BranchMisuse", "DomainError", "EmptyTable",
    "HypothesisViolated", "OrderError", "ParseError", "PartitionNotCovered",
    "PntBoundsError", "PrecisionExhausted",
    "DOWN", "EXACT", "UP", "Enclosure", "XReal", "format_decimal",
    "get_precision", "set_precision", "working_precision", "xr_arith",
    "dawson", "exp_integral", "j_integral", "li2", "li_from_log", "li_moderate",
]

__version__ = "0.1.0"
