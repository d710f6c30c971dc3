"""Exact rounding-error analysis for parameterized floating point systems."""

from .errors import (
    ConfigurationError,
    ConstraintError,
    DomainError,
    FperrError,
    ParseError,
    UnsupportedError,
    UsageError,
)
from .exactnum import ExactScalar, exact, format_scalar, parse
from .fpsys import FpSystem, Kind, contains, ieee, mpfr, neighbors, normal_form, parse_system, perfect
from .rounding import Rounder, RoundingTuple, TiePolicy, round_sqrt, scaled, symmetric
from .accumulate import error_summary, fma_dot, fp_dot, fp_sum
from .bounds import BoundKind, BoundReport, evaluate, tightest_applicable

__version__ = "0.1.0"
