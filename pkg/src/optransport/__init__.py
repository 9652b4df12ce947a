"""Exact transport of Rota-Baxter and differential operators along Hurwitz series and mixable shuffles."""

from .algebra import (
    AlgElem,
    FinAlgebra,
    LinearOperator,
    OmegaConstraint,
    is_diff_operator,
    is_rb_operator,
    make_divided_power,
    make_truncated_polynomial,
    omega_holds,
)
from .classify import (
    CounterexampleWitness,
    InternalMismatch,
    NoCounterexampleAtWeight,
    NotApplicable,
    OmegaClass,
    WeightMode,
    classify_omega,
    find_counterexample,
    sweep,
    verify_positive,
)
from .hurwitz import Coextension, HurwitzSeries, coextend, delta_series, h_mul, unit_series
from .laws import CheckReport, check_coextension_rb, check_extension_diff
from .omega_syntax import OmegaParseError, format_omega, parse_omega
from .shuffle import Extension, ShuffleAlgebra, TensorElem, extend, msh_mul

__all__ = [name for name in dir() if not name.startswith("_")]
