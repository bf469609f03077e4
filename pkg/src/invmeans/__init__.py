"""Invariant means, complementary averages of means, and the H-family of Beta-type means."""

from .complementary import (
    ComplementSpec,
    build_KS_mapping,
    closure_generate,
    complement_mean,
    complement_value,
    dual_complement,
    solve_completion,
)
from .errors import (
    ArithmeticOverflow,
    ArityMismatch,
    BudgetExceeded,
    ConstantInput,
    DomainViolation,
    EmptySubset,
    MeanError,
    NonInvariantRoot,
    NoSolutionInRange,
    NotConverged,
    NotInvariant,
    SIsFull,
)
from .funceq import build_F, extract_phi, verify_solution
from .invariance import IterationConfig, IterationReport, check_invariance, invariant_mean_value, iterate_mapping
from .means import *  # noqa: F401,F403
from .means import __all__ as _means_all

__all__ = list(_means_all) + [
    "ArithmeticOverflow", "ArityMismatch", "BudgetExceeded", "ComplementSpec", "ConstantInput",
    "DomainViolation", "EmptySubset", "IterationConfig", "IterationReport", "MeanError",
    "NoSolutionInRange", "NonInvariantRoot", "NotConverged", "NotInvariant", "SIsFull",
    "build_F", "build_KS_mapping", "extract_phi", "verify_solution", "check_invariance", "closure_generate", "complement_mean", "complement_value",
    "dual_complement", "invariant_mean_value", "iterate_mapping", "solve_completion",
]
