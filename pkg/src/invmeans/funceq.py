"""Invariant-type functional equations ``F o M = F``.

Solutions continuous on the diagonal are exactly ``F = phi o K`` with ``K``
the M-invariant mean and ``phi`` any continuous function of one variable.
This module builds such ``F``, recovers ``phi`` from the diagonal, and checks
candidate solutions against ``F o M = F`` and the system
``F o K_S(M) = F`` over all nonempty ``S``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .complementary import ComplementSpec, all_subsets, build_KS_mapping, subset_mask
from .errors import DomainViolation
from .means import Mean, MeanVector, SampleConfig, eval_mean, evaluate_mapping, sample_vectors


# --------------------------------------------------------------------------
# scalar functions


@dataclass(frozen=True)
class ScalarFunc:
    kind = ""

    def __call__(self, t: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(ScalarFunc):
    kind = "identity"

    def __call__(self, t):
        return t


@dataclass(frozen=True)
class Log(ScalarFunc):
    kind = "log"

    def __call__(self, t):
        if t <= 0:
            raise DomainViolation(f"log needs a positive argument, got {t}")
        return math.log(t)


@dataclass(frozen=True)
class Exp(ScalarFunc):
    kind = "exp"

    def __call__(self, t):
        return math.exp(t)


@dataclass(frozen=True)
class PowerFn(ScalarFunc):
    r: float = 1.0
    kind = "power"

    def __call__(self, t):
        return t**self.r


@dataclass(frozen=True)
class Affine(ScalarFunc):
    """``t -> a * t + b``."""

    a: float = 1.0
    b: float = 0.0
    kind = "affine"

    def __call__(self, t):
        return self.a * t + self.b


@dataclass(frozen=True)
class Compose(ScalarFunc):
    """Applies ``funcs`` left to right."""

    funcs: tuple[ScalarFunc, ...] = ()
    kind = "compose"

    def __call__(self, t):
        for f in self.funcs:
            t = f(t)
        return t


def func_to_spec(f: ScalarFunc) -> dict:
    if isinstance(f, PowerFn):
        return {"kind": "power", "r": f.r}
    if isinstance(f, Affine):
        return {"kind": "affine", "a": f.a, "b": f.b}
    if isinstance(f, Compose):
        return {"kind": "compose", "funcs": [func_to_spec(g) for g in f.funcs]}
    return {"kind": f.kind}


def func_from_spec(obj: dict) -> ScalarFunc:
    kind = obj.get("kind")
    if kind == "identity":
        return Identity()
    if kind == "log":
        return Log()
    if kind == "exp":
        return Exp()
    if kind == "power":
        return PowerFn(float(obj["r"]))
    if kind == "affine":
        return Affine(float(obj.get("a", 1.0)), float(obj.get("b", 0.0)))
    if kind == "compose":
        return Compose(tuple(func_from_spec(g) for g in obj["funcs"]))
    raise ValueError(f"unknown scalar function kind {kind!r}")


# --------------------------------------------------------------------------
# invariant functions


@dataclass(frozen=True)
class InvariantFunction:
    """``F(x) = phi(K(x))``."""

    phi: ScalarFunc
    K: Mean

    def __call__(self, x: Sequence[float]) -> float:
        return self.phi(eval_mean(self.K, x))


def build_F(phi: ScalarFunc, K: Mean) -> InvariantFunction:
    return InvariantFunction(phi, K)


@dataclass(frozen=True)
class DiagonalRestriction:
    """``t -> F(t, ..., t)``, evaluated exactly or through a monotone table."""

    F: Callable[[Sequence[float]], float]
    p: int

    def __call__(self, t: float) -> float:
        if not math.isfinite(t) or t <= 0:
            raise DomainViolation(f"diagonal restriction lives on (0, inf), got {t}")
        return float(self.F((t,) * self.p))

    def tabulate(self, lo: float, hi: float, n: int = 64) -> PchipInterpolator:
        """Shape-preserving interpolant of the diagonal on a log-spaced grid."""
        grid = np.geomspace(lo, hi, n)
        return PchipInterpolator(grid, [self(t) for t in grid])


def extract_phi(F: Callable[[Sequence[float]], float], p: int) -> DiagonalRestriction:
    return DiagonalRestriction(F, p)


# --------------------------------------------------------------------------
# verification


@dataclass
class SolutionReport:
    eq2_residual: float
    eq2_witness: tuple[float, ...] | None
    eq3_residuals: dict[int, float]
    eq3_witnesses: dict[int, tuple[float, ...] | None] = field(repr=False)
    representation_residual: float = 0.0
    representation_witness: tuple[float, ...] | None = None
    homogeneous: bool = True

    @property
    def max_eq3(self) -> float:
        return max(self.eq3_residuals.values(), default=0.0)

    def is_solution(self, tol: float = 1e-10) -> bool:
        return self.eq2_residual < tol and self.max_eq3 < tol and self.representation_residual < tol

    def to_json(self) -> dict:
        w = self.eq2_witness
        return {
            "eq2_residual": self.eq2_residual,
            "eq2_witness": None if w is None else list(w),
            "eq3_residuals": {str(k): v for k, v in sorted(self.eq3_residuals.items())},
            "representation_residual": self.representation_residual,
            "homogeneous": self.homogeneous,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def looks_homogeneous(M: MeanVector, points, factors=(0.5, 2.0, 10.0), rel=1e-9) -> bool:
    for x in points[:8]:
        base = evaluate_mapping(M, x)
        for t in factors:
            scaled = evaluate_mapping(M, [t * v for v in x])
            if any(_rel(s, t * b) > rel for s, b in zip(scaled, base)):
                return False
    return True


def verify_solution(
    F: Callable[[Sequence[float]], float],
    M: MeanVector,
    K: Mean,
    cfg: SampleConfig = SampleConfig(count=100),
    points: Sequence[Sequence[float]] | None = None,
) -> SolutionReport:
    """Residuals of ``F o M = F``, of ``F o K_S(M) = F`` for each nonempty ``S``
    (keyed by subset bitmask), and of ``F = phi o K`` with ``phi`` the diagonal of ``F``.

    All residuals are absolute, ``|lhs - rhs|`` maximized over the points.
    Mappings that are not homogeneous are flagged in the report, not rejected.
    """
    if points is None:
        points = [tuple(row) for row in sample_vectors(cfg, M.p)]
    else:
        points = [tuple(float(v) for v in x) for x in points]
    K.check_arity(M.p)

    def worst(lhs: Callable, rhs: Callable):
        r, w = 0.0, None
        for x in points:
            v = abs(lhs(x) - rhs(x))
            if v > r:
                r, w = v, x
        return r, w

    fx = {x: F(x) for x in points}
    eq2, eq2_w = worst(lambda x: F(evaluate_mapping(M, x)), fx.__getitem__)
    eq3, eq3_w = {}, {}
    for S in all_subsets(M.p):
        KS = build_KS_mapping(ComplementSpec(K, M, S, validate=False))
        r, w = worst(lambda x: F(evaluate_mapping(KS, x)), fx.__getitem__)
        eq3[subset_mask(S)] = r
        eq3_w[subset_mask(S)] = w
    phi = extract_phi(F, M.p)
    rep, rep_w = worst(fx.__getitem__, lambda x: phi(eval_mean(K, x)))
    return SolutionReport(eq2, eq2_w, eq3, eq3_w, rep, rep_w, looks_homogeneous(M, points))
