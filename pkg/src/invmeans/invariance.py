"""Iteration of mean-type mappings towards the diagonal.

Under the contraction hypothesis ``max M(x) - min M(x) < max x - min x`` the
iterates ``M^n(x)`` collapse onto ``(K(x), ..., K(x))`` where ``K`` is the
unique M-invariant mean.  The engine does not certify the hypothesis; it
iterates and reports what happened.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ArityMismatch, DomainViolation, NotConverged
from .means import Mean, MeanVector, SampleConfig, _as_vector, eval_mean, evaluate_mapping, sample_vectors

DEFAULT_TOL = 1e-13


@dataclass(frozen=True)
class IterationConfig:
    tol: float = DEFAULT_TOL
    max_iter: int = 10_000
    keep_trace: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class IterationReport:
    limit: float
    final: tuple[float, ...]
    iterations: int
    converged: bool
    diameter: float
    trace: list[tuple[float, ...]] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "limit": self.limit,
            "final": list(self.final),
            "iterations": self.iterations,
            "converged": self.converged,
            "diameter": self.diameter,
        }
        if self.trace is not None:
            out["trace"] = [list(row) for row in self.trace]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        rows = self.trace if self.trace is not None else [self.final]
        w.writerow(["n"] + [f"x{i + 1}" for i in range(len(rows[0]))])
        for n, row in enumerate(rows):
            w.writerow([n] + [repr(v) for v in row])
        return buf.getvalue()


def _scale(x: Sequence[float]) -> float:
    return max(1.0, max(abs(v) for v in x))


def _limit(x: Sequence[float]) -> float:
    # midpoint of the final box, clamped into it
    lo, hi = min(x), max(x)
    return min(max(lo + (hi - lo) / 2, lo), hi)


def iterate_mapping(M: MeanVector, x: Sequence[float], cfg: IterationConfig = IterationConfig()) -> IterationReport:
    """Synchronous iteration ``x <- M(x)`` until the relative diameter drops below ``cfg.tol``.

    Raises NotConverged (with the report attached) when the budget runs out or
    the iterates stall at an off-diagonal fixed point.
    """
    cur = _as_vector(x)
    if len(cur) != M.p:
        raise ArityMismatch(f"mapping has p={M.p}, got a vector of length {len(cur)}")
    if M.needs_positive and min(cur) <= 0:
        raise DomainViolation(f"mapping needs positive inputs, got {cur}")
    trace = [cur] if cfg.keep_trace else None
    lo0, hi0 = min(cur), max(cur)
    n = 0
    while True:
        diam = max(cur) - min(cur)
        if diam <= cfg.tol * _scale(cur):
            limit = min(max(_limit(cur), lo0), hi0)
            return IterationReport(limit, cur, n, True, diam, trace)
        if n >= cfg.max_iter:
            break
        nxt = evaluate_mapping(M, cur)
        n += 1
        if trace is not None:
            trace.append(nxt)
        if nxt == cur:
            break
        cur = nxt
    diam = max(cur) - min(cur)
    report = IterationReport(min(max(_limit(cur), lo0), hi0), cur, n, False, diam, trace)
    raise NotConverged(f"iterates did not reach the diagonal after {n} steps (diameter {diam:g})", report)


def invariant_mean_value(M: MeanVector, x: Sequence[float], cfg: IterationConfig = IterationConfig()) -> float:
    return iterate_mapping(M, x, cfg).limit


@dataclass(frozen=True)
class InvarianceReport:
    residual: float
    witness: tuple[float, ...] | None

    def to_json(self) -> dict:
        return {"residual": self.residual, "witness": None if self.witness is None else list(self.witness)}


def invariance_residual(K: Mean, M: MeanVector, x: Sequence[float]) -> float:
    k = eval_mean(K, x)
    return abs(eval_mean(K, evaluate_mapping(M, x)) - k) / max(1.0, abs(k))


def check_invariance(K: Mean, M: MeanVector, cfg: SampleConfig, points=None) -> InvarianceReport:
    """Max over samples of ``|K(M(x)) - K(x)| / max(1, |K(x)|)``."""
    K.check_arity(M.p)
    if points is None:
        points = sample_vectors(cfg, M.p)
    worst, witness = 0.0, None
    for row in points:
        x = tuple(float(v) for v in row)
        r = invariance_residual(K, M, x)
        if r > worst or (math.isnan(r) and witness is None):
            worst, witness = r, x
    return InvarianceReport(worst, witness)
