"""Mean expressions, their evaluation, and sampled structural checks.

A mean expression is an immutable value describing a p-variable mean.  Most
variants are arity-polymorphic (``Arithmetic()`` works for any p); the arity is
taken from the input vector at evaluation time.  ``GiniF``, ``Complement`` and
``Iterated`` have a fixed arity.

Coordinate indices (``Projection.i``, ``SubsetArithmetic.S``, ``Complement.S``)
are 1-based throughout, both in Python and in the JSON format.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Iterable, Sequence

import numpy as np

from .errors import ArityMismatch, ConstantInput, DomainViolation

REL_TOL = 1e-12
ABS_FLOOR = 1e-300


def close(a: float, b: float, rel: float = REL_TOL) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b)) + ABS_FLOOR


def _clamp(v: float, x) -> float:
    # for genuine means rounding is the only way out of [min x, max x]
    return min(max(v, min(x)), max(x))


# --------------------------------------------------------------------------
# closed-form kernels


def _arithmetic(x):
    return math.fsum(x) / len(x)


def _geometric(x):
    # mantissa/exponent split keeps the product finite for any p
    p = len(x)
    m, e = 1.0, 0
    for v in x:
        fm, fe = math.frexp(v)
        m, de = math.frexp(m * fm)
        e += fe + de
    q, r = divmod(e, p)
    return math.ldexp(math.ldexp(m, r) ** (1.0 / p), q)


def _harmonic(x):
    return len(x) / math.fsum(1.0 / v for v in x)


def _beta(x):
    # (p * x1...xp / (x1+...+xp)) ** (1/(p-1)), product kept as m * 2**e
    p = len(x)
    m, e = 1.0, 0
    for v in x:
        fm, fe = math.frexp(v)
        m, de = math.frexp(m * fm)
        e += fe + de
    ym, ye = math.frexp(p * m / math.fsum(x))
    q, r = divmod(e + ye, p - 1)
    return math.ldexp(math.ldexp(ym, r) ** (1.0 / (p - 1)), q)


def _hfamily(x, alpha: Fraction):
    if alpha == 0:
        return _geometric(x)
    if alpha == 1:
        return _arithmetic(x)
    g = _geometric(x)
    return g * (_arithmetic(x) / g) ** float(alpha)


# --------------------------------------------------------------------------
# expression language


@dataclass(frozen=True)
class Mean:
    """Base class of all mean expressions."""

    requires_positive: ClassVar[bool] = False
    kind: ClassVar[str] = ""

    @property
    def arity(self) -> int | None:
        """Fixed arity, or None when the expression accepts any p >= 2."""
        return None

    @property
    def needs_positive(self) -> bool:
        return self.requires_positive

    def check_arity(self, p: int) -> None:
        if p < 2:
            raise ArityMismatch(f"means need at least 2 variables, got {p}")
        if self.arity is not None and self.arity != p:
            raise ArityMismatch(f"{self.kind} has arity {self.arity}, got a vector of length {p}")

    def _evaluate(self, x: tuple[float, ...]) -> float:
        raise NotImplementedError

    def __call__(self, x: Sequence[float]) -> float:
        return eval_mean(self, x)


@dataclass(frozen=True)
class Arithmetic(Mean):
    kind: ClassVar[str] = "arithmetic"

    def _evaluate(self, x):
        return _clamp(_arithmetic(x), x)


@dataclass(frozen=True)
class Geometric(Mean):
    kind: ClassVar[str] = "geometric"
    requires_positive: ClassVar[bool] = True

    def _evaluate(self, x):
        return _clamp(_geometric(x), x)


@dataclass(frozen=True)
class Harmonic(Mean):
    kind: ClassVar[str] = "harmonic"
    requires_positive: ClassVar[bool] = True

    def _evaluate(self, x):
        return _clamp(_harmonic(x), x)


@dataclass(frozen=True)
class Power(Mean):
    """Power mean of order ``r``; ``r == 0`` is the geometric mean."""

    r: float = 1.0
    kind: ClassVar[str] = "power"
    requires_positive: ClassVar[bool] = True

    def _evaluate(self, x):
        return _clamp(self._raw(x), x)

    def _raw(self, x):
        r = self.r
        if r == 0:
            return _geometric(x)
        if r == 1:
            return _arithmetic(x)
        if r == -1:
            return _harmonic(x)
        # scaling by the max keeps the rounded 1/r exponent from amplifying error
        top = max(x)
        return top * (math.fsum((v / top) ** r for v in x) / len(x)) ** (1.0 / r)


@dataclass(frozen=True)
class Min(Mean):
    kind: ClassVar[str] = "min"

    def _evaluate(self, x):
        return min(x)


@dataclass(frozen=True)
class Max(Mean):
    kind: ClassVar[str] = "max"

    def _evaluate(self, x):
        return max(x)


@dataclass(frozen=True)
class Projection(Mean):
    i: int = 1
    kind: ClassVar[str] = "projection"

    def __post_init__(self):
        if self.i < 1:
            raise ArityMismatch(f"projection index must be >= 1, got {self.i}")

    def check_arity(self, p):
        super().check_arity(p)
        if self.i > p:
            raise ArityMismatch(f"projection index {self.i} outside 1..{p}")

    def _evaluate(self, x):
        return x[self.i - 1]


@dataclass(frozen=True)
class SubsetArithmetic(Mean):
    S: tuple[int, ...] = (1,)
    kind: ClassVar[str] = "subset_arithmetic"

    def __post_init__(self):
        S = tuple(sorted(set(self.S)))
        if not S or S[0] < 1:
            raise ArityMismatch(f"subset must be a nonempty set of indices >= 1, got {self.S}")
        object.__setattr__(self, "S", S)

    def check_arity(self, p):
        super().check_arity(p)
        if self.S[-1] > p:
            raise ArityMismatch(f"subset {self.S} not contained in 1..{p}")

    def _evaluate(self, x):
        return math.fsum(x[i - 1] for i in self.S) / len(self.S)


@dataclass(frozen=True)
class HFamily(Mean):
    """Geometric/arithmetic blend ``g**(1-alpha) * a**alpha`` with exact ``alpha``."""

    alpha: Fraction = Fraction(0)
    kind: ClassVar[str] = "hfamily"
    requires_positive: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))

    def _evaluate(self, x):
        v = _hfamily(x, self.alpha)
        if Fraction(-1, len(x) - 1) <= self.alpha <= 1:
            return _clamp(v, x)
        return v


@dataclass(frozen=True)
class BetaType(Mean):
    kind: ClassVar[str] = "beta"
    requires_positive: ClassVar[bool] = True

    def _evaluate(self, x):
        return _clamp(_beta(x), x)


@dataclass(frozen=True)
class GiniF(Mean):
    kind: ClassVar[str] = "gini_f"
    requires_positive: ClassVar[bool] = True

    @property
    def arity(self):
        return 3

    def _evaluate(self, x):
        top = max(x)
        x1, x2, x3 = (v / top for v in x)
        return _clamp(top * (math.fsum((x2 * x3, x3 * x1, x1 * x2)) / (x1 + x2 + x3)), x)


@dataclass(frozen=True)
class MeanVector:
    """A mean-type mapping ``(M_1, ..., M_p)``.

    Python indexing (``M[0]``) is 0-based; ``M.coordinate(i)`` is 1-based.
    """

    means: tuple[Mean, ...]

    def __post_init__(self):
        means = tuple(self.means)
        object.__setattr__(self, "means", means)
        p = len(means)
        if p < 2:
            raise ArityMismatch(f"a mean-type mapping needs p >= 2 coordinates, got {p}")
        for m in means:
            if not isinstance(m, Mean):
                raise TypeError(f"not a mean expression: {m!r}")
            m.check_arity(p)

    @property
    def p(self) -> int:
        return len(self.means)

    def __len__(self):
        return len(self.means)

    def __iter__(self):
        return iter(self.means)

    def __getitem__(self, k):
        return self.means[k]

    def coordinate(self, i: int) -> Mean:
        return self.means[i - 1]

    @property
    def needs_positive(self) -> bool:
        return any(m.needs_positive for m in self.means)

    def __call__(self, x: Sequence[float]) -> tuple[float, ...]:
        return evaluate_mapping(self, x)


def mapping(*means: Mean) -> MeanVector:
    return MeanVector(tuple(means))


@dataclass(frozen=True)
class Complement(Mean):
    """The K-complementary average of the coordinates ``S`` of ``M``.

    Evaluation solves ``K(T(alpha)) = K(x)`` by bisection, see
    :mod:`invmeans.complementary`.
    """

    K: Mean = field(default_factory=Geometric)
    M: MeanVector = None  # type: ignore[assignment]
    S: tuple[int, ...] = (1,)
    kind: ClassVar[str] = "complement"

    def __post_init__(self):
        S = tuple(sorted(set(self.S)))
        object.__setattr__(self, "S", S)
        if not isinstance(self.M, MeanVector):
            object.__setattr__(self, "M", MeanVector(tuple(self.M)))
        if not S:
            from .errors import EmptySubset

            raise EmptySubset("complementary averaging needs a nonempty index set")
        if S[0] < 1 or S[-1] > self.M.p:
            raise ArityMismatch(f"index set {S} not contained in 1..{self.M.p}")
        self.K.check_arity(self.M.p)

    @property
    def arity(self):
        return self.M.p

    @property
    def needs_positive(self):
        return self.K.needs_positive or self.M.needs_positive

    def _evaluate(self, x):
        from .complementary import _solve_complement

        return _solve_complement(self.K, self.M, self.S, x).value


@dataclass(frozen=True)
class Iterated(Mean):
    """The unique M-invariant mean, realized as the limit of the iterates of M."""

    M: MeanVector = None  # type: ignore[assignment]
    kind: ClassVar[str] = "iterated"

    def __post_init__(self):
        if not isinstance(self.M, MeanVector):
            object.__setattr__(self, "M", MeanVector(tuple(self.M)))

    @property
    def arity(self):
        return self.M.p

    @property
    def needs_positive(self):
        return self.M.needs_positive

    def _evaluate(self, x):
        from .invariance import invariant_mean_value

        return invariant_mean_value(self.M, x)


# --------------------------------------------------------------------------
# evaluation


def _as_vector(x: Sequence[float]) -> tuple[float, ...]:
    try:
        xs = tuple(float(v) for v in x)
    except TypeError as exc:
        raise DomainViolation(f"input is not a vector of reals: {x!r}") from exc
    if not all(math.isfinite(v) for v in xs):
        raise DomainViolation(f"non-finite input {xs}")
    return xs


def eval_mean(expr: Mean, x: Sequence[float]) -> float:
    """Evaluate ``expr`` at ``x``.

    Raises ArityMismatch when ``len(x)`` does not fit the expression and
    DomainViolation on nonpositive input to a mean that needs ``(0, inf)``.
    """
    xs = _as_vector(x)
    expr.check_arity(len(xs))
    if expr.needs_positive and min(xs) <= 0:
        raise DomainViolation(f"{expr.kind} mean needs positive inputs, got {xs}")
    return expr._evaluate(xs)


def evaluate_mapping(M: MeanVector, x: Sequence[float]) -> tuple[float, ...]:
    xs = _as_vector(x)
    if len(xs) != M.p:
        raise ArityMismatch(f"mapping has p={M.p}, got a vector of length {len(xs)}")
    if M.needs_positive and min(xs) <= 0:
        raise DomainViolation(f"mapping needs positive inputs, got {xs}")
    # repeated coordinates (common in closures) are evaluated once
    seen: dict[int, float] = {}
    out = []
    for m in M.means:
        key = id(m)
        if key not in seen:
            seen[key] = m._evaluate(xs)
        out.append(seen[key])
    return tuple(out)


# --------------------------------------------------------------------------
# domains and sampling


@dataclass(frozen=True)
class Domain:
    lower: float = 0.0
    upper: float = math.inf
    lower_open: bool = True
    upper_open: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainViolation(f"empty domain ({self.lower}, {self.upper})")

    @property
    def positive(self) -> bool:
        return self.lower > 0 or (self.lower == 0 and self.lower_open)

    def contains(self, v: float) -> bool:
        lo_ok = v > self.lower if self.lower_open else v >= self.lower
        hi_ok = v < self.upper if self.upper_open else v <= self.upper
        return lo_ok and hi_ok

    def sampling_bounds(self) -> tuple[float, float]:
        lo, hi = self.lower, self.upper
        if math.isinf(lo) and math.isinf(hi):
            return -10.0, 10.0
        if math.isinf(hi):
            return lo, lo + 10.0
        if math.isinf(lo):
            return hi - 10.0, hi
        return lo, hi


POSITIVE = Domain()


@dataclass(frozen=True)
class SampleConfig:
    count: int = 1000
    seed: int = 42
    domain: Domain = Domain(0.0, 10.0)

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be positive")


def sample_vectors(cfg: SampleConfig, p: int) -> np.ndarray:
    """Seeded uniform samples of shape ``(cfg.count, p)`` inside the domain."""
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.domain.sampling_bounds()
    xs = rng.uniform(lo, hi, size=(cfg.count, p))
    if cfg.domain.lower_open:
        xs[xs <= lo] = np.nextafter(lo, hi)
    return xs


def corner_vectors(domain: Domain, p: int, limit: int = 256) -> list[tuple[float, ...]]:
    """Nonconstant vectors with every coordinate at one of two extreme levels.

    The low level sits three decades below the top of a positive domain, so
    corners expose means that leave ``[min x, max x]`` only at wide spreads.
    """
    lo, hi = domain.sampling_bounds()
    low = hi * 1e-3 if lo == 0 and domain.lower_open else lo
    if domain.lower_open and low <= lo:
        low = lo + (hi - lo) * 1e-3
    high = hi if not domain.upper_open else hi - (hi - low) * 1e-6
    out = []
    for bits in itertools.product((low, high), repeat=p):
        if min(bits) != max(bits):
            out.append(bits)
            if len(out) >= limit:
                break
    return out


def _resolve_arity(expr: Mean, p: int | None) -> int:
    if expr.arity is not None:
        if p is not None and p != expr.arity:
            raise ArityMismatch(f"{expr.kind} has arity {expr.arity}, asked for p={p}")
        return expr.arity
    if p is None:
        raise ArityMismatch(f"{expr.kind} accepts any arity; pass p explicitly")
    return p


# --------------------------------------------------------------------------
# sampled checks


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class BoundsReport:
    max_violation: float
    witness: tuple[float, ...] | None
    strict: bool
    strict_witness: tuple[float, ...] | None

    @property
    def is_mean(self) -> bool:
        return self.max_violation == 0.0


def check_mean_bounds(expr: Mean, cfg: SampleConfig, p: int | None = None, corners: bool = True) -> BoundsReport:
    """Largest amount by which ``min x <= expr(x) <= max x`` fails on samples.

    ``strict`` additionally asks for ``min x < expr(x) < max x`` at every
    nonconstant sample.
    """
    p = _resolve_arity(expr, p)
    points: list[tuple[float, ...]] = [tuple(row) for row in sample_vectors(cfg, p)]
    if corners:
        points.extend(corner_vectors(cfg.domain, p))
    worst, witness = 0.0, None
    strict, strict_witness = True, None
    for x in points:
        v = eval_mean(expr, x)
        lo, hi = min(x), max(x)
        excess = max(lo - v, v - hi, 0.0)
        if excess > worst:
            worst, witness = excess, x
        if strict and lo < hi and not (lo < v < hi):
            strict, strict_witness = False, x
    return BoundsReport(worst, witness, strict, strict_witness)


def _permutations(p: int, rng: np.random.Generator, limit: int = 720):
    if math.factorial(p) <= limit:
        return list(itertools.permutations(range(p)))[1:]
    return [tuple(rng.permutation(p)) for _ in range(limit)]


def check_symmetric(expr: Mean, cfg: SampleConfig, p: int | None = None, tol: float = REL_TOL) -> CheckResult:
    p = _resolve_arity(expr, p)
    rng = np.random.default_rng(cfg.seed + 1)
    perms = _permutations(p, rng)
    for row in sample_vectors(cfg, p):
        x = tuple(row)
        v = eval_mean(expr, x)
        for perm in perms:
            y = tuple(x[k] for k in perm)
            w = eval_mean(expr, y)
            if not close(v, w, tol):
                return CheckResult(False, (x, y), f"{v!r} != {w!r}")
    return CheckResult(True)


def check_monotone(
    expr: Mean,
    cfg: SampleConfig,
    p: int | None = None,
    strict: bool = False,
    bump: float = 1e-3,
    tol: float = REL_TOL,
) -> CheckResult:
    """Bump each coordinate by a relative ``bump`` and watch the value."""
    p = _resolve_arity(expr, p)
    for row in sample_vectors(cfg, p):
        x = tuple(row)
        v = eval_mean(expr, x)
        for i in range(p):
            y = list(x)
            y[i] = x[i] + bump * max(abs(x[i]), 1.0)
            w = eval_mean(expr, y)
            if strict:
                ok = w > v
            else:
                ok = w >= v - tol * max(abs(v), 1.0)
            if not ok:
                return CheckResult(False, (x, tuple(y)), f"value went from {v!r} to {w!r}")
    return CheckResult(True)


def contraction_gap(M: MeanVector, x: Sequence[float]) -> float:
    """``(max x - min x) - (max M(x) - min M(x))``; positive certifies contraction at x."""
    xs = _as_vector(x)
    if min(xs) == max(xs):
        raise ConstantInput("contraction gap is undefined on the diagonal")
    y = evaluate_mapping(M, xs)
    return (max(xs) - min(xs)) - (max(y) - min(y))


# --------------------------------------------------------------------------
# fingerprints


FINGERPRINT_SAMPLES = 16
FINGERPRINT_SEED = 20190101
FINGERPRINT_DOMAIN = Domain(0.5, 10.0)


def _fingerprint_points(p: int) -> np.ndarray:
    return sample_vectors(SampleConfig(FINGERPRINT_SAMPLES, FINGERPRINT_SEED, FINGERPRINT_DOMAIN), p)


def fingerprint(expr: Mean, p: int | None = None, digits: int = 9) -> tuple[str, ...]:
    """Values at 16 fixed sample vectors, rounded to ``digits`` significant digits."""
    p = _resolve_arity(expr, p)
    return tuple(f"{eval_mean(expr, row):.{digits - 1}e}" for row in _fingerprint_points(p))


def mapping_fingerprint(M: MeanVector, digits: int = 9) -> tuple[tuple[str, ...], ...]:
    cols = [evaluate_mapping(M, row) for row in _fingerprint_points(M.p)]
    return tuple(tuple(f"{c[i]:.{digits - 1}e}" for c in cols) for i in range(M.p))


# --------------------------------------------------------------------------
# JSON mean-spec format

_SIMPLE: dict[str, type[Mean]] = {
    cls.kind: cls for cls in (Arithmetic, Geometric, Harmonic, Min, Max, BetaType, GiniF)
}


def rational_to_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def rational_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        return Fraction(int(obj["num"]), int(obj["den"]))
    if isinstance(obj, (int, str)):
        return Fraction(obj)
    raise ValueError(f"not a rational: {obj!r}")


def to_spec(expr: Mean) -> dict:
    if isinstance(expr, Power):
        return {"kind": "power", "r": expr.r}
    if isinstance(expr, Projection):
        return {"kind": "projection", "i": expr.i}
    if isinstance(expr, SubsetArithmetic):
        return {"kind": "subset_arithmetic", "S": list(expr.S)}
    if isinstance(expr, HFamily):
        return {"kind": "hfamily", "alpha": rational_to_json(expr.alpha)}
    if isinstance(expr, Complement):
        return {"kind": "complement", "K": to_spec(expr.K), "M": mapping_to_spec(expr.M), "S": list(expr.S)}
    if isinstance(expr, Iterated):
        return {"kind": "iterated", "M": mapping_to_spec(expr.M)}
    if type(expr).kind in _SIMPLE:
        return {"kind": expr.kind}
    raise TypeError(f"cannot serialize {expr!r}")


def mapping_to_spec(M: MeanVector) -> list[dict]:
    return [to_spec(m) for m in M.means]


def from_spec(obj: dict) -> Mean:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"mean-spec must be an object with a 'kind': {obj!r}")
    kind = obj["kind"]
    if kind in _SIMPLE:
        return _SIMPLE[kind]()
    if kind == "power":
        return Power(float(obj["r"]))
    if kind == "projection":
        return Projection(int(obj["i"]))
    if kind == "subset_arithmetic":
        return SubsetArithmetic(tuple(int(i) for i in obj["S"]))
    if kind == "hfamily":
        return HFamily(rational_from_json(obj["alpha"]))
    if kind == "complement":
        return Complement(from_spec(obj["K"]), mapping_from_spec(obj["M"]), tuple(int(i) for i in obj["S"]))
    if kind == "iterated":
        return Iterated(mapping_from_spec(obj["M"]))
    raise ValueError(f"unknown mean kind {kind!r}")


def mapping_from_spec(objs: Iterable[dict]) -> MeanVector:
    return MeanVector(tuple(from_spec(o) for o in objs))


A, G, H = Arithmetic(), Geometric(), Harmonic()
B = BetaType()
F = GiniF()

__all__ = [
    "A", "B", "F", "G", "H",
    "Arithmetic", "BetaType", "BoundsReport", "CheckResult", "Complement", "Domain",
    "GiniF", "Geometric", "HFamily", "Harmonic", "Iterated", "Max", "Mean", "MeanVector",
    "Min", "Power", "Projection", "SampleConfig", "SubsetArithmetic",
    "check_mean_bounds", "check_monotone", "check_symmetric", "close", "contraction_gap",
    "corner_vectors", "eval_mean", "evaluate_mapping", "fingerprint", "from_spec",
    "mapping", "mapping_fingerprint", "mapping_from_spec", "mapping_to_spec",
    "sample_vectors", "to_spec",
]
