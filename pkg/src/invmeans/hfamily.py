"""Exact rational-exponent engine for the family H_{p,alpha}.

``H_{p,alpha}(x) = (x_1...x_p)**((1-alpha)/p) * ((x_1+...+x_p)/p)**alpha``.
``alpha = 1`` is the arithmetic mean, ``alpha = 0`` the geometric mean and
``alpha = -1/(p-1)`` the Beta-type mean.  A mapping of H-family means is an
exponent vector; under the geometric mean it composes to the H-mean of the
averaged exponent, so G-invariance reduces to a zero exponent sum and
G-complementary averaging to exponent averaging.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ArithmeticOverflow, ArityMismatch, BudgetExceeded, EmptySubset, NonInvariantRoot
from .invariance import check_invariance
from .means import (
    Arithmetic,
    BetaType,
    CheckResult,
    Geometric,
    Harmonic,
    HFamily,
    Mean,
    MeanVector,
    Power,
    SampleConfig,
    eval_mean,
    rational_from_json,
    rational_to_json,
)

INT_MAX = 2**63 - 1


def checked(q: Fraction) -> Fraction:
    """Reject rationals whose parts leave the signed 64-bit range."""
    if abs(q.numerator) > INT_MAX or q.denominator > INT_MAX:
        raise ArithmeticOverflow(f"rational {q} exceeds 64-bit numerator/denominator")
    return q


def beta_exponent(p: int) -> Fraction:
    return Fraction(-1, p - 1)


@dataclass(frozen=True)
class ExponentVector:
    p: int
    alphas: tuple[Fraction, ...]

    def __post_init__(self):
        alphas = tuple(checked(Fraction(a)) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if self.p < 2 or len(alphas) != self.p:
            raise ArityMismatch(f"need p >= 2 exponents, got p={self.p} and {len(alphas)} values")

    @classmethod
    def of(cls, *alphas) -> "ExponentVector":
        return cls(len(alphas), tuple(Fraction(a) for a in alphas))

    @property
    def total(self) -> Fraction:
        return checked(sum(self.alphas, Fraction(0)))

    def mapping(self) -> MeanVector:
        return MeanVector(tuple(HFamily(a) for a in self.alphas))

    def to_json(self) -> dict:
        return {"p": self.p, "alphas": [rational_to_json(a) for a in self.alphas]}

    @classmethod
    def from_json(cls, obj: dict) -> "ExponentVector":
        return cls(int(obj["p"]), tuple(rational_from_json(a) for a in obj["alphas"]))

    def __str__(self):
        return "(" + ", ".join(str(a) for a in self.alphas) + ")"


def beta_root(p: int) -> ExponentVector:
    """Exponents of ``(A, B_p, ..., B_p)``."""
    return ExponentVector(p, (Fraction(1),) + (beta_exponent(p),) * (p - 1))


def exponent_of(m: Mean, p: int) -> Fraction | None:
    if isinstance(m, HFamily):
        return m.alpha
    if isinstance(m, Arithmetic):
        return Fraction(1)
    if isinstance(m, Geometric):
        return Fraction(0)
    if isinstance(m, BetaType):
        return beta_exponent(p)
    if isinstance(m, Harmonic) and p == 2:
        return Fraction(-1)
    if isinstance(m, Power):
        if m.r in (0, 1) or (m.r == -1 and p == 2):
            return Fraction(int(m.r))
    return None


def exponents_of(M: MeanVector) -> ExponentVector | None:
    alphas = [exponent_of(m, M.p) for m in M]
    if any(a is None for a in alphas):
        return None
    return ExponentVector(M.p, tuple(alphas))


def hfam_eval(p: int, alpha, x: Sequence[float]) -> float:
    if len(x) != p:
        raise ArityMismatch(f"expected {p} values, got {len(x)}")
    return eval_mean(HFamily(Fraction(alpha)), x)


def beta_eval(p: int, x: Sequence[float]) -> float:
    if len(x) != p:
        raise ArityMismatch(f"expected {p} values, got {len(x)}")
    return eval_mean(BetaType(), x)


def compose_under_G(v: ExponentVector) -> Fraction:
    """Exponent of ``G o (H_{alpha_1}, ..., H_{alpha_p})``, i.e. the mean exponent."""
    return checked(v.total / v.p)


@dataclass(frozen=True)
class ZeroSumReport:
    symbolic: bool
    residual: float
    witness: tuple[float, ...] | None
    tol: float

    @property
    def agree(self) -> bool:
        return self.symbolic == (self.residual < self.tol)

    def __bool__(self):
        return self.symbolic


def check_lemma4(v: ExponentVector, cfg: SampleConfig, tol: float = 1e-12) -> ZeroSumReport:
    """Symbolic verdict (zero exponent sum) next to the sampled G-invariance residual."""
    rep = check_invariance(Geometric(), v.mapping(), cfg)
    return ZeroSumReport(v.total == 0, rep.residual, rep.witness, tol)


def symbolic_complement(v: ExponentVector, S: Iterable[int]) -> ExponentVector:
    """Replace the exponents in ``S`` (1-based) by their average."""
    S = sorted(set(S))
    if not S:
        raise EmptySubset("index set must be nonempty")
    if S[0] < 1 or S[-1] > v.p:
        raise ArityMismatch(f"index set {S} not contained in 1..{v.p}")
    if v.total != 0:
        raise NonInvariantRoot(f"exponents {v} do not sum to zero, G is not invariant")
    beta = checked(sum((v.alphas[i - 1] for i in S), Fraction(0)) / len(S))
    return ExponentVector(v.p, tuple(beta if i + 1 in S else a for i, a in enumerate(v.alphas)))


@dataclass
class SymbolicClosure:
    root: ExponentVector
    vectors: list[ExponentVector]
    provenance: dict[int, tuple[int, tuple[int, ...]]] = field(default_factory=dict)
    depth: list[int] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.root.p

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, v):
        return v in self.vectors

    def to_json(self) -> dict:
        nodes = []
        for k, v in enumerate(self.vectors):
            parent, S = self.provenance.get(k, (None, None))
            nodes.append(
                {
                    "id": k,
                    "parent": parent,
                    "S": None if S is None else list(S),
                    "depth": self.depth[k],
                    "alphas": [rational_to_json(a) for a in v.alphas],
                }
            )
        return {"p": self.p, "root": self.root.to_json(), "count": len(self.vectors), "nodes": nodes}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph hfamily_closure {"]
        for k, v in enumerate(self.vectors):
            lines.append(f'  n{k} [label="{v}"];')
        for k, (parent, S) in sorted(self.provenance.items()):
            lines.append(f'  n{parent} -> n{k} [label="{{{",".join(map(str, S))}}}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def closure_enumerate(p: int, max_depth: int, root: ExponentVector | None = None, budget: int = 10_000) -> SymbolicClosure:
    """Breadth-first closure of a zero-sum exponent vector under exponent averaging.

    The default root is ``(A, B_p, ..., B_p)``.  Subsets are applied in bitmask
    order, so vector ids are reproducible.
    """
    if p < 2:
        raise ArityMismatch("p must be at least 2")
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    root = beta_root(p) if root is None else root
    if root.p != p:
        raise ArityMismatch(f"root has p={root.p}, asked for p={p}")
    if root.total != 0:
        raise NonInvariantRoot(f"root exponents {root} do not sum to zero")
    out = SymbolicClosure(root, [root], {}, [0])
    ids = {root.alphas: 0}
    head = 0
    while head < len(out.vectors):
        k = head
        head += 1
        if out.depth[k] >= max_depth:
            continue
        v = out.vectors[k]
        for mask in range(1, 1 << p):
            S = tuple(i + 1 for i in range(p) if mask >> i & 1)
            child = symbolic_complement(v, S)
            if child.alphas in ids:
                continue
            if len(out.vectors) >= budget:
                raise BudgetExceeded(f"closure exceeded {budget} vectors")
            ids[child.alphas] = len(out.vectors)
            out.provenance[len(out.vectors)] = (k, S)
            out.depth.append(out.depth[k] + 1)
            out.vectors.append(child)
    return out


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def verify_remark3(closure: SymbolicClosure | Iterable[ExponentVector], p: int | None = None) -> CheckResult:
    """True iff every exponent denominator factors over primes <= p."""
    if isinstance(closure, SymbolicClosure):
        vectors, p = closure.vectors, closure.p
    else:
        vectors = list(closure)
        p = p if p is not None else vectors[0].p
    for v in vectors:
        for a in v.alphas:
            if any(q > p for q in _prime_factors(a.denominator)):
                return CheckResult(False, v, f"denominator {a.denominator} of {a} has a prime factor > {p}")
    return CheckResult(True)


def verify_membership(closure: SymbolicClosure) -> CheckResult:
    """Every vector sums to zero and has entries in ``[-1/(p-1), 1]``."""
    p = closure.p
    lo, hi = beta_exponent(p), Fraction(1)
    for v in closure.vectors:
        if v.total != 0:
            return CheckResult(False, v, f"exponent sum {v.total} != 0")
        bad = [a for a in v.alphas if not lo <= a <= hi]
        if bad:
            return CheckResult(False, v, f"exponents {bad} outside [{lo}, 1]")
    return CheckResult(True)
