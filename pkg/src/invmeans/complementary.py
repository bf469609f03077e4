"""K-complementary averaging.

Given a mapping ``M`` that leaves a continuous, strictly increasing mean ``K``
invariant and a nonempty index set ``S``, the coordinates in ``S`` can be
replaced by a single mean ``K_S(M)`` so that ``K`` stays invariant.  At a
point ``x`` its value is the root of

    f(alpha) = K(T(alpha)) - K(x),   T(alpha)_i = alpha (i in S), M_i(x) otherwise,

which is bracketed by ``[min_{i in S} M_i(x), max_{i in S} M_i(x)]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    ArityMismatch,
    BudgetExceeded,
    DomainViolation,
    EmptySubset,
    NoSolutionInRange,
    NotInvariant,
    SIsFull,
)
from .invariance import IterationConfig, check_invariance
from .means import (
    Complement,
    Domain,
    Geometric,
    HFamily,
    Mean,
    MeanVector,
    SampleConfig,
    _as_vector,
    _fingerprint_points,
    check_monotone,
    eval_mean,
    evaluate_mapping,
    mapping_to_spec,
    to_spec,
)

DEFAULT_CONFIG = IterationConfig()
MONOTONE_PROBE = SampleConfig(count=16, seed=7, domain=Domain(0.5, 10.0))


def normalize_subset(S, p: int) -> tuple[int, ...]:
    """Sorted 1-based index tuple; ints are read as bitmasks only via :func:`subset_from_mask`."""
    out = tuple(sorted({int(i) for i in S}))
    if not out:
        raise EmptySubset("index set must be nonempty")
    if out[0] < 1 or out[-1] > p:
        raise ArityMismatch(f"index set {out} not contained in 1..{p}")
    return out


def subset_from_mask(mask: int, p: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(p) if mask >> i & 1)


def subset_mask(S: Sequence[int]) -> int:
    return sum(1 << (i - 1) for i in S)


def all_subsets(p: int):
    """Nonempty subsets of 1..p in bitmask order."""
    for mask in range(1, 1 << p):
        yield subset_from_mask(mask, p)


@dataclass(frozen=True)
class ComplementSpec:
    """``K``, the K-invariant mapping ``M``, and the index set ``S`` to merge.

    With ``validate`` (the default) ``K`` must pass a sampled strict
    monotonicity check; the complement is only well defined for such ``K``.
    """

    K: Mean
    M: MeanVector
    S: tuple[int, ...]
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not isinstance(self.M, MeanVector):
            object.__setattr__(self, "M", MeanVector(tuple(self.M)))
        object.__setattr__(self, "S", normalize_subset(self.S, self.M.p))
        self.K.check_arity(self.M.p)
        if self.validate and not check_monotone(self.K, MONOTONE_PROBE, p=self.M.p, strict=True):
            raise ValueError(f"K={self.K.kind} failed the sampled strict monotonicity check")

    @property
    def p(self) -> int:
        return self.M.p

    @property
    def complement_set(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.p + 1) if i not in self.S)


@dataclass
class BisectionResult:
    value: float
    bracket: tuple[float, float]
    iterations: int
    residual: float
    history: list[tuple[float, float, float, float]] | None = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _bisect(f: Callable[[float], float], target: float, lo: float, hi: float, cfg: IterationConfig, on_fail, trace=False):
    """Root of the monotone ``f(alpha) = target`` on ``[lo, hi]``.

    The direction of monotonicity is read off the endpoints.  ``on_fail`` is
    called with ``(f_lo, f_hi)`` when the target is not bracketed (beyond a
    ``10 * tol`` slack) and must raise.
    """
    scale = max(1.0, abs(target))
    if lo == hi:
        return BisectionResult(lo, (lo, hi), 0, abs(f(lo) - target), [] if trace else None)
    f_lo, f_hi = f(lo), f(hi)
    sign = 1.0 if f_lo <= f_hi else -1.0
    slack = 10 * cfg.tol * scale
    if sign * (f_lo - target) > slack or sign * (f_hi - target) < -slack:
        on_fail(f_lo, f_hi)
    a, b = lo, hi
    ra, rb = abs(f_lo - target), abs(f_hi - target)
    history = [(a, b, ra, rb)] if trace else None
    n = 0
    best, best_r = (a, ra) if ra <= rb else (b, rb)
    while n < cfg.max_iter:
        if b - a <= cfg.tol * max(1.0, abs(a), abs(b)):
            break
        m = min(max(a + (b - a) / 2, a), b)
        if m == a or m == b:
            break
        fm = f(m)
        n += 1
        rm = abs(fm - target)
        if rm < best_r:
            best, best_r = m, rm
        if sign * (fm - target) < 0:
            a, ra = m, rm
        else:
            b, rb = m, rm
        if history is not None:
            history.append((a, b, ra, rb))
        if rm <= cfg.tol * scale:
            return BisectionResult(m, (lo, hi), n, rm, history)
    m = min(max(a + (b - a) / 2, a), b)
    rm = abs(f(m) - target)
    if best_r < rm:
        m, rm = best, best_r
    return BisectionResult(m, (lo, hi), n, rm, history)


def _solve_complement(K: Mean, M: MeanVector, S: tuple[int, ...], x, cfg: IterationConfig = DEFAULT_CONFIG, trace=False):
    xs = _as_vector(x)
    if len(xs) != M.p:
        raise ArityMismatch(f"mapping has p={M.p}, got a vector of length {len(xs)}")
    target = eval_mean(K, xs)
    vals = evaluate_mapping(M, xs)
    inside = [vals[i - 1] for i in S]
    lo, hi = min(inside), max(inside)

    def f(alpha):
        y = list(vals)
        for i in S:
            y[i - 1] = alpha
        return K._evaluate(tuple(y))

    def fail(f_lo, f_hi):
        raise NotInvariant(
            f"K(T(alpha)) does not bracket K(x)={target!r} on [{lo!r}, {hi!r}] "
            f"(values {f_lo!r}, {f_hi!r}); K is not M-invariant at x={xs}"
        )

    return _bisect(f, target, lo, hi, cfg, fail, trace)


def complement_solve(spec: ComplementSpec, x: Sequence[float], cfg: IterationConfig = DEFAULT_CONFIG, trace: bool = False) -> BisectionResult:
    return _solve_complement(spec.K, spec.M, spec.S, x, cfg, trace)


def complement_value(spec: ComplementSpec, x: Sequence[float], cfg: IterationConfig = DEFAULT_CONFIG) -> float:
    """The value ``K_S(M)(x)``; always inside ``[min_{i in S} M_i(x), max_{i in S} M_i(x)]``."""
    return _solve_complement(spec.K, spec.M, spec.S, x, cfg).value


def complement_mean(spec: ComplementSpec) -> Complement:
    return Complement(spec.K, spec.M, spec.S)


def build_KS_mapping(spec: ComplementSpec) -> MeanVector:
    c = complement_mean(spec)
    return MeanVector(tuple(c if i in spec.S else spec.M.coordinate(i) for i in range(1, spec.p + 1)))


def dual_complement(spec: ComplementSpec) -> Complement:
    """Complement of the remaining coordinates with respect to ``build_KS_mapping(spec)``."""
    rest = spec.complement_set
    if not rest:
        raise SIsFull("the dual complement needs S to be a proper subset")
    return Complement(spec.K, build_KS_mapping(spec), rest)


def solve_completion(
    K: Mean,
    fixed: Mapping[int, Mean],
    S: Sequence[int],
    x: Sequence[float],
    cfg: IterationConfig = DEFAULT_CONFIG,
) -> float:
    """Find ``alpha`` in ``[min x, max x]`` with ``K(T(alpha)) = K(x)``.

    ``fixed`` maps every index outside ``S`` to its mean.  Raises
    NoSolutionInRange when no mean value can complete the mapping at ``x``.
    """
    xs = _as_vector(x)
    p = len(xs)
    S = normalize_subset(S, p)
    missing = set(range(1, p + 1)) - set(S) - set(fixed)
    extra = set(fixed) & set(S)
    if missing or extra:
        raise ArityMismatch(f"fixed means must cover exactly the indices outside S={S}")
    K.check_arity(p)
    base = [0.0] * p
    for i, m in fixed.items():
        base[i - 1] = eval_mean(m, xs)
    target = eval_mean(K, xs)
    lo, hi = min(xs), max(xs)
    if K.needs_positive and min(base[i - 1] for i in fixed) <= 0:
        raise DomainViolation("fixed means left the positive domain")

    def f(alpha):
        y = list(base)
        for i in S:
            y[i - 1] = alpha
        return K._evaluate(tuple(y))

    def fail(f_lo, f_hi):
        raise NoSolutionInRange(
            f"K(T(alpha)) ranges over [{min(f_lo, f_hi)!r}, {max(f_lo, f_hi)!r}] for alpha in "
            f"[{lo!r}, {hi!r}], which misses K(x)={target!r}",
            bounds=(lo, hi),
        )

    return _bisect(f, target, lo, hi, cfg, fail).value


# --------------------------------------------------------------------------
# closure under complementary averaging


@dataclass
class ClosureNode:
    id: int
    mapping: MeanVector
    S: tuple[int, ...] | None
    parent: int | None
    depth: int
    fingerprint: np.ndarray = field(repr=False)


@dataclass
class ClosureTree:
    K: Mean
    nodes: list[ClosureNode]
    k0: list[Mean]
    exact: bool = False

    @property
    def root(self) -> ClosureNode:
        return self.nodes[0]

    @property
    def p(self) -> int:
        return self.root.mapping.p

    def to_json(self) -> dict:
        return {
            "K": to_spec(self.K),
            "p": self.p,
            "exact": self.exact,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "S": None if n.S is None else list(n.S),
                    "depth": n.depth,
                    "mapping": mapping_to_spec(n.mapping),
                    "fingerprint": [[float(f"{v:.9e}") for v in row] for row in n.fingerprint],
                }
                for n in self.nodes
            ],
            "k0": [to_spec(m) for m in self.k0],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph closure {"]
        for n in self.nodes:
            label = ", ".join(describe(m) for m in n.mapping)
            lines.append(f'  n{n.id} [label="{n.id}: ({label})"];')
        for n in self.nodes[1:]:
            lines.append(f'  n{n.parent} -> n{n.id} [label="{{{",".join(map(str, n.S))}}}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def describe(m: Mean) -> str:
    if isinstance(m, HFamily):
        return f"H[{m.alpha}]"
    if isinstance(m, Complement):
        return "C{" + ",".join(map(str, m.S)) + "}"
    short = {"arithmetic": "A", "geometric": "G", "harmonic": "H", "beta": "B", "gini_f": "F"}
    return short.get(m.kind, m.kind)


class _FingerprintIndex:
    """Tolerant lookup of evaluation fingerprints (relative 1e-9)."""

    def __init__(self, rel=1e-9):
        self.rel = rel
        self.rows: list[np.ndarray] = []

    def find(self, fp: np.ndarray) -> int | None:
        if not self.rows:
            return None
        stack = np.stack(self.rows)
        tol = self.rel * np.maximum(np.abs(stack), np.abs(fp))
        hit = np.all(np.abs(stack - fp) <= tol, axis=tuple(range(1, stack.ndim)))
        idx = np.flatnonzero(hit)
        return int(idx[0]) if idx.size else None

    def add(self, fp: np.ndarray) -> int:
        self.rows.append(fp)
        return len(self.rows) - 1


def _mapping_values(M: MeanVector) -> np.ndarray:
    pts = _fingerprint_points(M.p)
    return np.array([evaluate_mapping(M, row) for row in pts]).T


def _numeric_child(K: Mean, M: MeanVector, S: tuple[int, ...]) -> MeanVector:
    first = M.coordinate(S[0])
    if all(M.coordinate(i) == first for i in S):
        # equal coordinates already solve the equation, and the solution is unique
        return M
    c = Complement(K, M, S)
    return MeanVector(tuple(c if i in S else M.coordinate(i) for i in range(1, M.p + 1)))


def closure_generate(
    K: Mean,
    M: MeanVector,
    max_depth: int,
    cfg: SampleConfig = SampleConfig(count=64),
    budget: int = 10_000,
    exact: bool | None = None,
    invariance_tol: float = 1e-9,
) -> ClosureTree:
    """Breadth-first closure of ``M`` under K-complementary averaging.

    Children are generated in (depth, subset bitmask) order and a child equal
    to an earlier node (by fingerprint) is dropped, so node ids are stable.
    With ``exact`` (default: whenever ``K`` is geometric and every coordinate
    of ``M`` is an H-family mean) complements are computed symbolically and
    deduplicated on exact exponent vectors.
    """
    from . import hfamily

    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    report = check_invariance(K, M, cfg)
    if not report.residual <= invariance_tol:
        raise NotInvariant(f"K is not M-invariant: residual {report.residual:.3g} at {report.witness}")
    root_exps = hfamily.exponents_of(M) if isinstance(K, Geometric) else None
    if exact is None:
        exact = root_exps is not None
    elif exact and root_exps is None:
        raise ValueError("exact closure needs K geometric and an all-H-family root")

    if exact:
        sym = hfamily.closure_enumerate(M.p, max_depth, root=root_exps, budget=budget)
        nodes = []
        for k, vec in enumerate(sym.vectors):
            parent, S = sym.provenance.get(k, (None, None))
            mp = vec.mapping()
            nodes.append(ClosureNode(k, mp, S, parent, sym.depth[k], _mapping_values(mp)))
        seen_alpha: dict = {}
        for vec in sym.vectors:
            for a in vec.alphas:
                seen_alpha.setdefault(a, HFamily(a))
        return ClosureTree(K, nodes, list(seen_alpha.values()), exact=True)

    index = _FingerprintIndex()
    root = ClosureNode(0, M, None, None, 0, _mapping_values(M))
    index.add(root.fingerprint)
    nodes = [root]
    head = 0
    while head < len(nodes):
        node = nodes[head]
        head += 1
        if node.depth >= max_depth:
            continue
        for S in all_subsets(M.p):
            child = _numeric_child(K, node.mapping, S)
            fp = _mapping_values(child)
            if index.find(fp) is not None:
                continue
            if len(nodes) >= budget:
                raise BudgetExceeded(f"closure exceeded {budget} nodes")
            index.add(fp)
            nodes.append(ClosureNode(len(nodes), child, S, node.id, node.depth + 1, fp))

    k0_index = _FingerprintIndex()
    k0: list[Mean] = []
    for node in nodes:
        for i, m in enumerate(node.mapping):
            if k0_index.find(node.fingerprint[i]) is None:
                k0_index.add(node.fingerprint[i])
                k0.append(m)
    return ClosureTree(K, nodes, k0, exact=False)


def contains_mapping(tree: ClosureTree, M: MeanVector) -> bool:
    fp = _mapping_values(M)
    index = _FingerprintIndex()
    for n in tree.nodes:
        index.add(n.fingerprint)
    return index.find(fp) is not None
