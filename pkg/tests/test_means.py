import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import positive_vectors, rel_err
from invmeans.errors import ArityMismatch, ConstantInput, DomainViolation
from invmeans.means import (
    A, B, F, G, H,
    Complement, Domain, GiniF, HFamily, Iterated, Max, Min,
    Power, Projection, SampleConfig, SubsetArithmetic,
    check_mean_bounds, check_monotone, check_symmetric, contraction_gap, corner_vectors,
    eval_mean, fingerprint, from_spec, mapping, mapping_from_spec, mapping_to_spec,
    sample_vectors, to_spec,
)


# --- eval_mean examples ---------------------------------------------------

def test_arithmetic_example():
    assert eval_mean(A, (1, 2, 3)) == 2


def test_harmonic_example():
    assert math.isclose(eval_mean(H, (1, 2, 3)), float(Fraction(18, 11)), rel_tol=1e-15)


def test_beta_example():
    assert math.isclose(eval_mean(B, (1, 2, 3)), math.sqrt(3), rel_tol=1e-15)


def test_gini_example():
    assert math.isclose(eval_mean(F, (1, 2, 3)), 11 / 6, rel_tol=1e-15)


def test_hfamily_zero_is_geometric_example():
    assert eval_mean(HFamily(0), (1, 4)) == 2


def test_power_zero_is_geometric():
    assert eval_mean(Power(0), (2, 8)) == eval_mean(G, (2, 8))


def test_power_mean_value():
    assert math.isclose(eval_mean(Power(2), (1, 7)), 5.0, rel_tol=1e-15)


def test_projection_and_subset():
    assert eval_mean(Projection(2), (1, 5, 9)) == 5
    assert eval_mean(SubsetArithmetic((1, 3)), (1, 5, 9)) == 5


def test_large_products_do_not_overflow():
    x = (1e200, 1e200, 1e200, 1e250)
    assert math.isfinite(eval_mean(G, x))
    assert math.isfinite(eval_mean(B, x))
    assert min(x) <= eval_mean(B, x) <= max(x)


# --- errors ---------------------------------------------------------------

def test_gini_rejects_other_arities():
    with pytest.raises(ArityMismatch):
        eval_mean(F, (1, 2))


def test_projection_index_out_of_range():
    with pytest.raises(ArityMismatch):
        eval_mean(Projection(4), (1, 2, 3))
    with pytest.raises(ArityMismatch):
        Projection(0)


def test_single_variable_rejected():
    with pytest.raises(ArityMismatch):
        eval_mean(A, (1.0,))


@pytest.mark.parametrize("expr", [G, H, B, HFamily(Fraction(1, 4)), Power(2)])
def test_positive_domain_enforced(expr):
    with pytest.raises(DomainViolation):
        eval_mean(expr, (1.0, -2.0, 3.0))
    with pytest.raises(DomainViolation):
        eval_mean(expr, (0.0, 2.0, 3.0))


def test_nonfinite_rejected():
    with pytest.raises(DomainViolation):
        eval_mean(A, (1.0, math.nan))


def test_arithmetic_accepts_negatives():
    assert eval_mean(A, (-1, 1)) == 0


def test_mapping_arity_checked():
    with pytest.raises(ArityMismatch):
        mapping(A, F)
    with pytest.raises(ArityMismatch):
        mapping(A)


def test_empty_domain_rejected():
    with pytest.raises(DomainViolation):
        Domain(1.0, 1.0)


# --- properties -----------------------------------------------------------

FINITE_KINDS = [
    A, G, H, B, Min(), Max(), Power(2.5), Power(-3), Power(0),
    HFamily(Fraction(1, 4)), HFamily(Fraction(-1, 2)), HFamily(Fraction(3, 2)),
]


@settings(max_examples=200, deadline=None)
@given(c=st.floats(min_value=1e-300, max_value=1e300), p=st.integers(2, 8))
def test_reflexivity_within_4_ulps(c, p):
    for expr in FINITE_KINDS:
        assert abs(eval_mean(expr, (c,) * p) - c) <= 4 * math.ulp(c), expr
    assert abs(eval_mean(GiniF(), (c,) * 3) - c) <= 4 * math.ulp(c) or c > 1e150


@settings(max_examples=200, deadline=None)
@given(positive_vectors())
def test_bounds_hold_exactly(x):
    for expr in [A, G, H, B, Power(2.5), Power(-3), HFamily(Fraction(1, 3)), HFamily(Fraction(-1, len(x) - 1))]:
        v = eval_mean(expr, x)
        assert min(x) <= v <= max(x), (expr, x, v)


@settings(max_examples=200, deadline=None)
@given(positive_vectors())
def test_hfamily_endpoints(x):
    assert rel_err(eval_mean(HFamily(1), x), eval_mean(A, x)) <= 1e-12
    assert rel_err(eval_mean(HFamily(0), x), eval_mean(G, x)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(positive_vectors(), st.fractions(-3, 3, max_denominator=12), st.fractions(-3, 3, max_denominator=12))
def test_hfamily_increasing_in_alpha(x, a, b):
    if min(x) == max(x) or a == b:
        return
    a, b = min(a, b), max(a, b)
    lo, hi = eval_mean(HFamily(a), x), eval_mean(HFamily(b), x)
    # the gap (a/g)**(b-a) can drop below double resolution for nearly constant x
    if rel_err(eval_mean(A, x), eval_mean(G, x)) * float(b - a) > 1e-12:
        assert lo < hi


@settings(max_examples=200, deadline=None)
@given(positive_vectors(2, 2))
def test_beta2_is_harmonic(x):
    assert rel_err(eval_mean(B, x), eval_mean(H, x)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(positive_vectors(3, 3, lo=0.1, hi=10))
def test_sharp_inequalities(x):
    if max(x) - min(x) < 1e-3 * max(x):
        return
    h, b, a = eval_mean(H, x), eval_mean(B, x), eval_mean(A, x)
    assert h < b < a


# --- sampled checks -------------------------------------------------------

def test_sampling_is_deterministic():
    cfg = SampleConfig(50, 7, Domain(0, 10))
    assert (sample_vectors(cfg, 3) == sample_vectors(cfg, 3)).all()
    assert (sample_vectors(cfg, 3) > 0).all()


def test_corners_are_nonconstant():
    for x in corner_vectors(Domain(0, 10), 3):
        assert min(x) < max(x)


def test_bounds_arithmetic_zero(cfg):
    rep = check_mean_bounds(A, cfg, p=3)
    assert rep.max_violation == 0 and rep.strict


def test_bounds_hfamily_outside_window():
    rep = check_mean_bounds(HFamily(2), SampleConfig(200, 42, Domain(0, 10)), p=2)
    assert rep.max_violation > 0
    x = rep.witness
    v = eval_mean(HFamily(2), x)
    assert v > max(x) or v < min(x)


def test_bounds_beta3_zero():
    rep = check_mean_bounds(B, SampleConfig(500, 42, Domain(0, 10)), p=3)
    assert rep.max_violation == 0 and rep.strict


def test_bounds_projection_not_strict(cfg):
    rep = check_mean_bounds(Projection(1), cfg, p=3)
    assert rep.max_violation == 0
    assert not rep.strict


def test_bounds_needs_arity_for_polymorphic(cfg):
    with pytest.raises(ArityMismatch):
        check_mean_bounds(A, cfg)


def test_symmetric_geometric(cfg):
    assert check_symmetric(G, cfg, p=3)


def test_projection_not_symmetric(cfg):
    res = check_symmetric(Projection(2), cfg, p=3)
    assert not res
    x, y = res.witness
    assert sorted(x) == sorted(y)


def test_complement_of_symmetric_is_symmetric(small_cfg):
    c = Complement(G, mapping(A, B, B), (1, 2))
    # Complement with S a strict subset is symmetric as a p-variable function
    assert check_symmetric(c, small_cfg, tol=1e-10)


def test_monotone_arithmetic(cfg):
    assert check_monotone(A, cfg, p=3, strict=True)


def test_min_monotone_but_not_strict(cfg):
    assert check_monotone(Min(), cfg, p=3)
    res = check_monotone(Min(), cfg, p=3, strict=True)
    assert not res and res.witness is not None


def test_hfamily_quarter_strictly_monotone(cfg):
    assert check_monotone(HFamily(Fraction(1, 4)), cfg, p=3, strict=True)


def test_hfamily_quarter_monotone_grid_oracle():
    # independent: direct formula on a grid, bumping each coordinate
    grid = [0.5, 1.0, 2.0, 4.5, 9.0]
    a = 0.25
    def h(x):
        return (x[0] * x[1] * x[2]) ** ((1 - a) / 3) * (sum(x) / 3) ** a
    for x in itertools.product(grid, repeat=3):
        for i in range(3):
            y = list(x)
            y[i] *= 1.01
            assert h(y) > h(x)


# --- contraction gap ------------------------------------------------------

def test_contraction_gap_agm():
    assert math.isclose(contraction_gap(mapping(A, G), (1, 4)), 2.5, rel_tol=1e-15)


def test_contraction_gap_identity():
    assert contraction_gap(mapping(Projection(1), Projection(2)), (1, 4)) == 0


def test_contraction_gap_pythagorean():
    assert math.isclose(contraction_gap(mapping(A, H), (1, 4)), 2.1, rel_tol=1e-14)


def test_contraction_gap_constant_input():
    with pytest.raises(ConstantInput):
        contraction_gap(mapping(A, G), (2, 2))


# --- JSON ----------------------------------------------------------------

SPECS = [
    A, G, H, B, F, Min(), Max(), Power(2.0), Projection(2), SubsetArithmetic((1, 3)),
    HFamily(Fraction(-1, 8)), Complement(G, mapping(A, B, B), (1, 2)), Iterated(mapping(A, G, H)),
]


@pytest.mark.parametrize("expr", SPECS, ids=lambda e: e.kind)
def test_spec_round_trip(expr):
    assert from_spec(to_spec(expr)) == expr


def test_hfamily_alpha_json_is_exact():
    assert to_spec(HFamily(Fraction(1, 4)))["alpha"] == {"num": 1, "den": 4}


def test_mapping_round_trip():
    M = mapping(A, B, B)
    assert mapping_from_spec(mapping_to_spec(M)) == M


def test_complement_round_trip_fingerprint():
    c = Complement(G, mapping(A, B, B), (1, 3))
    assert fingerprint(from_spec(to_spec(c))) == fingerprint(c)


def test_unknown_kind():
    with pytest.raises(ValueError):
        from_spec({"kind": "lehmer"})
