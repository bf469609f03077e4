from decimal import Decimal, getcontext

import pytest
from hypothesis import strategies as st

from invmeans.means import A, B, F, G, H, Domain, SampleConfig, mapping

# Frozen before the engine was written: Gauss AGM of (1, 2) at 60 digits,
# computed by tests/conftest.py::decimal_agm and by scripts/agm_oracle.py (mpmath).
AGM_1_2 = "1.45679103104690686918643238326508197497386394322130559079417"


def decimal_agm(a, b, digits=60):
    getcontext().prec = digits + 10
    a, b = Decimal(a), Decimal(b)
    eps = Decimal(10) ** (-(digits + 5))
    while abs(a - b) > eps:
        a, b = (a + b) / 2, (a * b).sqrt()
    return a


def positive_vectors(min_size=2, max_size=6, lo=1e-2, hi=1e2):
    return st.lists(
        st.floats(min_value=lo, max_value=hi, allow_nan=False, allow_infinity=False),
        min_size=min_size,
        max_size=max_size,
    )


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def cfg():
    return SampleConfig(count=200, seed=42, domain=Domain(0.0, 10.0))


@pytest.fixture
def small_cfg():
    return SampleConfig(count=32, seed=42, domain=Domain(0.0, 10.0))


@pytest.fixture(params=[2, 3, 4])
def beta_root(request):
    p = request.param
    return p, mapping(A, *([B] * (p - 1)))


CATALOG = {
    "A,H": (G, mapping(A, H)),
    "A,F,H": (G, mapping(A, F, H)),
    "A,B,B": (G, mapping(A, B, B)),
    "A,B,B,B": (G, mapping(A, B, B, B)),
}


# every command shown in the README and the CLI help
DOCUMENTED_COMMANDS = [
    ["eval", "--K", "beta", "--x", "1,2,3"],
    ["eval", "--K", "hfam:1/4", "--x", "1,2,3"],
    ["iterate", "--M", "[arith,geo]", "--x", "1,2"],
    ["iterate", "--M", "[arith,geo]", "--x", "1,2", "--trace", "--format", "csv"],
    ["invariance-check", "--K", "geo", "--M", "[arith,gini,harm]"],
    ["invariance-check", "--K", "arith", "--M", "[arith,geo]", "--x", "1,4"],
    ["complement", "--K", "geometric", "--M", "[arith,harm]", "--S", "2", "--x", "1,4"],
    ["complement", "--K", "geo", "--M", "[arith,beta,beta]", "--S", "mask:3", "--x", "1,2,3"],
    ["complete", "--K", "arithmetic", "--fixed", '{"1": "subset:1+2", "2": "proj:2"}', "--S", "3", "--x", "0.1,2,0.1"],
    ["closure", "--K", "geo", "--M", "[arith,beta,beta]", "--depth", "1", "--no-exact", "--samples", "32"],
    ["closure", "--K", "geo", "--M", "[arith,beta,beta]", "--depth", "2", "--format", "dot"],
    ["hfam-closure", "--p", "3", "--depth", "1"],
    ["hfam-closure", "--p", "3", "--depth", "4", "--format", "dot"],
    ["funceq-verify", "--phi", "log", "--K", "geo", "--M", "[arith,beta,beta]", "--samples", "50"],
    ["funceq-verify", "--phi", "identity", "--K", "iterated", "--M", "[arith,geo]", "--x", "1,4", "--format", "csv"],
]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
