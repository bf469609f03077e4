import json
import math

import pytest

from conftest import DOCUMENTED_COMMANDS
from invmeans.cli import main, parse_mapping, parse_mean, parse_subset
from invmeans.complementary import closure_generate
from invmeans.means import (
    B,
    G,
    HFamily,
    Power,
    Projection,
    SubsetArithmetic,
    fingerprint,
    from_spec,
    mapping,
    mapping_fingerprint,
    mapping_from_spec,
    A,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_parse_shorthand():
    from fractions import Fraction

    assert parse_mean("arith") == A
    assert parse_mean("power:2") == Power(2.0)
    assert parse_mean("proj:2") == Projection(2)
    assert parse_mean("hfam:-1/2") == HFamily(Fraction(-1, 2))
    assert parse_mean("subset:1+3") == SubsetArithmetic((1, 3))
    assert parse_mean('{"kind": "beta"}') == B
    assert parse_mapping("[arith,beta,beta]") == mapping(A, B, B)
    assert parse_mapping('[{"kind": "geometric"}, "harm"]').p == 2


def test_parse_subset_forms():
    assert parse_subset("1,3", 3) == (1, 3)
    assert parse_subset("mask:5", 3) == (1, 3)
    assert parse_subset("0b110", 3) == (2, 3)


def test_mean_file_argument(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text('[{"kind": "arithmetic"}, {"kind": "harmonic"}]')
    code, obj = run_json(capsys, "invariance-check", "--K", "geo", "--M", str(path), "--samples", "20")
    assert code == 0 and obj["residual"] < 1e-12


def test_eval(capsys):
    code, obj = run_json(capsys, "eval", "--K", "beta", "--x", "1,2,3")
    assert code == 0
    assert math.isclose(obj["value"], math.sqrt(3), rel_tol=1e-15)


def test_iterate_json_and_csv(capsys):
    code, obj = run_json(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2")
    assert code == 0 and obj["converged"]
    assert abs(obj["limit"] - 1.4567910310469068) < 1e-15
    code, out, _ = run(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "n,x1,x2"
    assert lines[1] == "0,1.0,2.0"
    assert len(lines) == obj["iterations"] + 2


def test_iterate_not_converged(capsys):
    code, obj = run_json(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2", "--max-iter", "2")
    assert code == 2
    assert obj["error"] == "NotConverged"
    assert obj["report"]["iterations"] == 2


def test_invariance_check_witness(capsys):
    code, obj = run_json(capsys, "invariance-check", "--K", "arith", "--M", "[arith,geo]", "--x", "1,4")
    assert code == 0
    assert obj["residual"] > 0 and obj["witness"] == [1.0, 4.0]


def test_complement_example(capsys):
    code, obj = run_json(capsys, "complement", "--K", "geometric", "--M", "[arith,harm]", "--S", "2", "--x", "1,4")
    assert code == 0
    assert math.isclose(obj["value"], 1.6, rel_tol=1e-12)
    assert obj["mean"]["kind"] == "complement"


def test_complement_not_invariant(capsys):
    code, obj = run_json(capsys, "complement", "--K", "arith", "--M", "[arith,max,max]", "--S", "1,2", "--x", "1,2,3")
    assert code == 2 and obj["error"] == "NotInvariant"


def test_complete_example1(capsys):
    code, obj = run_json(
        capsys, "complete", "--K", "arithmetic", "--fixed", '{"1": "subset:1+2", "2": "proj:2"}', "--S", "3", "--x", "0.1,2,0.1"
    )
    assert code == 2 and obj["error"] == "NoSolutionInRange"


def test_complete_solvable_list_form(capsys):
    # A(x) fixed on coordinates 1 and 2 forces the third to be A(x) as well
    code, obj = run_json(capsys, "complete", "--K", "arith", "--fixed", '["arith", "arith", null]', "--S", "3", "--x", "1,2,6")
    assert code == 0 and math.isclose(obj["value"], 3.0, rel_tol=1e-12)


def test_hfam_closure(capsys):
    code, obj = run_json(capsys, "hfam-closure", "--p", "3", "--depth", "1")
    assert code == 0
    assert obj["count"] == 4 and len(obj["nodes"]) == 4
    assert obj["denominators_ok"] and obj["membership"]


def test_hfam_closure_budget(capsys):
    code, obj = run_json(capsys, "hfam-closure", "--p", "3", "--depth", "4", "--budget", "5")
    assert code == 2 and obj["error"] == "BudgetExceeded"


def test_closure_json_and_dot(capsys):
    code, obj = run_json(capsys, "closure", "--K", "geo", "--M", "[arith,beta,beta]", "--depth", "1", "--no-exact", "--samples", "32")
    assert code == 0 and not obj["exact"]
    assert len(obj["nodes"]) == 4
    code, out, _ = run(capsys, "closure", "--K", "geo", "--M", "[arith,beta,beta]", "--depth", "1", "--format", "dot")
    assert code == 0 and out.startswith("digraph")
    assert out.count("->") == 3


def test_funceq_verify(capsys):
    code, obj = run_json(capsys, "funceq-verify", "--phi", "log", "--K", "geo", "--M", "[arith,beta,beta]", "--samples", "30")
    assert code == 0
    assert obj["eq2_residual"] < 1e-10
    assert set(obj["eq3_residuals"]) == {str(m) for m in range(1, 8)}
    code, obj = run_json(capsys, "funceq-verify", "--phi", '{"kind": "power", "r": 2}', "--K", "geo", "--M", "[arith,harm]", "--samples", "30")
    assert max(obj["eq3_residuals"].values()) < 1e-10


def test_funceq_negative(capsys):
    code, obj = run_json(capsys, "funceq-verify", "--phi", "identity", "--K", "arith", "--M", "[arith,geo]", "--x", "1,4")
    assert code == 0
    assert obj["eq2_residual"] == pytest.approx(0.25)


def test_funceq_csv(capsys):
    code, out, _ = run(capsys, "funceq-verify", "--phi", "identity", "--K", "geo", "--M", "[arith,harm]", "--x", "1,4", "--format", "csv")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "equation,S_mask,residual"
    assert [r.split(",")[1] for r in rows if r.startswith("eq3")] == ["1", "2", "3"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["eval", "--K", "nonsense", "--x", "1,2"],
        ["eval", "--K", "arith", "--x", "1,two"],
        ["eval", "--K", "gini", "--x", "1,2"],
        ["eval", "--K", "arith", "--x", "1,2", "--format", "dot"],
        ["complement", "--K", "geo", "--M", "[arith,harm]", "--S", "2", "--x", "1,4", "--format", "csv"],
        ["funceq-verify", "--phi", "sine", "--K", "geo", "--M", "[arith,harm]"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""


def test_domain_error_on_negative_input(capsys):
    code, obj = run_json(capsys, "eval", "--K", "geo", "--x=-1,2")
    assert code == 2 and obj["error"] == "DomainViolation"


def test_tolerance_env(capsys, monkeypatch):
    _, tight = run_json(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2")
    monkeypatch.setenv("INVMEANS_TOL", "1e-3")
    _, loose = run_json(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2")
    assert loose["iterations"] < tight["iterations"]
    _, explicit = run_json(capsys, "iterate", "--M", "[arith,geo]", "--x", "1,2", "--tol", "1e-13")
    assert explicit["iterations"] == tight["iterations"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "--K", "arith", "--x", "1,2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["value"] == 1.5


@pytest.mark.parametrize("argv", DOCUMENTED_COMMANDS, ids=lambda a: " ".join(a[:3]))
def test_in_process_determinism(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    assert first[0] in (0, 2)


def _collect_specs(obj, acc):
    if isinstance(obj, dict):
        if "kind" in obj and isinstance(obj["kind"], str):
            acc.append(obj)
            return
        for v in obj.values():
            _collect_specs(v, acc)
    elif isinstance(obj, list):
        for v in obj:
            _collect_specs(v, acc)


def test_emitted_specs_round_trip(capsys):
    M = mapping(A, B, B)
    tree = closure_generate(G, M, 2, exact=False)
    code, obj = run_json(capsys, "closure", "--K", "geo", "--M", "[arith,beta,beta]", "--depth", "2", "--no-exact")
    assert code == 0
    for node, emitted in zip(tree.nodes, obj["nodes"]):
        assert mapping_fingerprint(mapping_from_spec(emitted["mapping"])) == mapping_fingerprint(node.mapping)
    for spec, mean in zip(obj["k0"], tree.k0):
        assert fingerprint(from_spec(spec), 3) == fingerprint(mean, 3)

    code, obj = run_json(capsys, "complement", "--K", "geo", "--M", "[arith,beta,beta]", "--S", "1,2", "--x", "1,2,3")
    mean = from_spec(obj["mean"])
    assert math.isclose(mean((1, 2, 3)), obj["value"], rel_tol=1e-12)

    specs = []
    for argv in DOCUMENTED_COMMANDS:
        code, out, _ = run(capsys, *argv)
        if out.lstrip().startswith("{"):
            _collect_specs(json.loads(out), specs)
    assert specs
    for spec in specs:
        if spec["kind"] in ("complement", "iterated"):
            continue  # arity is carried by M
        expr = from_spec(spec)
        assert fingerprint(from_spec(json.loads(json.dumps(spec))), 3 if expr.arity is None else expr.arity) == fingerprint(
            expr, 3 if expr.arity is None else expr.arity
        )
