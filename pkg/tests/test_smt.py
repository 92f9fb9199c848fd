from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pipia import smt
from pipia.infer import StagePred, generate
from pipia.pipeline import SolveConfig, system_constraints
from pipia.semiring import IDENTITY, Stage
from pipia.symbolic import StageVar, SVar
from pipia.syntax import parse_source

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden"


def test_render_numbers_and_symbols():
    assert smt.num(F(3, 4)) == "(/ 3 4)"
    assert smt.num(F(-1, 2)) == "(- (/ 1 2))"
    assert smt.quote("J3[0].s") == "|J3[0].s|"
    assert smt.quote("w.s") == "w.s"
    assert smt.render(("<=", smt.add("a", "b"), 1)) == "(<= (+ a b) 1)"


def test_int_script_shape():
    sc = smt.emit_int([(("+", "n1", "n2"), 4)], {"n1": 1}, ["n1", "n2"], 4)
    assert len(sc.declarations) == 2
    # two bounds per symbol, the lower bound and the equation
    assert len(sc.assertions) == 2 * 2 + 2
    assert "(set-logic QF_NIA)" in sc.text()
    res = smt.run_solver(sc)
    assert res.status == "sat" and res.model["n1"] + res.model["n2"] == 4 and res.model["n1"] >= 1


def test_stage_formulas():
    x = ("s", "p")
    assert smt.contractive(x) == [("<=", 0, "s"), ("<=", "s", 1), ("<=", 0, "p"), ("<=", ("+", "s", "p"), 1)]
    assert smt.neq_id(x) == ("not", ("and", ("=", "s", 1), ("=", "p", 0)))
    env = {"s": F(1), "p": F(0)}
    assert not smt.evaluate(smt.neq_id(x), env)


@given(st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1), st.fractions(0, 1))
def test_compose_formula_matches_stage_product(s1, p1, s2, p2):
    if s1 + p1 > 1 or s2 + p2 > 1:
        return
    x, y = Stage(s1, p1), Stage(s2, p2)
    s, p = smt.compose(("a", "b"), ("c", "d"))
    env = {"a": s1, "b": p1, "c": s2, "d": p2}
    assert Stage(smt.evaluate(s, env), smt.evaluate(p, env)) == x * y


def test_trivial_and_contradictory_scripts():
    sc = smt.SmtScript("QF_NRA")
    assert smt.run_solver(sc).status == "sat"
    sc = smt.SmtScript("QF_NRA")
    sc.declare("x")
    sc.declare("y")
    sc.assert_(("<", "x", "y"))
    sc.assert_(("<", "y", "x"))
    assert smt.run_solver(sc).status == "unsat"


def test_model_parsing_forms():
    text = """(
      (define-fun a () Real (/ 1.0 8.0))
      (define-fun b () Real (- 0.25))
      (define-fun c () Int 3)
    )"""
    model, approx = smt.parse_model(text)
    assert model == {"a": F(1, 8), "b": F(-1, 4), "c": F(3)} and approx == []
    model, approx = smt.parse_model("((x 0.5) (y (root-obj (+ (^ x 2) (- 2)) 1)))")
    assert model == {"x": F(1, 2)} and approx == ["y"]
    model, approx = smt.parse_model("((y 1.4142?))")
    assert approx == ["y"] and model["y"] == F("1.4142")


def test_missing_solver_is_reported():
    with pytest.raises(smt.SmtError):
        smt.run_solver(smt.SmtScript("QF_NRA"), cmd="no-such-solver-binary")


def test_solver_env_override(monkeypatch):
    monkeypatch.setenv(smt.SOLVER_ENV, "z3 -in -T:5")
    assert smt.solver_command() == ["z3", "-in", "-T:5"]
    assert smt.solver_command("cvc5") == ["cvc5"]


@pytest.mark.parametrize("name", ["incx.sizes", "incx.stages", "adders.sizes", "adders.stages"])
def test_golden_scripts(name, capsys):
    from pipia.cli import main

    prog, phase = name.split(".")
    assert main(["smt", str(ROOT / "examples_pia" / f"{prog}.pia"), "--phase", phase]) == 0
    assert capsys.readouterr().out == (GOLDEN / f"{name}.smt2").read_text()


# --- grid oracle ----------------------------------------------------------------------

def test_oracle_single_stage():
    x = StageVar("x")
    cons = [StagePred("contractive", (x,)), StagePred("neq_id", (x,)), StagePred("scale_eq", (x, F(1, 2)))]
    model = smt.brute_oracle(cons, {}, F(1, 4))
    assert model[x].scale == F(1, 2) and model[x] != IDENTITY


def test_oracle_unsat():
    x, y = StageVar("x"), StageVar("y")
    assert smt.brute_oracle([StagePred("lt", (x, y)), StagePred("lt", (y, x))], {}) is None


def test_oracle_increment_on_grid():
    src = parse_source((ROOT / "examples_pia" / "incx.pia").read_text())
    j = generate(src.term, None, src.declared, write_stage=Stage(F(1, 8), 0))
    cons = system_constraints(j, SolveConfig(write_phase=0))
    sizes = {v: 1 for v in j.symbols if isinstance(v, SVar)}
    model = smt.brute_oracle(cons, sizes, F(1, 8), max_stages=8)
    assert model is not None


def test_oracle_refuses_large_systems():
    vs = [StageVar(f"v{i}") for i in range(7)]
    with pytest.raises(smt.OracleTooLarge):
        smt.brute_oracle([StagePred("contractive", (v,)) for v in vs], {})
