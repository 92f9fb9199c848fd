import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pipia.check import check_judgment
from pipia.infer import (InferenceError, SemiringEq, StagePred, flatten_type_eq, format_judgment, generate,
                         parse_judgment, substitute)
from pipia.pipeline import SolveConfig, infer_end_to_end
from pipia.semiring import ONE_SCHEDULE
from pipia.simple_types import SimpleTypeError
from pipia.symbolic import SVar, sched_vars
from pipia.syntax import COM, EXP, Arrow, Source, parse, parse_source
from termgen import random_term

PIA = Path(__file__).resolve().parent.parent / "examples_pia"


def test_identity_rule():
    s = parse_source("x : exp\n---\nx")
    j = generate(s.term, None, s.declared)
    assert j.constraints == [SemiringEq(SVar("ctx_x"), ONE_SCHEDULE)]
    assert j.type == EXP


def test_weakening_adds_no_constraint():
    s = parse_source("y : exp\n---\n\\x. y")
    j = generate(s.term, None, s.declared)
    j0 = j.type.ann
    assert isinstance(j0, SVar)
    assert not any(j0 in sched_vars(c.lhs) | sched_vars(c.rhs) for c in j.constraints
                   if isinstance(c, SemiringEq))


def test_flatten_type_equations():
    a, b, c, d, e, f = (SVar(n) for n in "ABCDEF")
    assert flatten_type_eq(EXP, EXP) == []
    assert flatten_type_eq(Arrow(a, EXP, EXP), Arrow(b, EXP, EXP)) == [SemiringEq(a, b)]
    lhs = Arrow(a, Arrow(c, EXP, EXP), Arrow(e, EXP, EXP))
    rhs = Arrow(b, Arrow(d, EXP, EXP), Arrow(f, EXP, EXP))
    assert set(flatten_type_eq(lhs, rhs)) == {SemiringEq(a, b), SemiringEq(c, d), SemiringEq(e, f)}


def test_flatten_rejects_shape_mismatch():
    with pytest.raises(InferenceError):
        flatten_type_eq(COM, Arrow(SVar("A"), EXP, EXP))


def test_op_side_conditions():
    rels = sorted(c.rel for c in generate(parse("1 + 1")).constraints if isinstance(c, StagePred))
    assert rels == ["contractive", "contractive", "neq_id", "neq_id"]


def test_empty_model_on_concrete_judgment():
    j = generate(parse("skip"))
    assert substitute(j, {}).term == j.term and j.constraints == []


def test_judgment_text_round_trip():
    res = infer_end_to_end((PIA / "incx.pia").read_text())
    text = format_judgment(res.judgment)
    back = parse_judgment(text)
    assert format_judgment(back) == text
    check_judgment(back)


def test_unbound_identifier():
    with pytest.raises((SimpleTypeError, InferenceError)):
        generate(parse("\\x. y"))


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10 ** 6))
def test_solver_models_substitute_to_checked_judgments(seed):
    t = random_term(random.Random(seed), 4, 1)
    res = infer_end_to_end(Source({}, t), SolveConfig(pipeline=False))
    assert res.judgment.is_concrete()
    check_judgment(res.judgment)
