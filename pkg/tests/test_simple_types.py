import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipia.simple_types import COM, EXP, SimpleTypeError, arrows, check_annotation_map, infer_simple
from pipia.syntax import parse, parse_source
from termgen import random_term


def test_ground_programs():
    assert infer_simple(parse("new x. x := !x + 1")).type == COM
    assert infer_simple(parse("skip")).type == COM
    assert infer_simple(parse("1 + 1")).type == EXP


def test_convolution_operator():
    s = parse_source("f : exp -> exp\n"
                     "*1 : (exp -> exp) -> (exp -> exp) -> exp -> exp\n"
                     "*2 : (exp -> exp) -> (exp -> exp) -> exp -> exp\n---\n(f *1 f) *2 (f *1 f)")
    assert infer_simple(s.term, s.declared).type == arrows(EXP, EXP)


@pytest.mark.parametrize("src", ["skip skip", "seq 1 skip", "if skip then 1 else 1", "(\\x. x x)"])
def test_ill_typed(src):
    with pytest.raises(SimpleTypeError):
        infer_simple(parse(src))


def test_unbound_identifier():
    with pytest.raises(SimpleTypeError):
        infer_simple(parse("y + 1"))


def test_branch_type_follows_context():
    t = parse("if 1 then skip else skip")
    assert infer_simple(t).type == COM


@settings(max_examples=100)
@given(st.integers(0, 10 ** 6))
def test_generated_terms_have_ground_types(seed):
    t = random_term(random.Random(seed), 5, 0)
    typing = infer_simple(t)
    assert typing.type in (COM, EXP)
    assert check_annotation_map(t, typing)
