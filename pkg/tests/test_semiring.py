from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipia.semiring import (IDENTITY, INF, NAT, ONE_SCHEDULE, SCHEDULE, ZERO_SCHEDULE, ZOI, Schedule,
                            SemiringError, Stage, egli_milner_leq, fmt_q, is_pipeline, pipeline_order, q,
                            sr_add, sr_mul, stage_compose, strict_fifo, strictly_before)


@st.composite
def stages(draw, den=64):
    s = draw(st.integers(0, den))
    p = draw(st.integers(0, den - s))
    return Stage(F(s, den), F(p, den))


schedules = st.lists(stages(), max_size=4).map(Schedule)


# --- stages -------------------------------------------------------------------------

def test_compose_examples():
    x = Stage.of(0.5, 0.1)
    assert IDENTITY * x == x
    assert Stage.of(0.5, 0.25) * Stage.of(0.5, 0.1) == Stage.of(0.25, 0.3)
    assert Stage.of(0.5, 0.25) * Stage.of(0.5, 0.2) == Stage.of(0.25, 0.35)


def test_intervals():
    assert IDENTITY.interval() == (0, 1)
    assert Stage.of(0.5, 0.1).interval() == (F(1, 10), F(3, 5))
    assert Stage.of(0.5, 0.2).interval() == (F(1, 5), F(7, 10))


def test_orders():
    x, y = Stage.of(0.5, 0.1), Stage.of(0.5, 0.2)
    assert egli_milner_leq(x, y) and strict_fifo(x, y)
    assert egli_milner_leq(x, x) and not strict_fifo(x, x)
    assert strictly_before(Stage.of(0.4, 0), Stage.of(0.4, 0.5))
    assert not strictly_before(x, y)


def test_non_contractive_rejected():
    with pytest.raises(SemiringError):
        Stage.of(0.75, 0.5)
    with pytest.raises(SemiringError):
        Stage.of(-0.1, 0)


def test_decimal_conversion_is_exact():
    assert q(0.1) == F(1, 10)
    assert q("0.265625") == F(17, 64)
    assert fmt_q(F(17, 64)) == "0.265625"
    assert fmt_q(F(1, 3)) == "1/3"


@given(stages(), stages(), stages())
def test_compose_associative(x, y, z):
    assert (x * y) * z == x * (y * z)


@given(stages(), stages())
def test_compose_stays_inside_outer_interval(x, y):
    c = stage_compose(x, y)
    assert x.start <= c.start and c.end <= x.end


@given(stages(), stages(), st.fractions(0, 1))
def test_compose_is_function_composition(x, y, t):
    assert (x * y).apply(t) == x.apply(y.apply(t))


# --- schedules ----------------------------------------------------------------------

def test_schedule_products():
    x, y, z = Stage.of(0.5, 0), Stage.of(0.5, 0.1), Stage.of(0.25, 0.5)
    assert Schedule([x]) * Schedule([y, z]) == Schedule([x * y, x * z])
    j = Schedule([y, z])
    assert ONE_SCHEDULE * j == j == j * ONE_SCHEDULE
    assert ZERO_SCHEDULE * j == ZERO_SCHEDULE


def test_sizes_and_pipelines():
    f = Schedule.of((0.5, 0.1), (0.5, 0.2))
    assert f.size() == 2 and ZERO_SCHEDULE.size() == 0
    assert is_pipeline(f)
    assert not is_pipeline(Schedule.of((0.5, 0.1), (0.5, 0.1)))
    j3 = Schedule.of((0.5, 0.125), (0.5, 0.25), (0.5, 0.375), (0.5, 0.4375))
    assert j3.size() == 4 and is_pipeline(j3)
    assert pipeline_order(j3) == j3.stages()


def test_multiset_equality_is_order_free():
    a, b = Stage.of(0.5, 0.1), Stage.of(0.5, 0.2)
    assert Schedule([a, b, a]) == Schedule([b, a, a])
    assert Schedule([a, b, a]).multiplicity(a) == 2


@settings(max_examples=200)
@given(schedules, schedules, schedules)
def test_schedule_semiring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c
    assert (a * b).size() == a.size() * b.size()


@given(schedules)
def test_pipelines_are_sets(j):
    if is_pipeline(j):
        assert all(m == 1 for _, m in j.entries)


# --- other instances ----------------------------------------------------------------

def test_nat_and_zoi():
    assert sr_add(NAT, 2, 3) == 5 and sr_mul(NAT, 2, 3) == 6
    assert sr_add(ZOI, 1, 1) is INF and sr_mul(ZOI, INF, 0) == 0 and sr_add(ZOI, 0, 1) == 1
    with pytest.raises(SemiringError):
        sr_add(ZOI, 2, 0)
    assert sr_mul(SCHEDULE, ONE_SCHEDULE, ONE_SCHEDULE) == ONE_SCHEDULE


@given(st.sampled_from([0, 1, INF]), st.sampled_from([0, 1, INF]), st.sampled_from([0, 1, INF]))
def test_zoi_distributes(a, b, c):
    assert ZOI.mul(a, ZOI.add(b, c)) == ZOI.add(ZOI.mul(a, b), ZOI.mul(a, c))
