import itertools
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pipia.pipeline import (PipelineError, SolveConfig, infer_end_to_end, order_guesses, residual_failures,
                            solve_sizes, system_constraints)
from pipia.infer import generate
from pipia.semiring import IDENTITY, Schedule, Stage, is_pipeline
from pipia.symbolic import StageVar, SVar
from pipia.syntax import Const, parse_source, subterms

PIA = Path(__file__).resolve().parent.parent / "examples_pia"


def _src(name):
    return (PIA / name).read_text()


def test_config_from_text():
    cfg = SolveConfig.from_text("write_scale = 1/4\nwrite_phase = free  # solver picks\npipeline = no\n"
                                "size_bound_max = 3\ntimeout = 2.5")
    assert cfg.write_scale == F(1, 4) and cfg.write_phase is None and cfg.write_stage is None
    assert not cfg.pipeline and cfg.size_bound_max == 3 and cfg.timeout == 2.5
    assert SolveConfig(write_phase=0).write_stage == Stage(F(1, 8), 0)
    with pytest.raises(ValueError):
        SolveConfig.from_text("colour = blue")
    with pytest.raises(ValueError):
        SolveConfig(write_scale=0)


def test_order_guesses_start_with_identity_and_cover_everything():
    guesses = list(order_guesses([2, 1, 3]))
    assert guesses[0] == ((0, 1), (0,), (0, 1, 2))
    assert len(guesses) == len(set(guesses)) == 2 * 1 * 6


@given(st.lists(st.integers(1, 3), max_size=3))
def test_order_guesses_enumerate_product(sizes):
    expected = set(itertools.product(*(itertools.permutations(range(n)) for n in sizes)))
    assert set(order_guesses(sizes)) == expected


def test_adder_sizes():
    s = parse_source(_src("adders.pia"))
    j = generate(s.term, None, s.declared)
    sizes = {v.name: n for v, n in solve_sizes(system_constraints(j, SolveConfig()), j.holes).items()}
    # four uses of a two-stage f
    assert sizes["ctx_f"] == 4 and sizes["ctx_x"] == 8


def test_identity_term_is_trivial():
    res = infer_end_to_end("skip")
    assert res.sizes == {} and res.stats.solver_calls == 0


def test_increment_has_arbitrary_adder_stage():
    res = infer_end_to_end(_src("incx.pia"), SolveConfig(write_phase=0))
    op = next(t for t in subterms(res.judgment.term) if isinstance(t, Const) and t.kind == "op")
    assert op.params[0] != IDENTITY and op.params[1] != IDENTITY
    assert res.judgment.term.fun.params[1] == Schedule([Stage(F(1, 8), 0) * op.params[0]])


def test_adders_pipelined_model():
    res = infer_end_to_end(_src("adders.pia"), SolveConfig(pipeline=True))
    assert not residual_failures(res.constraints, res.model, True)
    assert all(is_pipeline(v) for v in res.model.values() if isinstance(v, Schedule))
    assert res.stats.variables > 0 and res.stats.assertions > res.stats.variables


def test_parallel_and_sequential_agree():
    a = infer_end_to_end(_src("adders.pia"), SolveConfig(sequential=False))
    b = infer_end_to_end(_src("adders.pia"), SolveConfig(sequential=True))
    assert a.model == b.model


def test_error_kinds():
    with pytest.raises(PipelineError) as e:
        infer_end_to_end("c : com\n---\npar c c", SolveConfig(pipeline=True))
    assert e.value.kind == "pipeline-unsatisfiable"
    infer_end_to_end("c : com\n---\npar c c", SolveConfig(pipeline=False))
    with pytest.raises(PipelineError) as e:
        infer_end_to_end(_src("adders.pia"), SolveConfig(size_bound_max=2))
    assert e.value.kind == "size-unsatisfiable"


def test_solver_failure_surfaces():
    from pipia.smt import SmtError

    with pytest.raises(SmtError):
        infer_end_to_end(_src("adders.pia"), SolveConfig(solver="no-such-solver-binary"))


def test_fixed_write_stage_is_respected():
    res = infer_end_to_end(_src("incx.pia"), SolveConfig(write_scale=F(1, 4), write_phase=F(1, 8)))
    assert res.model.get(StageVar("w"), Stage(F(1, 4), F(1, 8))) == Stage(F(1, 4), F(1, 8))
    assert res.derivation.write_stage == Stage(F(1, 4), F(1, 8))


def test_holes_get_nonempty_schedules():
    res = infer_end_to_end(_src("convolution.pia"))
    assert all(res.sizes[h] >= 1 for h in res.symbolic.holes)
    assert res.sizes[SVar("ctx_f")] == 4
