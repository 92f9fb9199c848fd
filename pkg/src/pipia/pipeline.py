"""Two-stage inference of pipeline schedules.

Sizes are solved first over the naturals (the size homomorphism maps
``+`` to ``+`` and ``×`` to ``×``).  With sizes fixed, each schedule
variable is expanded into that many stage unknowns and the system is
solved over the reals.  Schedule equality is matched stage-wise under a
guessed order, retried deterministically on failure.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Iterator, Mapping

from . import smt
from .infer import (
    Generator,
    Judgment,
    PipePred,
    SemiringEq,
    SizeEq,
    SizeGe,
    StagePred,
    constraint_holds,
    generate,
    substitute,
)
from .semiring import Schedule, SemiringError, Stage, is_pipeline, q
from .simple_types import infer_simple
from .symbolic import SAdd, SMul, SSingleton, StageVar, SVar, sched_vars
from .syntax import WRITE_STAGE, Const, Source, parse_source


class PipelineError(Exception):
    """Inference failure; ``kind`` is one of the documented error names."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


@dataclass
class SolveConfig:
    write_scale: Fraction = Fraction(1, 8)
    write_phase: Fraction | None = None  # None leaves the phase to the solver
    size_bound_start: int = 1
    size_bound_max: int = 16
    order_retry_budget: int = 64
    solver: str | None = None
    timeout: float = 60.0
    pipeline: bool = True
    prefer_positive: bool = True  # first look for models without zero-scale stages
    sequential: bool = True
    jobs: int = 4

    def __post_init__(self):
        self.write_scale = q(self.write_scale)
        if self.write_phase is not None:
            self.write_phase = q(self.write_phase)
        if self.size_bound_start < 1:
            raise ValueError("size_bound_start must be at least 1")
        if self.write_scale <= 0:
            raise ValueError("the write stage cannot be instantaneous")

    @property
    def write_stage(self) -> Stage | None:
        if self.write_phase is None:
            return None
        return Stage(self.write_scale, self.write_phase)

    @classmethod
    def from_text(cls, text: str) -> "SolveConfig":
        """``key = value`` lines; ``#`` starts a comment."""
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = (s.strip() for s in line.partition("="))
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            if key in ("write_scale", "write_phase"):
                kw[key] = None if value.lower() == "free" else q(value)
            elif key in ("pipeline", "sequential", "prefer_positive"):
                kw[key] = value.lower() in ("1", "true", "yes", "on")
            elif key == "solver":
                kw[key] = value
            elif key == "timeout":
                kw[key] = float(value)
            else:
                kw[key] = int(value)
        return cls(**kw)


# --- constants -----------------------------------------------------------

def constant_constraints(c: Const, sigma: str = "com"):
    """Type template and side constraints of one constant occurrence."""
    from .simple_types import COM, EXP

    g = Generator()
    inst, ty = g.constant(c, COM if sigma == "com" else EXP)
    return inst, ty, g.constraints


# --- sizes ---------------------------------------------------------------

def size_formula(e):
    if isinstance(e, Schedule):
        return e.size()
    if isinstance(e, SSingleton):
        return 1
    if isinstance(e, SVar):
        return e.name
    if isinstance(e, SAdd):
        return smt.add(*(size_formula(a) for a in e.args))
    if isinstance(e, SMul):
        return smt.mul(*(size_formula(a) for a in e.args))
    raise TypeError(e)


def schedule_vars(constraints, holes=()) -> list[SVar]:
    out: dict = {}
    for v in holes:
        out[v] = None
    for c in constraints:
        for a in _args(c):
            for v in sorted((v for v in sched_vars(a) if isinstance(v, SVar)), key=lambda v: v.name):
                out[v] = None
    return list(out)


def _args(c) -> tuple:
    if isinstance(c, (SemiringEq, SizeEq)):
        return (c.lhs, c.rhs)
    if isinstance(c, (PipePred, SizeGe)):
        return (c.expr,)
    return tuple(a for a in c.args if not isinstance(a, Fraction))


def size_script(constraints, holes, bound: int) -> smt.SmtScript:
    names = [v.name for v in schedule_vars(constraints, holes)]
    eqs = [(size_formula(c.lhs), size_formula(c.rhs)) for c in constraints
           if isinstance(c, (SemiringEq, SizeEq))]
    lower: dict = {v.name: 1 for v in holes}
    for c in constraints:
        if isinstance(c, SizeGe) and isinstance(c.expr, SVar):
            lower[c.expr.name] = max(lower.get(c.expr.name, 0), c.bound)
    sc = smt.emit_int(eqs, lower, names, bound)
    for c in constraints:
        if isinstance(c, SizeGe) and not isinstance(c.expr, SVar):
            sc.assert_((">=", size_formula(c.expr), c.bound))
    sc.comments.append(f"schedule sizes, global bound {bound}")
    return sc


@dataclass
class Stats:
    size_variables: int = 0
    size_assertions: int = 0
    variables: int = 0
    assertions: int = 0
    size_bound: int = 0
    order_attempts: int = 0
    solver_calls: int = 0
    wall_ms: float = 0.0

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def solve_sizes(constraints, holes=(), cfg: SolveConfig | None = None, stats: Stats | None = None) -> dict:
    """Smallest global bound B with a size model; returns SVar -> size."""
    cfg = cfg or SolveConfig()
    stats = stats if stats is not None else Stats()
    vars_ = schedule_vars(constraints, holes)
    if not vars_:
        return {}
    for bound in range(cfg.size_bound_start, cfg.size_bound_max + 1):
        sc = size_script(constraints, holes, bound)
        res = smt.solve(sc, cfg.solver, cfg.timeout)
        stats.solver_calls += 1
        stats.size_variables = len(sc.declarations)
        stats.size_assertions = len(sc.assertions)
        stats.size_bound = bound
        if res.status == "timeout":
            raise PipelineError("solver-timeout", "size phase")
        if res.status == "sat":
            return {v: int(res.model.get(v.name, 0)) for v in vars_}
    raise PipelineError("size-unsatisfiable", f"no size model with bound {cfg.size_bound_max}")


# --- stages --------------------------------------------------------------

def _pair_names(v, i=None) -> tuple[str, str]:
    base = v.name if i is None else f"{v.name}[{i}]"
    return (f"{base}.s", f"{base}.p")


class Lowering:
    """Real-arithmetic view of a constraint system with known sizes."""

    def __init__(self, constraints, sizes: Mapping, pipeline: bool = True):
        self.constraints = list(constraints)
        self.sizes = dict(sizes)
        self.pipeline = pipeline
        self.stage_vars: list[StageVar] = []
        self.sched_vars: list[SVar] = []
        for c in self.constraints:
            for a in _args(c):
                for v in sorted(sched_vars(a), key=lambda v: (isinstance(v, SVar), v.name)):
                    bucket = self.sched_vars if isinstance(v, SVar) else self.stage_vars
                    if v not in bucket:
                        bucket.append(v)
        for v in self.sched_vars:
            if v not in self.sizes:
                raise smt.SmtError(f"no size for schedule variable {v.name}")
        self.base: list = []
        self.slots: list[tuple] = []  # (lhs terms, rhs terms, chain) with guessed rhs order
        self._build()

    def declarations(self) -> list[str]:
        out = []
        for v in self.stage_vars:
            out += _pair_names(v)
        for v in self.sched_vars:
            for i in range(self.sizes[v]):
                out += _pair_names(v, i)
        return out

    def stage(self, x):
        if isinstance(x, Stage):
            return smt.const_pair(x)
        if isinstance(x, StageVar):
            return _pair_names(x)
        raise smt.SmtError(f"not a stage: {x!r}")

    def expand(self, e) -> list:
        if isinstance(e, Schedule):
            return [smt.const_pair(s) for s in e.stages()]
        if isinstance(e, SSingleton):
            return [self.stage(e.stage)]
        if isinstance(e, SVar):
            return [_pair_names(e, i) for i in range(self.sizes[e])]
        if isinstance(e, SAdd):
            return [t for a in e.args for t in self.expand(a)]
        if isinstance(e, SMul):
            terms = [smt.const_pair(Stage(1, 0))]
            for a in e.args:
                terms = [smt.compose(x, y) for x in terms for y in self.expand(a)]
            return terms
        raise smt.SmtError(f"unlowered expression {e!r}")

    def chain(self, terms) -> list:
        rel = smt.strict_fifo if self.pipeline else smt.lex_leq
        return [rel(x, y) for x, y in zip(terms, terms[1:])]

    def _sorted(self, e) -> bool:
        return isinstance(e, (SVar, SSingleton)) or (isinstance(e, Schedule) and (is_pipeline(e) or not self.pipeline))

    def _build(self):
        b = self.base
        for v in self.sched_vars:
            terms = self.expand(v)
            for t in terms:
                b += smt.contractive(t)
            b += self.chain(terms)
        for c in self.constraints:
            if isinstance(c, SemiringEq):
                lhs, rhs = self.expand(c.lhs), self.expand(c.rhs)
                if len(lhs) != len(rhs):
                    b.append(False)
                elif len(rhs) >= 2 and not (self._sorted(c.lhs) and self._sorted(c.rhs)):
                    self.slots.append((lhs, rhs, False))
                else:
                    for x, y in zip(lhs, rhs):
                        b += smt.pair_eq(x, y)
            elif isinstance(c, StagePred):
                b += self.stage_pred(c)
            elif isinstance(c, PipePred):
                terms = self.expand(c.expr)
                if isinstance(c.expr, SVar) and self.pipeline:
                    continue
                if len(terms) >= 2:
                    self.slots.append(([], terms, True))
            elif isinstance(c, (SizeEq, SizeGe)):
                continue
            else:
                raise TypeError(c)

    def stage_pred(self, c: StagePred) -> list:
        rel, args = c.rel, c.args
        if rel == "contractive":
            return smt.contractive(self.stage(args[0]))
        if rel == "neq_id":
            return [smt.neq_id(self.stage(args[0]))]
        if rel == "lt":
            return [smt.strictly_before(self.stage(args[0]), self.stage(args[1]))]
        if rel == "leq":
            return [smt.em_leq(self.stage(args[0]), self.stage(args[1]))]
        if rel == "strict_fifo":
            return [smt.strict_fifo(self.stage(args[0]), self.stage(args[1]))]
        if rel == "no_zero_stage":
            return [("not", ("=", t[0], 0)) for t in self.expand(args[0])]
        if rel == "scale_eq":
            return [("=", self.stage(args[0])[0], args[1])]
        raise ValueError(rel)

    def slot_sizes(self) -> list[int]:
        return [len(rhs) for _, rhs, _ in self.slots]

    def script(self, guess: tuple, positive: bool = False) -> smt.SmtScript:
        sc = smt.SmtScript("QF_NRA")
        for n in self.declarations():
            sc.declare(n)
        for a in self.base:
            sc.assert_(a)
        if positive:
            for n in self.declarations():
                if n.endswith(".s"):
                    sc.assert_(("<", 0, n))
        for (lhs, rhs, pipe), perm in zip(self.slots, guess):
            ordered = [rhs[i] for i in perm]
            if pipe:
                for a in self.chain(ordered):
                    sc.assert_(a)
            else:
                for x, y in zip(lhs, ordered):
                    for a in smt.pair_eq(x, y):
                        sc.assert_(a)
        sc.comments.append("stage unknowns; order guess " + " ".join("".join(map(str, p)) or "-" for p in guess))
        return sc

    def read_model(self, values: Mapping[str, Fraction]) -> dict:
        model: dict = {}
        for v in self.stage_vars:
            s, p = _pair_names(v)
            model[v] = Stage(values.get(s, 0), values.get(p, 0))
        for v in self.sched_vars:
            model[v] = Schedule([Stage(values.get(s, 0), values.get(p, 0))
                                 for s, p in (_pair_names(v, i) for i in range(self.sizes[v]))])
        return model


def order_guesses(slot_sizes: list[int]) -> Iterator[tuple]:
    """Permutation guesses, one per slot.

    Guess ``k`` of a slot is its k-th permutation in lexicographic order.
    Tuples of indices are visited by increasing total, so every slot
    advances in turn; the first guess is the identity everywhere.
    """
    perms = [list(itertools.permutations(range(n))) if math.factorial(n) <= 5040 else None
             for n in slot_sizes]
    counts = [len(p) if p is not None else 5040 for p in perms]

    def perm(slot, k):
        if perms[slot] is not None:
            return perms[slot][k]
        return next(itertools.islice(itertools.permutations(range(slot_sizes[slot])), k, None))

    def compositions(total, slots):
        if slots == 0:
            if total == 0:
                yield ()
            return
        i = len(counts) - slots
        for k in range(min(total, counts[i] - 1) + 1):
            for rest in compositions(total - k, slots - 1):
                yield (k,) + rest

    top = sum(c - 1 for c in counts)
    for total in range(top + 1):
        for idx in compositions(total, len(counts)):
            yield tuple(perm(i, k) for i, k in enumerate(idx))


def residual_failures(constraints, model, pipeline: bool = True) -> list:
    bad = [c for c in constraints if not isinstance(c, (SizeEq, SizeGe)) and not constraint_holds(c, model)]
    if pipeline:
        bad += [PipePred(v) for v, val in model.items() if isinstance(v, SVar) and not is_pipeline(val)]
    return bad


def solve_stages(constraints, sizes: Mapping, cfg: SolveConfig | None = None,
                 stats: Stats | None = None) -> dict:
    """Stage model for every variable, re-verified exactly against the constraints."""
    cfg = cfg or SolveConfig()
    stats = stats if stats is not None else Stats()
    low = Lowering(constraints, sizes, cfg.pipeline)
    if cfg.prefer_positive:
        try:
            return _solve_stages(low, constraints, cfg, stats, True)
        except PipelineError as e:
            if e.kind != "pipeline-unsatisfiable":
                raise
    return _solve_stages(low, constraints, cfg, stats, False)


def _solve_stages(low: Lowering, constraints, cfg: SolveConfig, stats: Stats, positive: bool) -> dict:
    guesses = itertools.islice(order_guesses(low.slot_sizes()), max(1, cfg.order_retry_budget))
    jobs = 1 if cfg.sequential else max(1, cfg.jobs)
    timeouts = 0

    def attempt(guess):
        sc = low.script(guess, positive)
        return sc, smt.solve(sc, cfg.solver, cfg.timeout)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = list(itertools.islice(guesses, jobs))
            if not batch:
                break
            # lowest guess index wins, so parallel runs agree with sequential ones
            for sc, res in (pool.map(attempt, batch) if jobs > 1 else map(attempt, batch)):
                stats.order_attempts += 1
                stats.solver_calls += 1
                stats.variables = len(sc.declarations)
                stats.assertions = len(sc.assertions)
                if res.status == "timeout":
                    timeouts += 1
                if res.status != "sat":
                    continue
                try:
                    model = low.read_model(res.model)
                except SemiringError:
                    continue
                if not residual_failures(constraints, model, cfg.pipeline):
                    return model
    if timeouts and not positive and timeouts == stats.order_attempts:
        raise PipelineError("solver-timeout", "stage phase")
    raise PipelineError("pipeline-unsatisfiable", f"{stats.order_attempts} order guesses tried")


# --- end to end ----------------------------------------------------------

def system_constraints(j: Judgment, cfg: SolveConfig) -> list:
    """The judgment's constraints plus the write-stage scale and size lower bounds on holes."""
    cons = list(j.constraints)
    if WRITE_STAGE in j.symbols and cfg.write_stage is None:
        cons.append(StagePred("scale_eq", (WRITE_STAGE, cfg.write_scale)))
    cons += [SizeGe(h, 1) for h in j.holes]
    return cons


@dataclass
class Inference:
    judgment: Judgment  # concrete
    symbolic: Judgment
    model: dict
    sizes: dict
    stats: Stats
    constraints: list = field(default_factory=list)
    derivation: object = None


def infer_end_to_end(source, cfg: SolveConfig | None = None, check: bool = True) -> Inference:
    """parse, simple types, generate, sizes, stages, substitute and check."""
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    src = parse_source(source) if isinstance(source, str) else source
    if not isinstance(src, Source):
        src = Source({}, src)
    simple = infer_simple(src.term, src.declared)
    j = generate(src.term, simple, src.declared, write_stage=cfg.write_stage)
    cons = system_constraints(j, cfg)
    stats = Stats()
    sizes = solve_sizes(cons, j.holes, cfg, stats)
    model = solve_stages(cons, sizes, cfg, stats) if sizes or any(
        isinstance(c, StagePred) for c in cons) else {}
    for v in j.symbols:
        if isinstance(v, SVar) and v not in model:
            model[v] = Schedule()
    concrete = substitute(j, model)
    out = Inference(concrete, j, model, sizes, stats, cons)
    if check:
        from .check import CheckError, check_judgment

        try:
            out.derivation = check_judgment(concrete)
        except CheckError as e:
            raise PipelineError("check-rejected", str(e)) from e
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return out
