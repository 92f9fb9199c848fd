"""Resource-constraint generation for judgments ``<Γ ⊢ M : θ | χ>``.

Generation follows the stratified derivation: every variable occurrence is
typed by Identity with annotation 1, applications scale the argument's
context, and contraction is emitted once per binder (at the abstraction
or, for free identifiers, at the root).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .semiring import (
    IDENTITY,
    ONE_SCHEDULE,
    Schedule,
    SemiringError,
    Stage,
    egli_milner_leq,
    fmt_q,
    is_contractive,
    is_pipeline,
    strict_fifo,
    strictly_before,
)
from .simple_types import SArrow, SCom, SimpleType, SimpleTyping, infer_simple
from .symbolic import (
    SAdd,
    SMul,
    SSingleton,
    StageVar,
    SVar,
    eval_sched,
    eval_stage,
    is_concrete,
    s_add,
    s_mul,
    sched_vars,
    substitute_sched,
)
from .syntax import (
    COM,
    EXP,
    App,
    Arrow,
    Base,
    Const,
    Lam,
    ResourceType,
    Term,
    Var,
    WRITE_STAGE,
    acc_type,
    map_annotations,
    pretty,
    pretty_type,
)


class InferenceError(Exception):
    pass


# --- constraints ---------------------------------------------------------

@dataclass(frozen=True)
class SemiringEq:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class StagePred:
    rel: str  # contractive | neq_id | lt | leq | strict_fifo | no_zero_stage | scale_eq
    args: tuple


@dataclass(frozen=True)
class PipePred:
    expr: object


@dataclass(frozen=True)
class SizeEq:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class SizeGe:
    expr: object
    bound: int


Constraint = Union[SemiringEq, StagePred, PipePred, SizeEq, SizeGe]
STAGE_RELATIONS = ("contractive", "neq_id", "lt", "leq", "strict_fifo", "no_zero_stage", "scale_eq")


@dataclass
class Judgment:
    context: list  # [(name, annotation, ResourceType)]
    term: Term
    type: ResourceType
    constraints: list = field(default_factory=list)
    symbols: dict = field(default_factory=dict)  # SVar | StageVar -> kind
    holes: list = field(default_factory=list)  # declared unknown arrow annotations

    def context_entry(self, name: str):
        for n, a, t in self.context:
            if n == name:
                return a, t
        raise KeyError(name)

    def is_concrete(self) -> bool:
        anns = [a for _, a, t in self.context] + _all_annotations(self.term, self.type, self.context)
        return all(is_concrete(a) for a in anns)

    def __str__(self) -> str:
        return format_judgment(self)


def _all_annotations(term, ty, context) -> list:
    from .syntax import subterms, type_annotations

    out = list(type_annotations(ty))
    for _, _, t in context:
        out += type_annotations(t)
    for s in subterms(term):
        if isinstance(s, Lam):
            out.append(s.ann)
            out += type_annotations(s.ptype)
        elif isinstance(s, Const):
            for p in s.params:
                if isinstance(p, (Stage, Schedule, StageVar, SVar, SSingleton)):
                    out.append(p if not isinstance(p, (Stage, StageVar)) else SSingleton(p))
    return [a for a in out if a is not None]


def format_judgment(j: Judgment) -> str:
    from .symbolic import show_sched

    ctx = []
    for name, ann, ty in j.context:
        dom = pretty_type(ty)
        if isinstance(ty, Arrow):
            dom = f"({dom})"
        ctx.append(f"{name} : {show_sched(ann)}·{dom}")
    lines = ctx + ["|-", pretty(j.term), ":", pretty_type(j.type)]
    return "\n".join(lines) + "\n"


def parse_judgment(text: str) -> Judgment:
    """Inverse of :func:`format_judgment`: context lines, ``|-``, term, ``:``, type."""
    from .syntax import ParseError, _is_op_name, parse, parse_annotated_type, parse_type

    lines = [l for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    try:
        i = next(k for k, l in enumerate(lines) if l.strip() == "|-")
        k = next(k for k, l in enumerate(lines) if l.strip() == ":" and k > i)
    except StopIteration:
        raise ParseError("judgment needs '|-' and ':' separator lines") from None
    context = []
    for lineno, line in enumerate(lines[:i], start=1):
        if " : " not in line:
            raise ParseError("expected 'name : J·type'", lineno, 1)
        name, rest = line.split(" : ", 1)
        ann, ty = parse_annotated_type(rest)
        context.append((name.strip(), ann, ty))
    ops = {n for n, _, _ in context if _is_op_name(n)}
    term = parse("\n".join(lines[i + 1:k]), ops)
    ty = parse_type("\n".join(lines[k + 1:]))
    return Judgment(context, term, ty)


# --- flattening ----------------------------------------------------------

def flatten_type_eq(a: ResourceType, b: ResourceType) -> list[SemiringEq]:
    """Pairwise equalities between annotations in the same position."""
    if isinstance(a, Base) and isinstance(b, Base):
        if a != b:
            raise InferenceError(f"base type mismatch: {a!r} vs {b!r}")
        return []
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        out = [] if a.ann == b.ann else [SemiringEq(a.ann, b.ann)]
        return out + flatten_type_eq(a.dom, b.dom) + flatten_type_eq(a.cod, b.cod)
    raise InferenceError(f"skeleton mismatch: {pretty_type(a)} vs {pretty_type(b)}")


# --- generation ----------------------------------------------------------

class Generator:
    def __init__(self, write_stage=None):
        self.constraints: list[Constraint] = []
        self.symbols: dict = {}
        self.holes: list = []
        self._sched = itertools.count()
        self._const = itertools.count()
        self.w = write_stage if write_stage is not None else WRITE_STAGE
        self._w_used = False

    def fresh_sched(self, hint: str = "J") -> SVar:
        v = SVar(f"{hint}{next(self._sched)}")
        self.symbols[v] = "schedule"
        return v

    def stage_var(self, name: str) -> StageVar:
        v = StageVar(name)
        if v not in self.symbols:
            self.symbols[v] = "stage"
            self.emit(StagePred("contractive", (v,)))
        return v

    def emit(self, c: Constraint):
        self.constraints.append(c)

    def register(self, e):
        for v in sched_vars(e):
            if isinstance(v, StageVar):
                if v == WRITE_STAGE:
                    self._w_used = True
                self.stage_var(v.name)
            else:
                self.symbols.setdefault(v, "schedule")

    def fresh_type(self, st: SimpleType) -> ResourceType:
        if isinstance(st, SArrow):
            return Arrow(self.fresh_sched(), self.fresh_type(st.dom), self.fresh_type(st.cod))
        return COM if isinstance(st, SCom) else EXP

    def instantiate_declared(self, t: ResourceType, hole: bool = True) -> ResourceType:
        """Name anonymous holes; concrete and named annotations are kept."""

        def inst(a):
            if isinstance(a, SVar):
                v = self.fresh_sched() if a.name is None else a
                self.symbols.setdefault(v, "schedule")
                if hole and v not in self.holes:
                    self.holes.append(v)
                return v
            self.register(a)
            return a

        return map_annotations(t, inst)

    def scale(self, j, k):
        """Annotation of a context entry after application: ``J × J_k``."""
        if k == ONE_SCHEDULE:
            return j
        if j == ONE_SCHEDULE:
            return k
        if isinstance(j, Schedule) and isinstance(k, Schedule):
            return j * k
        v = self.fresh_sched()
        self.emit(SemiringEq(v, s_mul(j, k)))
        return v

    def contract(self, entries: list, target=None):
        if target is None:
            if len(entries) == 1:
                return entries[0]
            target = self.fresh_sched()
        if entries:
            self.emit(SemiringEq(target, s_add(*entries)))
        return target

    def const_name(self, c: Const) -> str:
        n = next(self._const)
        return f"{c.kind}#{c.label}" if c.label is not None else f"{c.kind}{n}"

    def constant(self, c: Const, st: SimpleType):
        base = self.const_name(c)

        def stage(i, field_):
            p = c.params[i]
            if isinstance(p, Stage):
                return p
            if isinstance(p, StageVar):
                return self.stage_var(p.name)
            return self.stage_var(f"{base}_{field_}")

        k = c.kind
        if k == "one":
            return c, EXP
        if k == "skip":
            return c, COM
        if k in ("op", "comp", "seq"):
            x, y = stage(0, "x"), stage(1, "y")
            b = EXP if k == "op" else COM
            ty = Arrow(_single(x), b, Arrow(_single(y), b, b))
            if k == "op":
                self.emit(StagePred("neq_id", (x,)))
                self.emit(StagePred("neq_id", (y,)))
            if k == "seq":
                self.emit(StagePred("lt", (x, y)))
            return Const(k, (x, y), c.label), ty
        if k == "par":
            x = stage(0, "x")
            return Const(k, (x,), c.label), Arrow(_single(x), COM, Arrow(_single(x), COM, COM))
        sigma = _result_base(st)
        sig_t = COM if sigma == "com" else EXP
        if k == "if":
            x, y = stage(1, "x"), stage(2, "y")
            self.emit(StagePred("lt", (x, y)))
            ty = Arrow(_single(x), EXP, Arrow(_single(y), sig_t, Arrow(_single(y), sig_t, sig_t)))
            return Const(k, (sigma, x, y), c.label), ty
        if k == "new":
            jj, kk = c.params[1], c.params[2]
            jj = self.fresh_sched(f"{base}_J") if jj is None else jj
            kk = self.fresh_sched(f"{base}_K") if kk is None else kk
            self.register(jj)
            self.register(kk)
            acc = acc_type(self.w)
            self.register(acc.ann)
            self.emit(StagePred("no_zero_stage", (kk,)))
            inner = Arrow(jj, EXP, Arrow(kk, acc, sig_t))
            return Const(k, (sigma, jj, kk), c.label), Arrow(ONE_SCHEDULE, inner, sig_t)
        raise InferenceError(f"unknown constant {k}")

    def gen(self, t: Term, env: dict, typing: SimpleTyping):
        """Returns (annotated term, context entries [(name, ann)], type)."""
        if isinstance(t, Var):
            return t, [(t.name, ONE_SCHEDULE)], env[t.name]
        if isinstance(t, Const):
            c, ty = self.constant(t, typing.of(t))
            return c, [], ty
        if isinstance(t, Lam):
            if t.ptype is not None:
                ptype = self.instantiate_declared(t.ptype, hole=False)
            else:
                ptype = self.fresh_type(typing.binders[id(t)])
            body, ctx, bty = self.gen(t.body, {**env, t.name: ptype}, typing)
            mine = [a for n, a in ctx if n == t.name]
            rest = [(n, a) for n, a in ctx if n != t.name]
            if t.ann is not None:
                ann = t.ann
                if isinstance(ann, SVar) and ann.name is None:
                    ann = self.fresh_sched()
                self.register(ann)
                self.contract(mine, ann) if mine else None
            elif mine:
                ann = self.contract(mine)
            else:
                ann = self.fresh_sched()  # Abs-weak
            return Lam(t.name, body, ann, ptype), rest, Arrow(ann, ptype, bty)
        if isinstance(t, App):
            f, fctx, fty = self.gen(t.fun, env, typing)
            a, actx, aty = self.gen(t.arg, env, typing)
            if not isinstance(fty, Arrow):
                raise InferenceError(f"applying a non-function of type {pretty_type(fty)}")
            for c in flatten_type_eq(fty.dom, aty):
                self.emit(c)
            scaled = [(n, self.scale(fty.ann, k)) for n, k in actx]
            return App(f, a), fctx + scaled, fty.cod
        raise TypeError(t)


def _single(x) -> object:
    return Schedule([x]) if isinstance(x, Stage) else SSingleton(x)


def _result_base(st: SimpleType) -> str:
    while isinstance(st, SArrow):
        st = st.cod
    return "com" if isinstance(st, SCom) else "exp"


def generate(
    t: Term,
    simple: SimpleTyping | None = None,
    declared: Mapping[str, ResourceType] | None = None,
    write_stage=None,
) -> Judgment:
    """Constraint system whose models are exactly the valid annotations."""
    declared = dict(declared or {})
    if simple is None:
        simple = infer_simple(t, declared)
    g = Generator(write_stage)
    env = {name: g.instantiate_declared(ty) for name, ty in declared.items()}
    term, ctx, ty = g.gen(t, env, simple)
    context = []
    seen = set()
    for name in list(declared) + [n for n, _ in ctx if n not in declared]:
        if name in seen:
            continue
        seen.add(name)
        if name not in env:
            raise InferenceError(f"unbound identifier {name!r}")
        entries = [a for n, a in ctx if n == name]
        root = SVar(f"ctx_{name}")
        g.symbols[root] = "schedule"
        g.contract(entries, root)  # Contraction+; no entries means Weakening+
        context.append((name, root, env[name]))
    return Judgment(context, term, ty, g.constraints, g.symbols, g.holes)


# --- models --------------------------------------------------------------

def _sub_stage(p, model):
    if isinstance(p, StageVar):
        if p not in model:
            from .symbolic import MissingVariable

            raise MissingVariable(p.name)
        v = model[p]
        return v.stages()[0] if isinstance(v, Schedule) else v
    return p


def _sub_ann(a, model):
    out = substitute_sched(a, model)
    if not is_concrete(out):
        from .symbolic import MissingVariable

        missing = sorted(v.name for v in sched_vars(out))
        raise MissingVariable(", ".join(missing))
    return eval_sched(out, {})


def substitute_type(t: ResourceType, model) -> ResourceType:
    return map_annotations(t, lambda a: _sub_ann(a, model))


def substitute_term(t: Term, model) -> Term:
    if isinstance(t, Var):
        return t
    if isinstance(t, Const):
        params = []
        for i, p in enumerate(t.params):
            if t.kind == "new" and i > 0:
                params.append(_sub_ann(p, model))
            elif isinstance(p, str) or p is None:
                params.append(p)
            else:
                params.append(_sub_stage(p, model))
        return Const(t.kind, tuple(params), t.label)
    if isinstance(t, Lam):
        return Lam(
            t.name,
            substitute_term(t.body, model),
            _sub_ann(t.ann, model) if t.ann is not None else None,
            substitute_type(t.ptype, model) if t.ptype is not None else None,
        )
    if isinstance(t, App):
        return App(substitute_term(t.fun, model), substitute_term(t.arg, model))
    raise TypeError(t)


def substitute(j: Judgment, model: Mapping) -> Judgment:
    """Textual substitution of a model into a judgment; raises on missing variables."""
    context = [(n, _sub_ann(a, model), substitute_type(t, model)) for n, a, t in j.context]
    cons = [substitute_constraint(c, model) for c in j.constraints]
    return Judgment(context, substitute_term(j.term, model), substitute_type(j.type, model), cons)


def substitute_constraint(c: Constraint, model):
    if isinstance(c, SemiringEq):
        return SemiringEq(_sub_ann(c.lhs, model), _sub_ann(c.rhs, model))
    if isinstance(c, StagePred):
        args = tuple(
            _sub_stage(a, model) if isinstance(a, (StageVar, Stage)) else
            (a if isinstance(a, Fraction) else _sub_ann(a, model))
            for a in c.args
        )
        return StagePred(c.rel, args)
    if isinstance(c, PipePred):
        return PipePred(_sub_ann(c.expr, model))
    return c


def stage_pred_holds(rel: str, args: tuple) -> bool:
    if rel == "contractive":
        return is_contractive(args[0].scale, args[0].phase)
    if rel == "neq_id":
        return args[0] != IDENTITY
    if rel == "lt":
        return strictly_before(*args)
    if rel == "leq":
        return egli_milner_leq(*args)
    if rel == "strict_fifo":
        return strict_fifo(*args)
    if rel == "no_zero_stage":
        return all(s.scale != 0 for s in args[0].stages())
    if rel == "scale_eq":
        return args[0].scale == args[1]
    raise ValueError(rel)


def constraint_holds(c: Constraint, model: Mapping) -> bool:
    """Exact re-evaluation of one constraint under a concrete model."""
    try:
        c = substitute_constraint(c, model)
    except SemiringError:
        return False
    if isinstance(c, SemiringEq):
        return c.lhs == c.rhs
    if isinstance(c, StagePred):
        return stage_pred_holds(c.rel, c.args)
    if isinstance(c, PipePred):
        return is_pipeline(c.expr)
    raise TypeError(c)


def failed_constraints(constraints, model) -> list:
    return [c for c in constraints if not constraint_holds(c, model)]


def complete_model(j: Judgment, partial: Mapping) -> dict:
    """Extend a model by evaluating defining equations ``V = expr`` in order.

    Useful when only the "free" unknowns are known (e.g. reference stage values).
    """
    model = dict(partial)
    pending = [c for c in j.constraints if isinstance(c, SemiringEq)]
    progress = True
    while progress:
        progress = False
        for c in list(pending):
            for lhs, rhs in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
                if isinstance(lhs, SVar) and lhs not in model:
                    val = substitute_sched(rhs, model)
                    if is_concrete(val):
                        model[lhs] = eval_sched(val, {})
                        pending.remove(c)
                        progress = True
                        break
    return model


# --- dump ----------------------------------------------------------------

def _sx(e) -> str:
    if isinstance(e, Schedule):
        return "(sched" + "".join(f" ({fmt_q(s.scale)} {fmt_q(s.phase)})" for s in e.stages()) + ")"
    if isinstance(e, Stage):
        return f"(stage {fmt_q(e.scale)} {fmt_q(e.phase)})"
    if isinstance(e, (SVar, StageVar)):
        return e.name
    if isinstance(e, SSingleton):
        return f"(single {_sx(e.stage)})"
    if isinstance(e, SAdd):
        return "(+ " + " ".join(_sx(a) for a in e.args) + ")"
    if isinstance(e, SMul):
        return "(* " + " ".join(_sx(a) for a in e.args) + ")"
    if isinstance(e, Fraction):
        return fmt_q(e)
    raise TypeError(e)


def dump_constraint(c: Constraint) -> str:
    if isinstance(c, SemiringEq):
        return f"(= {_sx(c.lhs)} {_sx(c.rhs)})"
    if isinstance(c, StagePred):
        return f"({c.rel.replace('_', '-')} " + " ".join(_sx(a) for a in c.args) + ")"
    if isinstance(c, PipePred):
        return f"(pipe {_sx(c.expr)})"
    if isinstance(c, SizeEq):
        return f"(size= {_sx(c.lhs)} {_sx(c.rhs)})"
    if isinstance(c, SizeGe):
        return f"(size>= {_sx(c.expr)} {c.bound})"
    raise TypeError(c)


def dump_constraints(constraints) -> str:
    return "".join(dump_constraint(c) + "\n" for c in constraints)
