"""Game denotations of checked PIA judgments.

The strategy is built by structural recursion over the stratified
derivation: occurrences are copycats, binders contract their occurrences
with δ and curry, unused binders add a component in which P only plays
dummy moves, and application composes the function with ``J·⟦N⟧``.
Numeric answers live in ``0..max_int``; arithmetic wraps around.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import games as g
from .check import _concrete, _concrete_type, _match, check_judgment
from .infer import Generator, Judgment
from .semiring import IDENTITY, Schedule, Stage
from .simple_types import COM as S_COM, EXP as S_EXP
from .symbolic import StageVar
from .syntax import App, Arrow, Base, Const, Lam, ResourceType, Term, Var

ONE_TAG = g.stage_tag(IDENTITY, 0)


def arena_of(ty: ResourceType, max_int: int, _cache: dict = {}) -> g.Arena:
    key = (repr(ty), max_int)
    if key not in _cache:
        if isinstance(ty, Base):
            a = g.com_arena() if ty.name == "com" else g.exp_arena(max_int)
        else:
            a = g.arrow(g.schedule_action(ty.ann, arena_of(ty.dom, max_int)), arena_of(ty.cod, max_int))
        _cache[key] = a
    return _cache[key]


@dataclass
class Entry:
    occ: str  # component tag in the context tensor
    var: str
    ann: Schedule
    ty: ResourceType


@dataclass
class Den:
    strategy: g.Strategy
    ctx: list
    ty: ResourceType


# --- constants -----------------------------------------------------------

def _value(m) -> int:
    return int(m[-1])


def _answer_in(past: dict, prefix: tuple, arena: g.Arena):
    for m in past.values():
        if m[: len(prefix)] == prefix and arena.label[m][1] == "A" and len(m) == len(prefix) + 1:
            return m
    return None


def _decider(arena: g.Arena, answer: Callable, question: Callable | None = None):
    """Default P behaviour: ask for real exactly when enabled by a real move,
    answer a dummy question with a dummy; ``answer`` gives real answers."""

    def decide(c, past):
        members = arena.classes[c]
        played = set(past.values())
        if arena.label[members[0]][1] == "Q":
            if question is not None:
                r = question(members, past)
                if r is not None:
                    return r
            real = [m for m in members if arena.label[m][2] == "M" and arena.parents[m] & played]
            if real:
                return real[0]
            return next(m for m in members if arena.label[m][2] == "N")
        q = next((p for m in members for p in arena.parents[m] if p in played), None)
        if q is None or arena.label[q][2] == "N":
            return next(m for m in members if arena.label[m][2] == "N")
        base = answer(q, past)
        return next(m for m in members if m[-1] == base and q in arena.parents[m])

    return decide


def constant_strategy(c: Const, ty: ResourceType, max_int: int,
                      ops: dict | None = None) -> g.Strategy:
    """Strategy for a constant on ``⟦ty⟧``."""
    a = arena_of(ty, max_int)
    wrap = max_int + 1
    k = c.kind
    if k == "one":
        return g.policy_strategy(a, _decider(a, lambda q, past: str(1 % wrap)))
    if k == "skip":
        return g.policy_strategy(a, _decider(a, lambda q, past: "done"))
    tx = g.stage_tag(ty.ann.stages()[0], 0) if isinstance(ty, Arrow) else None
    if k == "op":
        fn = (ops or {}).get(c.label, lambda u, v: u + v)
        ty2 = ty.cod
        ty_ = g.stage_tag(ty2.ann.stages()[0], 0)

        def ans(q, past):
            u = _answer_in(past, ("L", tx), a)
            v = _answer_in(past, ("R", "L", ty_), a)
            return str(fn(_value(u), _value(v)) % wrap)

        return g.policy_strategy(a, _decider(a, ans))
    if k in ("comp", "seq", "par"):
        return g.policy_strategy(a, _decider(a, lambda q, past: "done"))
    if k == "if":
        ty_ = g.stage_tag(ty.cod.ann.stages()[0], 0)
        b1, b2 = ("R", "L", ty_), ("R", "R", "L", ty_)

        def guard(past):
            u = _answer_in(past, ("L", tx), a)
            return None if u is None or a.label[u][2] == "N" else _value(u)

        def question(members, past):
            m0 = members[0]
            if m0[:3] not in (b1, b2[:3]) or (m0[:3] == b2[:3] and m0[:4] != b2):
                return None
            root_real = any(m[:3] == ("R", "R", "R") and a.label[m][2] == "M" for m in past.values())
            gv = guard(past)
            if not root_real or gv is None:
                return None
            first = m0[: len(b1)] == b1 and m0[: len(b2)] != b2
            want_real = (gv != 0) == first
            return next(m for m in members if (a.label[m][2] == "M") == want_real)

        def ans(q, past):
            for pre in (b1, b2):
                m = _answer_in(past, pre, a)
                if m is not None and a.label[m][2] == "M":
                    return m[-1]
            raise g.StrategyError("conditional answered before its branch")

        return g.policy_strategy(a, _decider(a, ans, question))
    if k == "new":
        inner = ("L", ONE_TAG)
        reads, writes, body = inner + ("L",), inner + ("R", "L"), inner + ("R", "R")

        def latest_write(m_cls, past):
            best = None
            for m in past.values():
                if m[: len(writes)] == writes and a.label[m][1] == "A" and a.label[m][2] == "M" \
                        and m[-1].isdigit() and a.label[m][0] == "O":
                    key = (a.tau[m], a.cls[m])
                    if best is None or key > best[0]:
                        best = (key, m)
            return 0 if best is None else _value(best[1])

        def ans(q, past):
            if q[: len(reads)] == reads:
                return str(latest_write(q, past))
            if q[: len(writes)] == writes:
                return "done"
            m = _answer_in(past, body, a)
            return m[-1]

        return g.policy_strategy(a, _decider(a, ans))
    raise ValueError(k)


# --- structural recursion ------------------------------------------------

def ctx_arena(ctx: list, max_int: int) -> g.Arena:
    if not ctx:
        return g.EMPTY
    return g.tensor_n([(e.occ, g.schedule_action(e.ann, arena_of(e.ty, max_int))) for e in ctx])


def _relabel_ctx(s: g.Strategy, f, ctx: list, ty: ResourceType, max_int: int) -> g.Strategy:
    out = g.arrow(ctx_arena(ctx, max_int), arena_of(ty, max_int))
    return g.relabel(s, f, out)


def _merge(d: Den, e1: Entry, e2: Entry, name: str, max_int: int) -> Den:
    """δ on two context components of the same type."""
    left, right = g.sum_tags(e1.ann, e2.ann)
    merged = Entry(name, e1.var, e1.ann + e2.ann, e1.ty)
    ctx = [x for x in d.ctx if x.occ not in (e1.occ, e2.occ)] + [merged]

    def f(m):
        if m[0] == "L" and m[1] == e1.occ:
            return ("L", name, left[m[2]]) + m[3:]
        if m[0] == "L" and m[1] == e2.occ:
            return ("L", name, right[m[2]]) + m[3:]
        return m

    return Den(_relabel_ctx(d.strategy, f, ctx, d.ty, max_int), ctx, d.ty)


def contract(d: Den, var: str, name: str, bracketing: str, max_int: int) -> Den:
    """Merge all occurrences of ``var`` into one component called ``name``."""
    occs = [e for e in d.ctx if e.var == var]
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"{name}~{counter[0]}"

    def build(d, es):
        if len(es) == 1:
            return d, es[0]
        if bracketing == "left":
            d, head = build(d, es[:-1])
            tail = es[-1]
        else:
            head = es[0]
            d, tail = build(d, es[1:])
        nm = fresh()
        d = _merge(d, head, tail, nm, max_int)
        return d, next(e for e in d.ctx if e.occ == nm)

    d, top = build(d, occs)
    if top.occ != name:
        ctx = [Entry(name, e.var, e.ann, e.ty) if e.occ == top.occ else e for e in d.ctx]
        f = lambda m: ("L", name) + m[2:] if m[0] == "L" and m[1] == top.occ else m
        d = Den(_relabel_ctx(d.strategy, f, ctx, d.ty, max_int), ctx, d.ty)
    return d


def weaken(d: Den, entry: Entry, max_int: int) -> Den:
    """Add an unused component; P answers it with dummy moves only."""
    ctx = d.ctx + [entry]
    out = g.arrow(ctx_arena(ctx, max_int), arena_of(d.ty, max_int))
    comp = g.schedule_action(entry.ann, arena_of(entry.ty, max_int))
    dummies = [(("L", entry.occ) + c[0],) for c in
               [[m for m in cl if comp.label[m][2] == "N"] for cl in comp.classes]]
    result = set()
    for p in d.strategy.plays:
        result |= g.merges(out, [p] + dummies)
    return Den(g.Strategy(out, frozenset(result)), ctx, d.ty)


def curry(d: Den, name: str, ann: Schedule, dom: ResourceType, max_int: int) -> Den:
    rest = [e for e in d.ctx if e.occ != name]
    ty = Arrow(ann, dom, d.ty)

    def f(m):
        if m[0] == "L" and m[1] == name:
            return ("R", "L") + m[2:]
        if m[0] == "R":
            return ("R", "R") + m[1:]
        return m

    return Den(_relabel_ctx(d.strategy, f, rest, ty, max_int), rest, ty)


class _Denoter:
    def __init__(self, max_int: int, bracketing: str, write_stage, ops):
        self.max_int = max_int
        self.bracketing = bracketing
        self.w = write_stage
        self.ops = ops
        self.count = 0

    def constant(self, c: Const) -> Den:
        sigma = S_EXP if c.kind in ("if", "new") and c.params[0] == "exp" else S_COM
        gen = Generator(self.w if self.w is not None else None)
        _, ty = gen.constant(c, sigma)
        s = constant_strategy(c, ty, self.max_int, self.ops)
        out = g.arrow(g.EMPTY, arena_of(ty, self.max_int))
        return Den(g.relabel(s, lambda m: ("R",) + m, out), [], ty)

    def go(self, t: Term, env: dict) -> Den:
        n = self.max_int
        if isinstance(t, Var):
            self.count += 1
            occ = f"{t.name}@{self.count}"
            ty = env[t.name]
            cc = g.copycat(arena_of(ty, n))
            ctx = [Entry(occ, t.name, Schedule([IDENTITY]), ty)]
            f = lambda m: ("L", occ, ONE_TAG) + m[1:] if m[0] == "L" else m
            return Den(_relabel_ctx(cc, f, ctx, ty, n), ctx, ty)
        if isinstance(t, Const):
            return self.constant(t)
        if isinstance(t, Lam):
            ptype = _concrete_type(t.ptype, t.name)
            ann = _concrete(t.ann, t.name)
            d = self.go(t.body, {**env, t.name: ptype})
            self.count += 1
            name = f"{t.name}@{self.count}"
            if any(e.var == t.name for e in d.ctx):
                d = contract(d, t.name, name, self.bracketing, n)
            else:
                d = weaken(d, Entry(name, t.name, ann, ptype), n)
            return curry(d, name, ann, ptype, n)
        if isinstance(t, App):
            fd = self.go(t.fun, env)
            ad = self.go(t.arg, env)
            return self.apply(fd, ad)
        raise TypeError(t)

    def apply(self, fd: Den, ad: Den) -> Den:
        n = self.max_int
        fty = fd.ty
        binding = {} if self.w is None else {StageVar("w"): self.w}
        _match(fty.dom, ad.ty, binding)
        j = fty.ann
        tags = {e.occ: g.product_tags(j, e.ann) for e in ad.ctx}
        scaled = [Entry(e.occ, e.var, j * e.ann, e.ty) for e in ad.ctx]
        jt = g.schedule_strategy(j, ad.strategy)
        ctx = fd.ctx + scaled
        out = g.arrow(ctx_arena(ctx, n), arena_of(fty.cod, n))

        def route_arg(m):
            if m[0] == "L":  # ('L', tj, occ, tk) + base
                return "out", ("L", m[2], tags[m[2]][(m[1], m[3])]) + m[4:]
            return "hide", m[1:]

        def route_fun(m):
            if m[0] == "L":
                return "out", m
            if m[1] == "L":
                return "hide", m[2:]
            return "out", ("R",) + m[2:]

        s = g._interact(jt, fd.strategy, route_arg, route_fun, out)
        return Den(s, ctx, fty.cod)


def denote(j: Judgment, max_int: int = 2, bracketing: str = "left",
           ops: dict | None = None) -> g.Strategy:
    """Strategy on ``⊗ J_i·⟦θ_i⟧ ⊸ ⟦θ⟧`` for a checked judgment.

    ``bracketing`` picks the contraction tree (left- or right-nested) used
    whenever three or more occurrences are merged.
    """
    deriv = check_judgment(j)
    w = getattr(deriv, "write_stage", None)
    dn = _Denoter(max_int, bracketing, w, ops)
    env = {name: _concrete_type(ty, name) for name, _, ty in j.context}
    d = dn.go(j.term, env)
    for name, ann, ty in j.context:
        ann = _concrete(ann, name)
        if any(e.var == name for e in d.ctx):
            d = contract(d, name, name, bracketing, max_int)
        else:
            d = weaken(d, Entry(name, name, ann, env[name]), max_int)
    order = {name: i for i, (name, _, _) in enumerate(j.context)}
    d.ctx.sort(key=lambda e: order[e.occ])
    return d.strategy


def contraction_count(t: Term) -> int:
    """Number of occurrences merged at binders; >= 2 means several contraction trees."""
    from .syntax import free_vars  # noqa: F401

    def occ(t, x):
        if isinstance(t, Var):
            return int(t.name == x)
        if isinstance(t, Lam):
            return 0 if t.name == x else occ(t.body, x)
        if isinstance(t, App):
            return occ(t.fun, x) + occ(t.arg, x)
        return 0

    best = 0

    def walk(t):
        nonlocal best
        if isinstance(t, Lam):
            best = max(best, occ(t.body, t.name))
            walk(t.body)
        elif isinstance(t, App):
            walk(t.fun)
            walk(t.arg)

    walk(t)
    return best
