"""Unification-based inference of the simple-type skeleton of a PIA term."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Union

from .syntax import App, Arrow, Base, Const, Lam, ResourceType, Term, Var


class SimpleTypeError(Exception):
    pass


@dataclass(frozen=True)
class SCom:
    def __repr__(self):
        return "com"


@dataclass(frozen=True)
class SExp:
    def __repr__(self):
        return "exp"


@dataclass(frozen=True)
class SArrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __repr__(self):
        d = repr(self.dom)
        if isinstance(self.dom, SArrow):
            d = f"({d})"
        return f"{d} -> {self.cod!r}"


@dataclass(frozen=True)
class TypeVar:
    name: str
    ground: bool = False  # ranges over {com, exp} only

    def __repr__(self):
        return f"'{self.name}"


SimpleType = Union[SCom, SExp, SArrow, TypeVar]
COM = SCom()
EXP = SExp()


def arrows(*ts: SimpleType) -> SimpleType:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = SArrow(t, out)
    return out


def skeleton(t: ResourceType) -> SimpleType:
    """Forget annotations."""
    if isinstance(t, Base):
        return COM if t.name == "com" else EXP
    return SArrow(skeleton(t.dom), skeleton(t.cod))


class Unifier:
    def __init__(self):
        self.subst: dict[TypeVar, SimpleType] = {}
        self._counter = itertools.count()

    def fresh(self, ground: bool = False) -> TypeVar:
        return TypeVar(f"t{next(self._counter)}", ground)

    def resolve(self, t: SimpleType) -> SimpleType:
        while isinstance(t, TypeVar) and t in self.subst:
            t = self.subst[t]
        return t

    def zonk(self, t: SimpleType) -> SimpleType:
        t = self.resolve(t)
        if isinstance(t, SArrow):
            return SArrow(self.zonk(t.dom), self.zonk(t.cod))
        return t

    def occurs(self, v: TypeVar, t: SimpleType) -> bool:
        t = self.resolve(t)
        if t == v:
            return True
        if isinstance(t, SArrow):
            return self.occurs(v, t.dom) or self.occurs(v, t.cod)
        return False

    def bind(self, v: TypeVar, t: SimpleType):
        if isinstance(t, TypeVar):
            if v.ground and not t.ground:
                self.subst[t] = v
                return
            self.subst[v] = t
            return
        if self.occurs(v, t):
            raise SimpleTypeError(f"occurs check: {v!r} in {self.zonk(t)!r}")
        if v.ground and isinstance(t, SArrow):
            raise SimpleTypeError(f"expected a base type, got {self.zonk(t)!r}")
        self.subst[v] = t

    def unify(self, a: SimpleType, b: SimpleType):
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, TypeVar):
            return self.bind(a, b)
        if isinstance(b, TypeVar):
            return self.bind(b, a)
        if isinstance(a, SArrow) and isinstance(b, SArrow):
            self.unify(a.dom, b.dom)
            self.unify(a.cod, b.cod)
            return
        raise SimpleTypeError(f"cannot unify {self.zonk(a)!r} with {self.zonk(b)!r}")


def constant_simple_type(c: Const, u: Unifier) -> SimpleType:
    k = c.kind
    if k == "one":
        return EXP
    if k == "skip":
        return COM
    if k == "op":
        return arrows(EXP, EXP, EXP)
    if k in ("comp", "seq", "par"):
        return arrows(COM, COM, COM)
    sigma = {"com": COM, "exp": EXP, None: None}[c.params[0]]
    if sigma is None:
        sigma = u.fresh(ground=True)
    if k == "if":
        return arrows(EXP, sigma, sigma, sigma)
    if k == "new":
        acc = arrows(EXP, COM)
        return SArrow(arrows(EXP, acc, sigma), sigma)
    raise SimpleTypeError(f"unknown constant {k}")


@dataclass
class SimpleTyping:
    type: SimpleType
    annotations: dict  # id(subterm) -> SimpleType
    nodes: dict  # id(subterm) -> subterm, keeps ids alive
    binders: dict  # id(Lam) -> SimpleType of the bound variable

    def of(self, t: Term) -> SimpleType:
        return self.annotations[id(t)]


def infer_simple(t: Term, declared: Mapping[str, ResourceType] | None = None) -> SimpleTyping:
    """Principal simple type of ``t``; every subterm is annotated.

    Type variables left unconstrained default to ``com``.
    """
    u = Unifier()
    env0 = {name: skeleton(ty) for name, ty in (declared or {}).items()}
    ann: dict[int, SimpleType] = {}
    nodes: dict[int, Term] = {}
    binders: dict[int, SimpleType] = {}

    def go(t: Term, env: dict) -> SimpleType:
        nodes[id(t)] = t
        if isinstance(t, Var):
            if t.name not in env:
                raise SimpleTypeError(f"unbound identifier {t.name!r}")
            ty = env[t.name]
        elif isinstance(t, Const):
            ty = constant_simple_type(t, u)
        elif isinstance(t, Lam):
            a = skeleton(t.ptype) if t.ptype is not None else u.fresh()
            binders[id(t)] = a
            b = go(t.body, {**env, t.name: a})
            ty = SArrow(a, b)
        elif isinstance(t, App):
            f = go(t.fun, env)
            a = go(t.arg, env)
            r = u.fresh()
            u.unify(f, SArrow(a, r))
            ty = r
        else:
            raise TypeError(t)
        ann[id(t)] = ty
        return ty

    top = go(t, env0)

    def finish(ty):
        ty = u.zonk(ty)
        for v in sorted(_tvars(ty), key=lambda v: v.name):
            u.bind(v, COM)
        return u.zonk(ty)

    ann = {k: finish(v) for k, v in ann.items()}
    binders = {k: finish(v) for k, v in binders.items()}
    return SimpleTyping(finish(top), ann, nodes, binders)


def _tvars(t: SimpleType) -> set:
    if isinstance(t, TypeVar):
        return {t}
    if isinstance(t, SArrow):
        return _tvars(t.dom) | _tvars(t.cod)
    return set()


def check_annotation_map(t: Term, typing: SimpleTyping) -> bool:
    """Every application's function has an arrow type whose domain is the argument's type."""
    from .syntax import subterms

    for s in subterms(t):
        if isinstance(s, App):
            f = typing.of(s.fun)
            if not (isinstance(f, SArrow) and f.dom == typing.of(s.arg) and f.cod == typing.of(s)):
                return False
    return True
