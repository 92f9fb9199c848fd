"""Checking fully annotated judgments.

The stratified derivation of a linear sequent is unique, so checking is
structural recursion: every occurrence is an Identity leaf, applications
scale the argument's context, and each binder (or free identifier at the
root) contracts its occurrences.  All side conditions are evaluated
exactly in the schedule semiring.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .infer import Generator, Judgment, constraint_holds, parse_judgment
from .semiring import ONE_SCHEDULE, Schedule, SemiringError, Stage
from .simple_types import COM as S_COM, EXP as S_EXP
from .symbolic import SSingleton, StageVar, SVar, show_sched
from .syntax import App, Arrow, Base, Const, Lam, ResourceType, Term, Var, pretty, pretty_type

REASONS = (
    "annotation sum mismatch",
    "scaling mismatch",
    "type mismatch",
    "context/term variable mismatch",
    "non-contractive stage",
    "constant constraint violated",
    "not concrete",
)


class CheckError(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass
class Derivation:
    rule: str
    conclusion: str
    children: list = field(default_factory=list)
    side: list = field(default_factory=list)  # side conditions, as text
    write_stage: Stage | None = None

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def rules(self) -> list[str]:
        out = [self.rule]
        for c in self.children:
            out += c.rules()
        return out

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        lines = [f"{pad}{self.rule}: {self.conclusion}"]
        lines += [f"{pad}  | {s}" for s in self.side]
        for c in self.children:
            lines.append(c.render(indent + 1))
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.render()


def _concrete(ann, where: str) -> Schedule:
    if isinstance(ann, Schedule):
        return ann
    if isinstance(ann, SSingleton) and isinstance(ann.stage, Stage):
        return Schedule([ann.stage])
    raise CheckError("not concrete", f"{where}: {show_sched(ann) if ann is not None else 'missing annotation'}")


def _concrete_type(t: ResourceType, where: str) -> ResourceType:
    if isinstance(t, Base):
        return t
    return Arrow(_concrete(t.ann, where), _concrete_type(t.dom, where), _concrete_type(t.cod, where))


def _match(template: ResourceType, actual: ResourceType, binding: dict) -> bool:
    """Structural equality; a singleton ``[w]`` with ``w`` a stage variable binds ``w``."""
    if isinstance(template, Base) or isinstance(actual, Base):
        return template == actual
    ann = template.ann
    if isinstance(ann, SSingleton) and isinstance(ann.stage, StageVar):
        got = actual.ann.stages() if isinstance(actual.ann, Schedule) else []
        if len(got) != 1:
            return False
        prev = binding.setdefault(ann.stage, got[0])
        if prev != got[0]:
            return False
    elif ann != actual.ann:
        return False
    return _match(template.dom, actual.dom, binding) and _match(template.cod, actual.cod, binding)


def _bind(t: ResourceType, binding: dict) -> ResourceType:
    if isinstance(t, Base):
        return t
    ann = t.ann
    if isinstance(ann, SSingleton) and isinstance(ann.stage, StageVar) and ann.stage in binding:
        ann = Schedule([binding[ann.stage]])
    return Arrow(ann, _bind(t.dom, binding), _bind(t.cod, binding))


def _types_equal(a: ResourceType, b: ResourceType) -> bool:
    return _match(a, b, {}) if a is not None and b is not None else False


class _Checker:
    def __init__(self, write_stage: Stage | None = None):
        self.write_stage = write_stage
        self.pending: list = []  # constant side conditions waiting for the write stage

    def constant(self, c: Const):
        for p in c.params[1:] if c.kind in ("if", "new") else c.params:
            if isinstance(p, (StageVar, SVar)) or p is None:
                raise CheckError("not concrete", f"constant {pretty(c)}")
        sigma = S_COM if c.kind not in ("if", "new") or c.params[0] != "exp" else S_EXP
        g = Generator()
        inst, ty = g.constant(c, sigma)
        side = []
        for con in g.constraints:
            if any(isinstance(v, StageVar) for v in getattr(con, "args", ())):
                self.pending.append((con, c))
                continue
            if not constraint_holds(con, {}):
                raise CheckError("constant constraint violated", f"{pretty(c)}")
            side.append(_show_constraint(con))
        return ty, side

    def go(self, t: Term, env: dict):
        """Returns (type, usage [(name, Schedule)], derivation)."""
        if isinstance(t, Var):
            if t.name not in env:
                raise CheckError("context/term variable mismatch", f"{t.name} is not in the context")
            ty = env[t.name]
            return ty, [(t.name, ONE_SCHEDULE)], Derivation("Identity", f"{t.name} : [I]·{_dom(ty)} |- {t.name} : {pretty_type(ty)}")
        if isinstance(t, Const):
            ty, side = self.constant(t)
            return ty, [], Derivation("Constant", f"|- {pretty(t)} : {pretty_type(ty)}", side=side)
        if isinstance(t, Lam):
            if t.ptype is None:
                raise CheckError("not concrete", f"binder {t.name} has no type")
            ptype = _concrete_type(t.ptype, f"binder {t.name}")
            ann = _concrete(t.ann, f"binder {t.name}")
            bty, usage, d = self.go(t.body, {**env, t.name: ptype})
            mine = [a for n, a in usage if n == t.name]
            rest = [(n, a) for n, a in usage if n != t.name]
            ty = Arrow(ann, ptype, bty)
            if mine:
                total = _sum(mine)
                if total != ann:
                    raise CheckError(
                        "annotation sum mismatch",
                        f"binder {t.name}: occurrences sum to {total!r}, annotated {ann!r}",
                    )
                side = [f"{t.name}: " + " + ".join(map(repr, mine)) + f" = {ann!r}"]
                rule = "Abs-con"
            else:
                side, rule = [f"{t.name} unused"], "Abs-weak"
            return ty, rest, Derivation(rule, f"|- \\{t.name}. ... : {pretty_type(ty)}", [d], side)
        if isinstance(t, App):
            fty, fu, fd = self.go(t.fun, env)
            aty, au, ad = self.go(t.arg, env)
            if not isinstance(fty, Arrow):
                raise CheckError("type mismatch", f"applying {pretty(t.fun)} of type {pretty_type(fty)}")
            binding = {} if self.write_stage is None else {StageVar("w"): self.write_stage}
            if not _match(fty.dom, aty, binding):
                raise CheckError(
                    "type mismatch",
                    f"argument of type {pretty_type(aty)} where {pretty_type(fty.dom)} is expected",
                )
            if binding.get(StageVar("w")) is not None:
                self._fix_write(binding[StageVar("w")])
            cod = _bind(fty.cod, binding)
            scaled = [(n, fty.ann * k) for n, k in au]
            side = [f"{n}: {fty.ann!r} x {k!r} = {s!r}" for (n, k), (_, s) in zip(au, scaled)]
            return cod, fu + scaled, Derivation("Application", f"|- {_short(t)} : {pretty_type(cod)}", [fd, ad], side)
        raise TypeError(t)

    def _fix_write(self, w: Stage):
        if self.write_stage is None:
            self.write_stage = w
        elif self.write_stage != w:
            raise CheckError("type mismatch", f"write stage {w!r} differs from {self.write_stage!r}")

    def finish(self):
        model = {StageVar("w"): self.write_stage} if self.write_stage is not None else {}
        for con, c in self.pending:
            try:
                ok = constraint_holds(con, model)
            except KeyError:
                ok = True  # write stage never observed: the constant is not applied
            if not ok:
                raise CheckError("constant constraint violated", pretty(c))


def _sum(xs) -> Schedule:
    out = Schedule()
    for x in xs:
        out = out + x
    return out


def _dom(ty) -> str:
    s = pretty_type(ty)
    return f"({s})" if isinstance(ty, Arrow) else s


def _short(t: Term, width: int = 60) -> str:
    s = pretty(t)
    return s if len(s) <= width else s[: width - 3] + "..."


def _show_constraint(c) -> str:
    from .infer import dump_constraint

    return dump_constraint(c)


def check_judgment(j: Judgment, write_stage: Stage | None = None) -> Derivation:
    """The unique stratified derivation of ``j``; raises CheckError on rejection."""
    ck = _Checker(write_stage)
    env = {}
    anns = {}
    for name, ann, ty in j.context:
        if name in env:
            raise CheckError("context/term variable mismatch", f"{name} declared twice")
        env[name] = _concrete_type(ty, f"context entry {name}")
        anns[name] = _concrete(ann, f"context entry {name}")
    ty, usage, d = ck.go(j.term, env)
    ck.finish()
    expected = _concrete_type(j.type, "result type")
    if not _types_equal(expected, ty):
        raise CheckError("type mismatch", f"term has type {pretty_type(ty)}, judgment says {pretty_type(expected)}")
    side = []
    rule = "Root"
    for name, ann in anns.items():
        mine = [a for n, a in usage if n == name]
        if not mine:
            side.append(f"{name}: weakened")
            continue
        total = _sum(mine)
        if total != ann:
            reason = "scaling mismatch" if len(mine) == 1 and mine[0] != ONE_SCHEDULE else "annotation sum mismatch"
            raise CheckError(reason, f"{name}: occurrences give {total!r}, context says {ann!r}")
        side.append(f"{name}: " + " + ".join(map(repr, mine)) + f" = {ann!r}")
    return Derivation(rule, f"{len(anns)} context entries |- {pretty_type(ty)}", [d], side, ck.write_stage)


def check_text(text: str, write_stage: Stage | None = None) -> Derivation:
    """Parse then check; malformed stages are reported as non-contractive."""
    try:
        j = parse_judgment(text)
    except SemiringError as e:
        raise CheckError("non-contractive stage", str(e)) from e
    return check_judgment(j, write_stage)
