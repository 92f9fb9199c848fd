"""Symbolic schedule and stage expressions used during inference."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .semiring import ONE_SCHEDULE, ZERO_SCHEDULE, Schedule, Stage, fmt_q


@dataclass(frozen=True)
class StageVar:
    """Unknown stage, e.g. a constant's timing parameter or the write stage ``w``."""

    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SVar:
    """Unknown schedule. ``name`` is None only for anonymous source holes."""

    name: str | None

    def __repr__(self) -> str:
        return f"?{self.name or ''}"


@dataclass(frozen=True)
class SSingleton:
    """The one-stage schedule ``[x]``."""

    stage: Union[Stage, StageVar]

    def __repr__(self) -> str:
        return f"[{self.stage!r}]"


@dataclass(frozen=True)
class SAdd:
    args: tuple

    def __repr__(self) -> str:
        return "(" + " + ".join(map(repr, self.args)) + ")"


@dataclass(frozen=True)
class SMul:
    args: tuple

    def __repr__(self) -> str:
        return "(" + " × ".join(map(repr, self.args)) + ")"


SchedExpr = Union[Schedule, SVar, SSingleton, SAdd, SMul]
StageExpr = Union[Stage, StageVar]


def s_add(*args) -> SchedExpr:
    flat = []
    for a in args:
        if isinstance(a, SAdd):
            flat.extend(a.args)
        elif a == ZERO_SCHEDULE:
            continue
        else:
            flat.append(a)
    if not flat:
        return ZERO_SCHEDULE
    if len(flat) == 1:
        return flat[0]
    return SAdd(tuple(flat))


def s_mul(*args) -> SchedExpr:
    flat = []
    for a in args:
        if isinstance(a, SMul):
            flat.extend(a.args)
        elif a == ONE_SCHEDULE:
            continue
        else:
            flat.append(a)
    if any(a == ZERO_SCHEDULE for a in flat):
        return ZERO_SCHEDULE
    if not flat:
        return ONE_SCHEDULE
    if len(flat) == 1:
        return flat[0]
    return SMul(tuple(flat))


def is_concrete(e) -> bool:
    if isinstance(e, (Schedule, Stage)):
        return True
    if isinstance(e, SSingleton):
        return isinstance(e.stage, Stage)
    if isinstance(e, (SAdd, SMul)):
        return all(is_concrete(a) for a in e.args)
    return False


def sched_vars(e) -> set:
    """All SVar and StageVar symbols occurring in ``e``."""
    if isinstance(e, (SVar, StageVar)):
        return {e}
    if isinstance(e, SSingleton):
        return sched_vars(e.stage)
    if isinstance(e, (SAdd, SMul)):
        out = set()
        for a in e.args:
            out |= sched_vars(a)
        return out
    return set()


class MissingVariable(KeyError):
    pass


def eval_stage(e: StageExpr, model: Mapping) -> Stage:
    if isinstance(e, Stage):
        return e
    if e not in model:
        raise MissingVariable(e.name)
    v = model[e]
    if isinstance(v, Schedule):
        (v,) = v.stages()
    return v


def eval_sched(e: SchedExpr, model: Mapping) -> Schedule:
    if isinstance(e, Schedule):
        return e
    if isinstance(e, SVar):
        if e not in model:
            raise MissingVariable(e.name)
        return model[e]
    if isinstance(e, SSingleton):
        return Schedule([eval_stage(e.stage, model)])
    if isinstance(e, SAdd):
        acc = ZERO_SCHEDULE
        for a in e.args:
            acc = acc + eval_sched(a, model)
        return acc
    if isinstance(e, SMul):
        acc = ONE_SCHEDULE
        for a in e.args:
            acc = acc * eval_sched(a, model)
        return acc
    raise TypeError(f"not a schedule expression: {e!r}")


def substitute_sched(e, model: Mapping):
    """Replace every variable bound in ``model``; evaluate when fully concrete."""
    if isinstance(e, (SVar, StageVar)):
        return model.get(e, e)
    if isinstance(e, SSingleton):
        st = substitute_sched(e.stage, model)
        if isinstance(st, Schedule):
            return st
        return Schedule([st]) if isinstance(st, Stage) else SSingleton(st)
    if isinstance(e, (SAdd, SMul)):
        args = [substitute_sched(a, model) for a in e.args]
        out = s_add(*args) if isinstance(e, SAdd) else s_mul(*args)
        return eval_sched(out, {}) if is_concrete(out) else out
    return e


def size_of(e, sizes: Mapping) -> int:
    """Size homomorphism N[Aff] -> N evaluated under a size model."""
    if isinstance(e, Schedule):
        return e.size()
    if isinstance(e, SSingleton):
        return 1
    if isinstance(e, SVar):
        return sizes[e]
    if isinstance(e, SAdd):
        return sum(size_of(a, sizes) for a in e.args)
    if isinstance(e, SMul):
        n = 1
        for a in e.args:
            n *= size_of(a, sizes)
        return n
    raise TypeError(e)


def show_sched(e) -> str:
    """Surface syntax for an annotation, as accepted by the parser."""
    if isinstance(e, Schedule):
        return "[" + ";".join(show_stage(s) for s in e.stages()) + "]"
    if isinstance(e, SSingleton):
        return "[" + show_stage(e.stage) + "]"
    if isinstance(e, SVar):
        return "?" + (e.name or "")
    if isinstance(e, SAdd):
        return "(" + " + ".join(show_sched(a) for a in e.args) + ")"
    if isinstance(e, SMul):
        return "(" + " x ".join(show_sched(a) for a in e.args) + ")"
    raise TypeError(e)


def show_stage(s) -> str:
    if isinstance(s, StageVar):
        return s.name
    if s is None:
        return "?"
    return f"({fmt_q(s.scale)}, {fmt_q(s.phase)})"
