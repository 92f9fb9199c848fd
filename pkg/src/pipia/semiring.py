"""Resource semirings and the algebra of contractive affine stages.

Three concrete instances are provided: natural numbers (``NAT``), the
saturating affine semiring {0, 1, inf} (``ZOI``) and schedules, i.e. finite
multisets of stages (``SCHEDULE``).  All arithmetic is exact.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

Number = Union[Fraction, int, str, float]


class SemiringError(ValueError):
    pass


def q(x: Number) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest decimal repr so ``q(0.1) == Fraction(1, 10)``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x).strip())


def fmt_q(x: Fraction) -> str:
    """Decimal text when the expansion terminates, ``p/q`` otherwise."""
    x = Fraction(x)
    d = x.denominator
    for f in (2, 5):
        while d % f == 0:
            d //= f
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    if x.denominator == 1:
        return f"{x.numerator}.0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    whole, rest = divmod(x.numerator, x.denominator)
    digits = []
    while rest:
        rest *= 10
        digit, rest = divmod(rest, x.denominator)
        digits.append(str(digit))
    return f"{sign}{whole}.{''.join(digits)}"


@dataclass(frozen=True, order=False)
class Stage:
    """A contractive affine map ``t -> scale * t + phase`` on [0, 1]."""

    scale: Fraction
    phase: Fraction

    def __post_init__(self):
        object.__setattr__(self, "scale", q(self.scale))
        object.__setattr__(self, "phase", q(self.phase))
        if not is_contractive(self.scale, self.phase):
            raise SemiringError(f"stage ({fmt_q(self.scale)}, {fmt_q(self.phase)}) is not contractive")

    @classmethod
    def of(cls, scale: Number, phase: Number) -> "Stage":
        return cls(q(scale), q(phase))

    def __mul__(self, other: "Stage") -> "Stage":
        if not isinstance(other, Stage):
            return NotImplemented
        return stage_compose(self, other)

    @property
    def start(self) -> Fraction:
        return self.phase

    @property
    def end(self) -> Fraction:
        return self.scale + self.phase

    def interval(self) -> tuple[Fraction, Fraction]:
        return (self.phase, self.scale + self.phase)

    def apply(self, t: Number) -> Fraction:
        return self.scale * q(t) + self.phase

    def sort_key(self):
        return (self.phase, self.scale)

    def __repr__(self) -> str:
        return f"({fmt_q(self.scale)}, {fmt_q(self.phase)})"


def is_contractive(scale: Fraction, phase: Fraction) -> bool:
    return 0 <= scale <= 1 and phase >= 0 and scale + phase <= 1


IDENTITY = Stage(Fraction(1), Fraction(0))


def stage_compose(x: Stage, y: Stage) -> Stage:
    """Matrix product ``x × y``: run ``y`` inside the interval of ``x``."""
    return Stage(x.scale * y.scale, x.scale * y.phase + x.phase)


def stage_interval(x: Stage) -> tuple[Fraction, Fraction]:
    return x.interval()


def subset(x: Stage, y: Stage) -> bool:
    return x.phase >= y.phase and x.end <= y.end


def egli_milner_leq(x: Stage, y: Stage) -> bool:
    return x.phase <= y.phase and x.end <= y.end


def disjoint(x: Stage, y: Stage) -> bool:
    return x.end < y.phase or y.end < x.phase


def strict_fifo(x: Stage, y: Stage) -> bool:
    return egli_milner_leq(x, y) and x.phase != y.phase and x.end != y.end


def strictly_before(x: Stage, y: Stage) -> bool:
    return egli_milner_leq(x, y) and disjoint(x, y)


def stage_orders(x: Stage, y: Stage) -> dict[str, bool]:
    return {
        "subset": subset(x, y),
        "egli_milner_leq": egli_milner_leq(x, y),
        "disjoint": disjoint(x, y),
        "fifo": egli_milner_leq(x, y),
        "strict_fifo": strict_fifo(x, y),
        "strictly_before": strictly_before(x, y),
    }


class Schedule:
    """Finite multiset of stages; an element of N[Aff].

    Entries are kept in canonical order (phase, scale) so equal schedules
    compare and hash equal.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, stages: Iterable[Stage] | dict[Stage, int] = ()):
        if isinstance(stages, dict):
            counts = Counter({s: m for s, m in stages.items() if m})
            if any(m < 0 for m in counts.values()):
                raise SemiringError("negative multiplicity")
        else:
            counts = Counter(stages)
        for s in counts:
            if not isinstance(s, Stage):
                raise TypeError(f"not a stage: {s!r}")
        self._entries = tuple(sorted(counts.items(), key=lambda e: e[0].sort_key()))
        self._hash = hash(self._entries)

    @classmethod
    def of(cls, *pairs: tuple[Number, Number]) -> "Schedule":
        return cls(Stage.of(s, p) for s, p in pairs)

    @property
    def entries(self) -> tuple[tuple[Stage, int], ...]:
        return self._entries

    def stages(self) -> list[Stage]:
        """Stages with repetition, canonical order."""
        return [s for s, m in self._entries for _ in range(m)]

    def support(self) -> list[Stage]:
        return [s for s, _ in self._entries]

    def multiplicity(self, x: Stage) -> int:
        for s, m in self._entries:
            if s == x:
                return m
        return 0

    def size(self) -> int:
        return sum(m for _, m in self._entries)

    def __len__(self) -> int:
        return self.size()

    def __iter__(self) -> Iterator[Stage]:
        return iter(self.stages())

    def __eq__(self, other) -> bool:
        return isinstance(other, Schedule) and self._entries == other._entries

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other: "Schedule") -> "Schedule":
        if not isinstance(other, Schedule):
            return NotImplemented
        c = Counter(dict(self._entries))
        c.update(dict(other._entries))
        return Schedule(dict(c))

    def __mul__(self, other: "Schedule") -> "Schedule":
        if not isinstance(other, Schedule):
            return NotImplemented
        c: Counter = Counter()
        for y, m in self._entries:
            for z, n in other._entries:
                c[stage_compose(y, z)] += m * n
        return Schedule(dict(c))

    def __repr__(self) -> str:
        return "[" + ";".join(repr(s) for s in self.stages()) + "]"


ZERO_SCHEDULE = Schedule()
ONE_SCHEDULE = Schedule([IDENTITY])


def schedule_size(j: Schedule) -> int:
    return j.size()


def is_pipeline(j: Schedule) -> bool:
    if any(m > 1 for _, m in j.entries):
        return False
    xs = j.support()
    return all(
        x == y or strict_fifo(x, y) or strict_fifo(y, x)
        for i, x in enumerate(xs)
        for y in xs[i + 1:]
    )


def pipeline_order(j: Schedule) -> list[Stage] | None:
    """Stages of a pipeline listed along the strict FIFO chain."""
    if not is_pipeline(j):
        return None
    # strict FIFO chains are sorted by start time
    return sorted(j.support(), key=lambda s: (s.phase, s.end))


# --- semiring instances -------------------------------------------------

class _Inf:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Inf, ())


INF = _Inf()


class Semiring:
    name = "abstract"
    zero = None
    one = None
    commutative = True

    def contains(self, x) -> bool:
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def size(self, a) -> int:
        raise NotImplementedError

    def sum(self, xs):
        acc = self.zero
        for x in xs:
            acc = self.add(acc, x)
        return acc

    def product(self, xs):
        acc = self.one
        for x in xs:
            acc = self.mul(acc, x)
        return acc

    def __repr__(self) -> str:
        return f"<semiring {self.name}>"


class NatSemiring(Semiring):
    name = "nat"
    zero = 0
    one = 1

    def contains(self, x) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and x >= 0

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def size(self, a) -> int:
        return a


class ZeroOneInfSemiring(Semiring):
    """Counts uses up to "more than once": a plain affine discipline."""

    name = "zoi"
    zero = 0
    one = 1

    def contains(self, x) -> bool:
        return x is INF or (type(x) is int and x in (0, 1))

    def add(self, a, b):
        if a == 0:
            return b
        if b == 0:
            return a
        return INF

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if a is INF or b is INF:
            return INF
        return 1

    def size(self, a):
        return a


class ScheduleSemiring(Semiring):
    name = "schedule"
    zero = ZERO_SCHEDULE
    one = ONE_SCHEDULE
    commutative = False

    def contains(self, x) -> bool:
        return isinstance(x, Schedule)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def size(self, a) -> int:
        return a.size()


NAT = NatSemiring()
ZOI = ZeroOneInfSemiring()
SCHEDULE = ScheduleSemiring()
INSTANCES = {s.name: s for s in (NAT, ZOI, SCHEDULE)}


def _check(instance: Semiring, *xs):
    for x in xs:
        if not instance.contains(x):
            raise SemiringError(f"{x!r} is not an element of {instance.name}")


def sr_add(instance: Semiring, a, b):
    _check(instance, a, b)
    return instance.add(a, b)


def sr_mul(instance: Semiring, a, b):
    _check(instance, a, b)
    return instance.mul(a, b)


def sr_zero(instance: Semiring):
    return instance.zero


def sr_one(instance: Semiring):
    return instance.one
