"""Small random stage systems for cross-checking the grid oracle against the solver."""
from __future__ import annotations

import random
from fractions import Fraction

from pipia.infer import PipePred, SemiringEq, StagePred
from pipia.semiring import Stage
from pipia.symbolic import SSingleton, StageVar, SVar, s_add, s_mul

RELATIONS = ("lt", "leq", "strict_fifo")


def _grid_stage(rng: random.Random) -> Stage:
    while True:
        s, p = Fraction(rng.randint(0, 8), 8), Fraction(rng.randint(0, 8), 8)
        if s + p <= 1:
            return Stage(s, p)


def toy_system(rng: random.Random) -> tuple[list, dict]:
    """Constraints over at most four unknown stages, with schedule sizes."""
    n = rng.randint(2, 4)
    vs = [StageVar(f"a{i}") for i in range(n)]
    sizes = {}
    cons = [StagePred("contractive", (v,)) for v in vs]
    if n <= 2 and rng.random() < 0.5:
        x = SVar("X")
        sizes[x] = 2
        cons.append(SemiringEq(s_add(SSingleton(vs[0]), SSingleton(vs[1])), x))
        cons.append(PipePred(x))
    for _ in range(rng.randint(1, 4)):
        kind = rng.choice(["rel", "rel", "neq", "scale", "prod", "fix"])
        a, b = rng.sample(vs, 2)
        if kind == "rel":
            cons.append(StagePred(rng.choice(RELATIONS), (a, b)))
        elif kind == "neq":
            cons.append(StagePred("neq_id", (a,)))
        elif kind == "scale":
            cons.append(StagePred("scale_eq", (a, Fraction(rng.choice([1, 2, 4, 8])) / 8)))
        elif kind == "prod":
            c = rng.choice(vs)
            cons.append(SemiringEq(s_mul(SSingleton(a), SSingleton(b)), SSingleton(c)))
        else:
            cons.append(SemiringEq(SSingleton(a), SSingleton(_grid_stage(rng))))
    return cons, sizes


def toy_systems(seed: int, count: int) -> list[tuple[list, dict]]:
    rng = random.Random(seed)
    return [toy_system(rng) for _ in range(count)]
