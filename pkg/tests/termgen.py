"""Random closed, well-simple-typed PIA terms without local store."""
from __future__ import annotations

import random

from pipia.syntax import App, Const, Lam, Var, term_depth

EXP_T, COM_T = "exp", "com"
FUN_T = ("exp", "exp")  # exp -> exp


def _leaf(rng, ty, env):
    names = [n for n, t in env.items() if t == ty]
    if names and rng.random() < 0.6:
        return Var(rng.choice(names))
    return Const("one") if ty == EXP_T else Const("skip")


def _gen(rng, ty, env, depth, fresh):
    if ty == FUN_T:
        x = f"x{next(fresh)}"
        return Lam(x, _gen(rng, EXP_T, {**env, x: EXP_T}, depth - 1, fresh))
    if depth <= 1:
        return _leaf(rng, ty, env)
    d = depth - 1
    choices = ["leaf", "if", "beta"]
    choices += ["op"] * 2 if ty == EXP_T else ["comp", "seq", "par"]
    if any(t == FUN_T for t in env.values()) and ty == EXP_T:
        choices += ["call"] * 2
    pick = rng.choice(choices)
    if pick == "leaf":
        return _leaf(rng, ty, env)
    if pick == "op":
        return App(App(Const("op"), _gen(rng, EXP_T, env, d - 1, fresh)), _gen(rng, EXP_T, env, d - 1, fresh))
    if pick in ("comp", "seq", "par"):
        return App(App(Const(pick), _gen(rng, COM_T, env, d - 1, fresh)), _gen(rng, COM_T, env, d - 1, fresh))
    if pick == "if":
        c = Const("if", (ty, None, None))
        return App(App(App(c, _gen(rng, EXP_T, env, d - 2, fresh)),
                       _gen(rng, ty, env, d - 2, fresh)), _gen(rng, ty, env, d - 2, fresh))
    if pick == "call":
        f = rng.choice([n for n, t in env.items() if t == FUN_T])
        return App(Var(f), _gen(rng, EXP_T, env, d - 1, fresh))
    # beta redex binding either an expression or a function
    x = f"x{next(fresh)}"
    arg_t = rng.choice([EXP_T, FUN_T])
    body = _gen(rng, ty, {**env, x: arg_t}, d - 1, fresh)
    return App(Lam(x, body), _gen(rng, arg_t, env, d - 1, fresh))


def random_term(rng: random.Random, max_depth: int = 5, min_depth: int = 3):
    """A term of type com or exp with ``term_depth`` in [min_depth, max_depth]."""
    import itertools

    while True:
        t = _gen(rng, rng.choice([EXP_T, COM_T]), {}, max_depth, itertools.count())
        if min_depth <= term_depth(t) <= max_depth:
            return t
