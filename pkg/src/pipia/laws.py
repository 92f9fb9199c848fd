"""Randomised law suites shared by the test-suite and the ``laws`` command."""
from __future__ import annotations

import random
from fractions import Fraction

from . import games as g
from .semiring import INF, NAT, SCHEDULE, ZOI, Schedule, Stage

# --- semiring laws -------------------------------------------------------


def random_stage(rng: random.Random, max_den: int = 64) -> Stage:
    d = rng.randint(1, max_den)
    a = rng.randint(0, d)
    b = rng.randint(0, d - a)
    return Stage(Fraction(a, d), Fraction(b, d))


def random_element(instance, rng: random.Random, max_stages: int = 4):
    if instance is NAT:
        return rng.randint(0, 20)
    if instance is ZOI:
        return rng.choice([0, 1, INF])
    return Schedule([random_stage(rng) for _ in range(rng.randint(0, max_stages))])


LAWS = {
    "add-assoc": lambda S, a, b, c: S.add(S.add(a, b), c) == S.add(a, S.add(b, c)),
    "mul-assoc": lambda S, a, b, c: S.mul(S.mul(a, b), c) == S.mul(a, S.mul(b, c)),
    "add-comm": lambda S, a, b, c: S.add(a, b) == S.add(b, a),
    "left-distrib": lambda S, a, b, c: S.mul(a, S.add(b, c)) == S.add(S.mul(a, b), S.mul(a, c)),
    "right-distrib": lambda S, a, b, c: S.mul(S.add(a, b), c) == S.add(S.mul(a, c), S.mul(b, c)),
    "zero-annihilates": lambda S, a, b, c: S.mul(S.zero, a) == S.zero == S.mul(a, S.zero),
    "add-unit": lambda S, a, b, c: S.add(S.zero, a) == a == S.add(a, S.zero),
    "mul-unit": lambda S, a, b, c: S.mul(S.one, a) == a == S.mul(a, S.one),
}


def semiring_laws(seed: int = 0, cases: int = 1000) -> dict:
    """Failure counts per (instance, law)."""
    rng = random.Random(seed)
    out = {}
    for inst in (NAT, ZOI, SCHEDULE):
        for name, law in LAWS.items():
            bad = 0
            for _ in range(cases):
                a, b, c = (random_element(inst, rng) for _ in range(3))
                if not law(inst, a, b, c):
                    bad += 1
            out[(inst.name, name)] = bad
    return out


# --- small arenas --------------------------------------------------------

def _inside(rng: random.Random, lo: Fraction, hi: Fraction) -> Stage:
    """A stage whose interval is a proper part of [lo, hi]."""
    a, b = sorted(rng.sample(range(0, 9), 2))
    start, end = lo + (hi - lo) * Fraction(a, 8), lo + (hi - lo) * Fraction(b, 8)
    return Stage(end - start, start)


def base_arena(kind: str) -> g.Arena:
    return {"com": g.com_arena(), "exp0": g.exp_arena(0), "exp1": g.exp_arena(1)}[kind]


def arena_chain(rng: random.Random, length: int = 4, stages: list | None = None) -> list[g.Arena]:
    """Arenas A_0, ..., A_{n-1} with every ``A_i ⊸ A_j`` (i <= j) causal; at most 10 moves each.

    Passing the ``stages`` of another chain (its ``.stages``) gives a chain with the
    same intervals level by level, so tensors of the two chains stay causal.
    """
    kinds = ["com", "exp0", "exp1"]
    chain = [base_arena(rng.choice(kinds))]
    lo, hi = Fraction(0), Fraction(1)
    picked = []
    for i in range(length - 1):
        kind = rng.choice(kinds)
        copies = 1 if kind == "exp1" and rng.random() < 0.5 else rng.randint(1, 2)
        x = stages[i] if stages else _inside(rng, lo, hi)
        picked.append(x)
        lo, hi = x.start, x.end
        # copies share one stage: with distinct intervals A ⊸ A is not causal
        chain.append(g.schedule_action(Schedule([x] * copies), base_arena(kind)))
    out = _Chain(chain[::-1])
    out.stages = picked
    return out


class _Chain(list):
    stages: list


def arena_family(seed: int = 0, count: int = 24) -> list[list[g.Arena]]:
    rng = random.Random(seed)
    return [arena_chain(rng) for _ in range(count)]


def category_laws(seed: int = 0, chains: int = 24, samples: int = 2, quadruples: int = 50,
                  max_product: int = 16, play_limit: int = 200) -> dict:
    """Counts of checked and failed instances of the category laws."""
    fam = arena_family(seed, chains)
    res = {k: [0, 0] for k in ("identity", "associativity", "functoriality", "closure", "arenas")}

    def tally(k, ok):
        res[k][0] += 1
        res[k][1] += 0 if ok else 1

    seen = set()
    for ci, (a, b, c, d) in enumerate(fam):
        for x in (a, b, c, d):
            if x not in seen and len(x) <= 12:
                seen.add(x)
        for k in range(samples):
            s = g.random_strategy(g.arrow(a, b), seed * 1000 + ci * 10 + k)
            t = g.random_strategy(g.arrow(b, c), seed * 1000 + ci * 10 + k + 3)
            u = g.random_strategy(g.arrow(c, d), seed * 1000 + ci * 10 + k + 6)
            tally("identity", g.compose(g.copycat(a), s) == s and g.compose(s, g.copycat(b)) == s)
            st = g.compose(s, t)
            tally("associativity", g.compose(st, u) == g.compose(s, g.compose(t, u)))
            tally("closure", st.is_responsive() and st.is_saturated() and st.is_deadlock_free())
    res["arenas"] = [len(seen), 0]
    rng = random.Random(seed + 1)
    n = 0
    while res["functoriality"][0] < quadruples and n < 50 * quadruples:
        n += 1
        first = rng.choice(fam)
        (a, b, c, _), (a2, b2, c2, _) = first, arena_chain(rng, 4, first.stages)
        s = g.random_strategy(g.arrow(a, b), n)
        s2 = g.random_strategy(g.arrow(b, c), n + 1)
        t = g.random_strategy(g.arrow(a2, b2), n + 2)
        t2 = g.random_strategy(g.arrow(b2, c2), n + 3)
        # tensors interleave simultaneous moves freely; keep the play-sets desk-sized
        if len(s) * len(t) > max_product or len(s2) * len(t2) > max_product:
            continue
        cs, ct = g.compose(s, s2), g.compose(t, t2)
        if len(cs) * len(ct) > max_product:
            continue
        try:
            lhs = g.interleave(cs, ct, play_limit)
            rhs = g.compose(g.interleave(s, t, play_limit), g.interleave(s2, t2, play_limit))
        except g.TooManyPlays:
            continue
        tally("functoriality", lhs == rhs)
    return {k: tuple(v) for k, v in res.items()}


def random_schedule(rng: random.Random, max_size: int = 3) -> Schedule:
    return Schedule([random_stage(rng, 16) for _ in range(rng.randint(0, max_size))])


def action_functoriality(seed: int = 0, cases: int = 100) -> tuple[int, int]:
    """(checked, failed) for ``(J×K)·A ≅ J·(K·A)`` under the canonical tag renaming."""
    rng = random.Random(seed)
    bad = 0
    for _ in range(cases):
        j, k = random_schedule(rng), random_schedule(rng)
        a = base_arena(rng.choice(["com", "exp0", "exp1"]))
        nested = g.schedule_action(j, g.schedule_action(k, a))
        flat = g.schedule_action(j * k, a)
        tags = g.product_tags(j, k)
        if not g.is_isomorphism(lambda m: (tags[(m[0], m[1])],) + m[2:], nested, flat):
            bad += 1
    return cases, bad


def _associator(m):
    """``(X ⊗ Y) ⊗ Z -> X ⊗ (Y ⊗ Z)`` on moves."""
    if m[0] == "R":
        return ("R", "R") + m[1:]
    if m[1] == "L":
        return ("L",) + m[2:]
    return ("R", "L") + m[2:]


def delta_map(j: Schedule, k: Schedule):
    """``δ : J·A ⊗ K·A -> (J+K)·A`` on moves."""
    left, right = g.sum_tags(j, k)
    return lambda m: ((left if m[0] == "L" else right)[m[1]],) + m[2:]


def delta_coherence(seed: int = 0, cases: int = 100) -> tuple[int, int]:
    """The two ways of merging ``(J·A ⊗ K·A) ⊗ L·A`` into ``(J+K+L)·A`` agree.

    Copycat along an isomorphism is determined by the move bijection, so
    the composites are compared as bijections, each checked to be an
    arena isomorphism.
    """
    rng = random.Random(seed)
    bad = 0
    for _ in range(cases):
        a = base_arena(rng.choice(["com", "exp0", "exp1"]))
        j, k, l = (random_schedule(rng, 2) for _ in range(3))
        ja, ka, la = (g.schedule_action(x, a) for x in (j, k, l))
        src = g.tensor(g.tensor(ja, ka), la)
        dst = g.schedule_action(j + k + l, a)
        d_jk, d_jk_l = delta_map(j, k), delta_map(j + k, l)
        d_kl, d_j_kl = delta_map(k, l), delta_map(j, k + l)

        def via_left(m):
            if m[0] == "L":
                return d_jk_l(("L",) + d_jk(m[1:]))
            return d_jk_l(m)

        def via_right(m):
            m = _associator(m)
            if m[0] == "R":
                return d_j_kl(("R",) + d_kl(m[1:]))
            return d_j_kl(m)

        ok = g.is_isomorphism(via_left, src, dst) and g.is_isomorphism(via_right, src, dst)
        if not ok or any(via_left(m) != via_right(m) for m in src.moves):
            bad += 1
    return cases, bad
