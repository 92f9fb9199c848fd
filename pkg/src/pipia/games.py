"""Timed games: arenas, plays and deadlock-free strategies.

Moves are tuples of strings: a path of component tags followed by a base
move id, e.g. ``("R", "L", "(0.5, 0.1)#0", "q")``.  Arrow and tensor
components are tagged ``L``/``R`` (or by name for n-ary tensors); copies
created by a schedule action are tagged ``(scale, phase)#occurrence``.
Strategies are explicit finite sets of complete plays.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping

from .semiring import Schedule, Stage, fmt_q

Move = tuple


class ArenaError(ValueError):
    pass


class StrategyError(ValueError):
    pass


def stage_tag(x: Stage, n: int) -> str:
    return f"({fmt_q(x.scale)}, {fmt_q(x.phase)})#{n}"


def schedule_tags(j: Schedule) -> list[tuple[str, Stage]]:
    """Copy tags of ``J·A`` in canonical order."""
    return [(stage_tag(x, n), x) for x, m in j.entries for n in range(m)]


# --- arenas --------------------------------------------------------------

class Arena:
    """A pre-arena with its precedence relation (checked to be well-founded)."""

    def __init__(self, tau: Mapping, initial: Iterable, label: Mapping, enables: Iterable,
                 alternatives: Iterable[Iterable], validate: bool = True):
        self.tau: dict = {m: Fraction(t) for m, t in tau.items()}
        self.moves: tuple = tuple(sorted(self.tau, key=lambda m: (self.tau[m], m)))
        self.initial = frozenset(initial)
        self.label: dict = dict(label)
        self.enables = frozenset(enables)
        classes = [tuple(sorted(c, key=lambda m: (self.tau[m], m))) for c in alternatives]
        classes.sort(key=lambda c: (self.tau[c[0]], c[0]))
        self.classes: tuple = tuple(classes)
        self.cls: dict = {m: i for i, c in enumerate(self.classes) for m in c}
        self.parents: dict = {m: set() for m in self.moves}
        self.children: dict = {m: set() for m in self.moves}
        for a, b in self.enables:
            self.parents[b].add(a)
            self.children[a].add(b)
        self.answer_class: dict = {}
        for q in self.moves:
            if self.label[q][1] == "Q":
                ans = {self.cls[a] for a in self.children[q] if self.label[a][1] == "A"}
                self.answer_class[q] = ans.pop() if len(ans) == 1 else None
        if validate:
            self.validate()
        self.preds = self._precedence()

    # invariants of pre-arenas
    def validate(self):
        if set(self.cls) != set(self.moves):
            raise ArenaError("alternatives must partition the moves")
        for m in self.moves:
            lab = self.label[m]
            if len(lab) != 3 or lab[0] not in "OP" or lab[1] not in "QA" or lab[2] not in "MN":
                raise ArenaError(f"bad label {lab!r} for {m}")
            if not 0 <= self.tau[m] <= 1:
                raise ArenaError(f"timing of {m} outside [0, 1]")
        for e in self.initial:
            if self.label[e][:2] != "OQ":
                raise ArenaError(f"initial move {e} is not an O-question")
        for m in self.moves:
            if (m in self.initial) == bool(self.parents[m]):
                raise ArenaError(f"{m} must be initial exactly when it has no enabler")
        for a, b in self.enables:
            la, lb = self.label[a], self.label[b]
            if la[0] == lb[0]:
                raise ArenaError(f"{a} enables {b} without swapping players")
            if la[1] != "Q":
                raise ArenaError(f"answer {a} enables {b}")
            if la[2] == "N" and lb[2] != "N":
                raise ArenaError(f"dummy {a} enables actual {b}")
        for c in self.classes:
            t, l0 = self.tau[c[0]], self.label[c[0]][:2]
            for m in c:
                if self.tau[m] != t or self.label[m][:2] != l0:
                    raise ArenaError(f"alternatives {c[0]} and {m} differ in timing or labels")
        for c in self.classes:
            sets = {frozenset(self.cls[p] for p in self.parents[m]) for m in c}
            if len(sets) > 1:
                raise ArenaError(f"alternatives in the class of {c[0]} have non-alternative enablers")
        for a, b in self.enables:
            for a2, b2 in self.enables:
                if a == a2 and self.label[b][1] == "A" and self.label[b2][1] == "A" and self.cls[b] != self.cls[b2]:
                    raise ArenaError(f"answers {b}, {b2} of {a} are not alternatives")

    def _precedence(self) -> tuple:
        """Strict predecessors of each class under the least precedence relation."""
        n = len(self.classes)
        direct: list[set] = [set() for _ in range(n)]
        for a, b in self.enables:
            direct[self.cls[b]].add(self.cls[a])
        # timing: every class at an earlier time precedes
        times = sorted({self.tau[c[0]] for c in self.classes})
        by_time = {t: [i for i, c in enumerate(self.classes) if self.tau[c[0]] == t] for t in times}
        earlier: set = set()
        for t in times:
            for i in by_time[t]:
                direct[i] |= earlier
            earlier |= set(by_time[t])
        # fork/join: q |- a, q' |- a', q |- q' gives a' before a
        for q, q2 in self.enables:
            if self.label[q][1] == "Q" and self.label[q2][1] == "Q":
                for a in self.children[q]:
                    if self.label[a][1] != "A":
                        continue
                    for a2 in self.children[q2]:
                        if self.label[a2][1] == "A":
                            direct[self.cls[a]].add(self.cls[a2])
        preds: list = [None] * n
        state = [0] * n

        def visit(i):
            if state[i] == 2:
                return preds[i]
            if state[i] == 1:
                raise ArenaError(f"precedence is cyclic at {self.classes[i][0]}")
            state[i] = 1
            out = set()
            for j in direct[i]:
                out.add(j)
                out |= visit(j)
            if i in out:
                raise ArenaError(f"precedence is cyclic at {self.classes[i][0]}")
            state[i] = 2
            preds[i] = frozenset(out)
            return preds[i]

        for i in range(n):
            visit(i)
        return tuple(preds)

    def before(self, m, n) -> bool:
        """``m ≺_A n``."""
        return self.cls[m] in self.preds[self.cls[n]]

    def final_answers(self) -> set:
        return {a for e in self.initial for a in self.children[e] if self.label[a][1] == "A"}

    def t_may(self):
        if not self.initial:
            return None
        fin = self.final_answers()
        return (min(self.tau[e] for e in self.initial), max((self.tau[a] for a in fin), default=Fraction(1)))

    def t_must(self):
        if not self.initial:
            return None
        fin = self.final_answers()
        return (max(self.tau[e] for e in self.initial), min((self.tau[a] for a in fin), default=Fraction(1)))

    def key(self) -> tuple:
        return (
            tuple((m, self.tau[m], self.label[m]) for m in self.moves),
            tuple(sorted(self.initial)),
            tuple(sorted(self.enables)),
            self.classes,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Arena) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __len__(self) -> int:
        return len(self.moves)

    def __repr__(self) -> str:
        return f"<arena {len(self.moves)} moves, {len(self.classes)} classes>"

    def show(self, m) -> str:
        return show_move(m, self.tau[m])


def show_move(m: Move, t) -> str:
    return "/".join(m[:-1]) + ":" + m[-1] + "@" + fmt_q(t)


def _assemble(parts: list[tuple[tuple, "Arena", bool]], initial, extra_enables=()) -> Arena:
    """Disjoint union of prefixed arenas; ``flip`` swaps O and P."""
    tau, label, enables, alts = {}, {}, set(extra_enables), []
    for prefix, a, flip in parts:
        for m in a.moves:
            pm = prefix + m
            tau[pm] = a.tau[m]
            lab = a.label[m]
            if flip:
                lab = ("P" if lab[0] == "O" else "O") + lab[1:]
            label[pm] = lab
        enables |= {(prefix + x, prefix + y) for x, y in a.enables}
        alts += [[prefix + m for m in c] for c in a.classes]
    return Arena(tau, initial, label, enables, alts)


EMPTY = Arena({}, (), {}, (), ())


def exp_arena(max_int: int = 2) -> Arena:
    """Expressions: question ``q`` at 0, numeric answers at 1, dummies ``q~``/``a~``."""
    nums = [str(i) for i in range(max_int + 1)]
    tau = {("q~",): 0, ("a~",): 1, ("q",): 0, **{(n,): 1 for n in nums}}
    label = {("q~",): "OQN", ("a~",): "PAN", ("q",): "OQM", **{(n,): "PAM" for n in nums}}
    enables = {(("q~",), ("a~",))} | {(("q",), (n,)) for n in nums}
    alts = [[("q~",), ("q",)], [("a~",)] + [(n,) for n in nums]]
    return Arena(tau, {("q~",), ("q",)}, label, enables, alts)


def com_arena() -> Arena:
    """Commands: ``run`` at 0, ``done`` at 1, with dummy alternatives."""
    tau = {("run~",): 0, ("done~",): 1, ("run",): 0, ("done",): 1}
    label = {("run~",): "OQN", ("done~",): "PAN", ("run",): "OQM", ("done",): "PAM"}
    enables = {(("run~",), ("done~",)), (("run",), ("done",))}
    alts = [[("run~",), ("run",)], [("done~",), ("done",)]]
    return Arena(tau, {("run~",), ("run",)}, label, enables, alts)


def stage_action(x: Stage, a: Arena) -> Arena:
    """Retime every move: ``τ'(m) = scale·τ(m) + phase``."""
    return Arena({m: x.apply(t) for m, t in a.tau.items()}, a.initial, a.label, a.enables,
                 a.classes, validate=False)


def schedule_action(j: Schedule, a: Arena) -> Arena:
    """One retimed copy of ``a`` per stage occurrence of ``j``."""
    parts = [((tag,), stage_action(x, a), False) for tag, x in schedule_tags(j)]
    initial = [(tag,) + e for tag, _ in schedule_tags(j) for e in a.initial]
    return _assemble(parts, initial)


def tensor_n(components: list[tuple[str, Arena]]) -> Arena:
    tags = [t for t, _ in components]
    if len(set(tags)) != len(tags):
        raise ArenaError("duplicate tensor component tags")
    parts = [((t,), a, False) for t, a in components]
    initial = [(t,) + e for t, a in components for e in a.initial]
    return _assemble(parts, initial)


def tensor(a: Arena, b: Arena) -> Arena:
    return tensor_n([("L", a), ("R", b)])


def _within(inner, outer) -> bool:
    if inner is None:
        return True
    if outer is None:
        return False
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def arrow(a: Arena, b: Arena) -> Arena:
    """``A ⊸ B``; requires ``t_M(A) ⊆ t_m(B)``."""
    if not _within(a.t_may(), b.t_must()):
        lo, hi = a.t_may()
        bm = b.t_must()
        raise ArenaError(
            f"causality: may-interval [{fmt_q(lo)}, {fmt_q(hi)}] of the argument is not inside "
            f"the must-interval {'empty' if bm is None else f'[{fmt_q(bm[0])}, {fmt_q(bm[1])}]'} of the result"
        )
    extra = set()
    for e2 in b.initial:
        for e in a.initial:
            if a.label[e][2] == "N" or b.label[e2][2] == "M":
                extra.add((("R",) + e2, ("L",) + e))
    out = _assemble([(("L",), a, True), (("R",), b, False)], [("R",) + e for e in b.initial], extra)
    out.dom, out.cod = a, b
    return out


def relabel_arena(a: Arena, f: Callable[[Move], Move]) -> Arena:
    return Arena({f(m): t for m, t in a.tau.items()}, [f(e) for e in a.initial],
                 {f(m): l for m, l in a.label.items()}, [(f(x), f(y)) for x, y in a.enables],
                 [[f(m) for m in c] for c in a.classes], validate=False)


def is_isomorphism(f: Callable[[Move], Move], a: Arena, b: Arena) -> bool:
    """``f`` is a bijection on moves preserving τ, λ, E, ⊢ and ≍."""
    image = {m: f(m) for m in a.moves}
    if len(set(image.values())) != len(image) or set(image.values()) != set(b.moves):
        return False
    if any(a.tau[m] != b.tau[image[m]] or a.label[m] != b.label[image[m]] for m in a.moves):
        return False
    if {image[e] for e in a.initial} != set(b.initial):
        return False
    if {(image[x], image[y]) for x, y in a.enables} != set(b.enables):
        return False
    mapped = {frozenset(image[m] for m in c) for c in a.classes}
    return mapped == {frozenset(c) for c in b.classes}


def product_tags(j: Schedule, k: Schedule) -> dict:
    """Canonical bijection between copies of ``J·(K·A)`` and ``(J×K)·A``.

    Pairs of tags mapping to the same composite stage are numbered in the
    lexicographic order of the pair.
    """
    counts: dict = {}
    out = {}
    for tj, x in schedule_tags(j):
        for tk, y in schedule_tags(k):
            z = x * y
            n = counts.get(z, 0)
            counts[z] = n + 1
            out[(tj, tk)] = stage_tag(z, n)
    return out


def sum_tags(j: Schedule, k: Schedule) -> tuple[dict, dict]:
    """Copies of ``J·A`` and ``K·A`` inside ``(J+K)·A``: J's occurrences first."""
    left = {tag: tag for tag, _ in schedule_tags(j)}
    right = {}
    for x, m in k.entries:
        off = j.multiplicity(x)
        for n in range(m):
            right[stage_tag(x, n)] = stage_tag(x, off + n)
    return left, right


# --- plays ---------------------------------------------------------------

class _Walk:
    """Incremental legality of a play prefix."""

    __slots__ = ("arena", "seq", "done", "chosen", "moves")

    def __init__(self, arena: Arena):
        self.arena = arena
        self.seq: list = []
        self.done: set = set()
        self.chosen: dict = {}
        self.moves: set = set()

    def legal(self, m) -> bool:
        a = self.arena
        c = a.cls.get(m)
        if c is None or c in self.done:
            return False
        if not a.preds[c] <= self.done:
            return False
        if m not in a.initial and not (a.parents[m] & self.moves):
            return False
        if a.label[m][1] == "Q" and a.answer_class[m] is None:
            return False
        if a.label[m][1] == "A":
            # every played question whose answers live in this class must be answered by m
            for q in a.parents[m] | {p for x in a.classes[c] for p in a.parents[x]}:
                if q in self.moves and a.answer_class.get(q) == c and m not in a.children[q]:
                    return False
        return True

    def push(self, m):
        c = self.arena.cls[m]
        self.seq.append(m)
        self.done.add(c)
        self.chosen[c] = m
        self.moves.add(m)

    def pop(self):
        m = self.seq.pop()
        c = self.arena.cls[m]
        self.done.discard(c)
        del self.chosen[c]
        self.moves.discard(m)

    def complete(self) -> bool:
        return len(self.done) == len(self.arena.classes)

    def available(self) -> list[int]:
        a = self.arena
        return [i for i in range(len(a.classes)) if i not in self.done and a.preds[i] <= self.done]


def is_play(arena: Arena, seq) -> bool:
    w = _Walk(arena)
    for m in seq:
        if m in w.moves or not w.legal(m):
            return False
        w.push(m)
    return w.complete()


def plays(arena: Arena, allow: Callable[[_Walk, Move], bool] | None = None,
          prefix=()) -> Iterator[tuple]:
    """All legal complete plays extending ``prefix``, optionally filtered move by move."""
    w = _Walk(arena)
    for m in prefix:
        if not w.legal(m):
            return
        w.push(m)

    def go():
        if w.complete():
            yield tuple(w.seq)
            return
        for c in w.available():
            for m in arena.classes[c]:
                if w.legal(m) and (allow is None or allow(w, m)):
                    w.push(m)
                    yield from go()
                    w.pop()

    yield from go()


def is_position(arena: Arena, seq) -> bool:
    return next(plays(arena, prefix=seq), None) is not None


class TooManyPlays(OverflowError):
    pass


def merges(arena: Arena, seqs: list, limit: int | None = None) -> set:
    """Legal plays interleaving the given sequences, each kept in order."""
    w = _Walk(arena)
    out = set()
    idx = [0] * len(seqs)

    def go():
        if all(i == len(s) for i, s in zip(idx, seqs)):
            if w.complete():
                out.add(tuple(w.seq))
                if limit is not None and len(out) > limit:
                    raise TooManyPlays(limit)
            return
        for k, s in enumerate(seqs):
            i = idx[k]
            if i == len(s):
                continue
            m = s[i]
            if w.legal(m):
                idx[k] += 1
                w.push(m)
                go()
                w.pop()
                idx[k] -= 1

    go()
    return out


# --- strategies ----------------------------------------------------------

@dataclass(frozen=True)
class Strategy:
    arena: Arena
    plays: frozenset

    @classmethod
    def of(cls, arena: Arena, ps: Iterable, check: bool = True) -> "Strategy":
        ps = frozenset(tuple(p) for p in ps)
        if check:
            for p in ps:
                if not is_play(arena, p):
                    raise StrategyError("not a play: " + " ".join(arena.show(m) if m in arena.tau else str(m) for m in p))
        return cls(arena, ps)

    def __len__(self) -> int:
        return len(self.plays)

    def __eq__(self, other) -> bool:
        return isinstance(other, Strategy) and self.arena == other.arena and self.plays == other.plays

    def __hash__(self) -> int:
        return hash(self.plays)

    def positions(self) -> set:
        out = set()
        for p in self.plays:
            for i in range(len(p) + 1):
                out.add(p[:i])
        return out

    def is_responsive(self) -> bool:
        pos = self.positions()
        a = self.arena
        for q in pos:
            w = _Walk(a)
            for m in q:
                w.push(m)
            for c in w.available():
                for o in a.classes[c]:
                    if a.label[o][0] == "O" and w.legal(o) and q + (o,) not in pos:
                        if is_position(a, q + (o,)):
                            return False
        return True

    def is_saturated(self) -> bool:
        a = self.arena
        for p in self.plays:
            for i in range(len(p) - 1):
                m, m2 = p[i], p[i + 1]
                if a.label[m][0] == "P" or a.label[m2][0] == "O":
                    if not a.before(m, m2):
                        swapped = p[:i] + (m2, m) + p[i + 2:]
                        if swapped not in self.plays and is_play(a, swapped):
                            return False
        return True

    def precedence(self) -> dict:
        """Least relation meeting the strategy-precedence conditions, by class.

        Raises StrategyError when no precedence relation exists (deadlock).
        """
        a = self.arena
        n = len(a.classes)
        rel = [set(a.preds[i]) for i in range(n)]  # rel[j] = classes before j
        pos = self.positions()
        for q in pos:
            if len(q) < 2:
                continue
            base, m, m2 = q[:-2], q[-2], q[-1]
            if base + (m2, m) not in pos:
                rel[a.cls[m2]].add(a.cls[m])
        changed = True
        while changed:
            changed = False
            for j in range(n):
                extra = set()
                for i in rel[j]:
                    extra |= rel[i]
                if not extra <= rel[j]:
                    rel[j] |= extra
                    changed = True
        for j in range(n):
            if j in rel[j]:
                raise StrategyError(f"cyclic precedence at {a.classes[j][0]}")
        for j in range(n):
            for i in rel[j] - set(a.preds[j]):
                for m in a.classes[i]:
                    for m2 in a.classes[j]:
                        lce = last_common_enablers(a, m, m2)
                        if lce and any(a.label[x][0] != "O" for x in lce):
                            raise StrategyError(
                                f"{a.show(m)} must precede {a.show(m2)} but their last common enabler is a P-move")
        return {a.classes[j][0]: {a.classes[i][0] for i in rel[j]} for j in range(n)}

    def is_deadlock_free(self) -> bool:
        try:
            self.precedence()
        except StrategyError:
            return False
        return True

    def dump(self) -> str:
        lines = sorted(" ".join(self.arena.show(m) for m in p) for p in self.plays)
        return "".join(l + "\n" for l in lines)


def ancestors(a: Arena, m) -> set:
    out, todo = set(), [m]
    while todo:
        x = todo.pop()
        for p in a.parents[x]:
            if p not in out:
                out.add(p)
                todo.append(p)
    return out


def last_common_enablers(a: Arena, m, m2) -> set:
    common = ancestors(a, m) & ancestors(a, m2)
    return {c for c in common if not (ancestors_of_set(a, common - {c}) & {c})}


def ancestors_of_set(a: Arena, xs) -> set:
    out = set()
    for x in xs:
        out |= ancestors(a, x)
    return out


def policy_strategy(arena: Arena, decide: Callable[[int, dict], Move | None]) -> Strategy:
    """All legal plays in which each P-class is resolved by ``decide(class, chosen)``.

    ``chosen`` holds the representatives of the classes already played;
    ``decide`` should only look at classes that precede the given one.
    """

    def allow(w: _Walk, m) -> bool:
        c = arena.cls[m]
        if arena.label[m][0] != "P":
            return True
        want = decide(c, {k: v for k, v in w.chosen.items() if k in arena.preds[c]})
        return want is None or want == m

    return Strategy(arena, frozenset(plays(arena, allow)))


def relabel(s: Strategy, f: Callable[[Move], Move], arena: Arena) -> Strategy:
    return Strategy(arena, frozenset(tuple(f(m) for m in p) for p in s.plays))


# --- category structure --------------------------------------------------

def copycat(a: Arena) -> Strategy:
    """Identity on ``A``: each move is copied; O-moves of ``A`` appear on the right first."""
    arena = arrow(a, a)

    def allow(w: _Walk, m) -> bool:
        side, base = m[0], m[1:]
        other = ("L" if side == "R" else "R",) + base
        cls_other = arena.cls[other]
        if cls_other in w.done and w.chosen[cls_other] != other:
            return False
        if a.label[base][0] == "O":
            return side == "R" or other in w.moves
        return side == "L" or other in w.moves

    return Strategy(arena, frozenset(plays(arena, allow)))


def _interact(left: Strategy, right: Strategy, route_l, route_r, out: Arena) -> Strategy:
    """Parallel composition with hiding.

    ``route_x(move)`` returns ``("out", move')`` or ``("hide", key)``; the two
    strategies synchronise on equal hidden keys.  Only hidings that are
    legal plays of ``out`` are kept.
    """
    def project(p, route):
        return tuple(k for kind, k in map(route, p) if kind == "hide")

    index: dict = {}
    for t in right.plays:
        index.setdefault(project(t, route_r), []).append(t)
    result = set()
    for s in left.plays:
        rs = [route_l(m) for m in s]
        for t in index.get(project(s, route_l), ()):
            rt = [route_r(m) for m in t]
            w = _Walk(out)

            def go(i, j):
                if i == len(rs) and j == len(rt):
                    if w.complete():
                        result.add(tuple(w.seq))
                    return
                if i < len(rs) and rs[i][0] == "out":
                    m = rs[i][1]
                    if w.legal(m):
                        w.push(m)
                        go(i + 1, j)
                        w.pop()
                if j < len(rt) and rt[j][0] == "out":
                    m = rt[j][1]
                    if w.legal(m):
                        w.push(m)
                        go(i, j + 1)
                        w.pop()
                if i < len(rs) and j < len(rt) and rs[i][0] == "hide" and rt[j][0] == "hide" and rs[i][1] == rt[j][1]:
                    go(i + 1, j + 1)

            go(0, 0)
    return Strategy(out, frozenset(result))


def compose(sigma: Strategy, tau: Strategy) -> Strategy:
    """``σ;τ`` for ``σ : A ⊸ B`` and ``τ : B ⊸ C``."""
    a_s, a_t = sigma.arena, tau.arena
    if getattr(a_s, "cod", None) is None or getattr(a_t, "dom", None) is None:
        raise StrategyError("composition needs arrow arenas")
    if a_s.cod != a_t.dom:
        raise StrategyError("arena mismatch in composition")
    out = arrow(a_s.dom, a_t.cod)

    def rl(m):
        return ("out", m) if m[0] == "L" else ("hide", m[1:])

    def rr(m):
        return ("out", m) if m[0] == "R" else ("hide", m[1:])

    return _interact(sigma, tau, rl, rr, out)


def interleave(sigma: Strategy, tau: Strategy, limit: int | None = None) -> Strategy:
    """``σ ⊗ τ : A ⊗ C ⊸ B ⊗ D``; raises TooManyPlays beyond ``limit`` plays."""
    a, b = sigma.arena.dom, sigma.arena.cod
    c, d = tau.arena.dom, tau.arena.cod
    out = arrow(tensor(a, c), tensor(b, d))

    def put(tag):
        return lambda m: (m[0], tag) + m[1:]

    result = set()
    for p in sigma.plays:
        pl = tuple(map(put("L"), p))
        for q in tau.plays:
            result |= merges(out, [pl, tuple(map(put("R"), q))], limit)
            if limit is not None and len(result) > limit:
                raise TooManyPlays(limit)
    return Strategy(out, frozenset(result))


def iso_strategy(a: Arena, b: Arena, f: Callable[[Move], Move]) -> Strategy:
    """Copycat along an arena isomorphism ``f : A -> B``, as a strategy on ``A ⊸ B``."""
    if not is_isomorphism(f, a, b):
        raise ArenaError("not an arena isomorphism")
    cc = copycat(a)
    out = arrow(a, b)
    return relabel(cc, lambda m: m if m[0] == "L" else ("R",) + f(m[1:]), out)


def delta(j: Schedule, k: Schedule, a: Arena) -> Strategy:
    """``δ : J·A ⊗ K·A ⊸ (J+K)·A``."""
    left, right = sum_tags(j, k)
    src = tensor(schedule_action(j, a), schedule_action(k, a))
    dst = schedule_action(j + k, a)

    def f(m):
        side, tag = m[0], m[1]
        return ((left if side == "L" else right)[tag],) + m[2:]

    return iso_strategy(src, dst, f)


def schedule_strategy(j: Schedule, s: Strategy) -> Strategy:
    """``J·σ : J·A ⊸ J·B`` for ``σ : A ⊸ B``: one retimed copy per stage occurrence."""
    a, b = s.arena.dom, s.arena.cod
    out = arrow(schedule_action(j, a), schedule_action(j, b))
    copies = []
    for tag, _ in schedule_tags(j):
        copies.append([tuple((m[0], tag) + m[1:] for m in p) for p in s.plays])
    result = set()

    def go(k, chosen):
        if k == len(copies):
            result.update(merges(out, chosen))
            return
        for p in copies[k]:
            go(k + 1, chosen + [p])

    go(0, [])
    return Strategy(out, frozenset(result))


def random_strategy(arena: Arena, seed: int) -> Strategy:
    """A causal policy strategy: each P-choice is a seeded hash of the past choices.

    Only legal candidates are offered, so every O-move keeps a completion.
    """
    import hashlib

    def pick(c, past, candidates):
        h = hashlib.blake2b(repr((seed, c, sorted(past.items()))).encode(), digest_size=8).digest()
        return candidates[int.from_bytes(h, "big") % len(candidates)]

    def decide(c, past):
        played = set(past.values())
        cands = []
        for m in arena.classes[c]:
            if m not in arena.initial and not (arena.parents[m] & played):
                continue
            if arena.label[m][1] == "A" and not any(
                    q in played and arena.answer_class.get(q) == c for q in arena.parents[m]):
                continue
            if arena.label[m][1] == "Q" and arena.answer_class[m] is None:
                continue
            cands.append(m)
        return pick(c, past, cands) if cands else None

    return policy_strategy(arena, decide)
