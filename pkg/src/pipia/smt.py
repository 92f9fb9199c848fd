"""SMT-LIB2 emission, an external solver driver and a grid oracle.

Arithmetic formulas are small tuples ``(op, arg, ...)`` whose leaves are
symbol names (``str``) or exact numbers.  The same formula can be printed
as SMT-LIB2 or evaluated in Python, which keeps model re-checking exact.
"""
from __future__ import annotations

import itertools
import os
import re
import shlex
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .semiring import Schedule, Stage, is_contractive

Formula = Union[str, int, Fraction, tuple]

DEFAULT_SOLVER = "z3 -in"
SOLVER_ENV = "PIPIA_SOLVER"


class SmtError(Exception):
    pass


# --- formulas ------------------------------------------------------------

def num(x) -> str:
    x = Fraction(x)
    if x < 0:
        return f"(- {num(-x)})"
    if x.denominator == 1:
        return f"{x.numerator}"
    return f"(/ {x.numerator} {x.denominator})"


def quote(name: str) -> str:
    if re.fullmatch(r"[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*", name):
        return name
    if "|" in name or "\\" in name:
        raise SmtError(f"symbol cannot be quoted: {name!r}")
    return f"|{name}|"


def render(f: Formula, sort: str = "Real") -> str:
    if isinstance(f, str):
        return quote(f)
    if isinstance(f, bool):
        return "true" if f else "false"
    if isinstance(f, (int, Fraction)):
        if sort == "Int":
            if Fraction(f).denominator != 1:
                raise SmtError(f"non-integer literal {f} in integer script")
            return str(int(f)) if f >= 0 else f"(- {-int(f)})"
        return num(f)
    op, *args = f
    return "(" + op + " " + " ".join(render(a, sort) for a in args) + ")"


def evaluate(f: Formula, env: Mapping[str, Fraction]):
    if isinstance(f, bool):
        return f
    if isinstance(f, str):
        return env[f]
    if isinstance(f, (int, Fraction)):
        return Fraction(f)
    op, *args = f
    if op == "and":
        return all(evaluate(a, env) for a in args)
    if op == "or":
        return any(evaluate(a, env) for a in args)
    if op == "not":
        return not evaluate(args[0], env)
    vals = [evaluate(a, env) for a in args]
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:], Fraction(0))
    chain = {"=": lambda a, b: a == b, "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
             ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}
    if op in chain:
        return all(chain[op](a, b) for a, b in zip(vals, vals[1:]))
    if op == "distinct":
        return len(set(vals)) == len(vals)
    raise SmtError(f"unknown operator {op}")


def _is_num(f) -> bool:
    return isinstance(f, (int, Fraction)) and not isinstance(f, bool)


def add(*xs: Formula) -> Formula:
    const = Fraction(0)
    rest = []
    for x in xs:
        if _is_num(x):
            const += x
        elif isinstance(x, tuple) and x[0] == "+":
            rest.extend(x[1:])
        else:
            rest.append(x)
    if const:
        rest.append(const)
    if not rest:
        return Fraction(0)
    return rest[0] if len(rest) == 1 else ("+", *rest)


def mul(*xs: Formula) -> Formula:
    const = Fraction(1)
    rest = []
    for x in xs:
        if _is_num(x):
            const *= x
        else:
            rest.append(x)
    if const == 0:
        return Fraction(0)
    if const != 1:
        rest.insert(0, const)
    if not rest:
        return Fraction(1)
    return rest[0] if len(rest) == 1 else ("*", *rest)


def symbols(f: Formula) -> set[str]:
    if isinstance(f, str):
        return {f}
    if isinstance(f, tuple):
        out = set()
        for a in f[1:]:
            out |= symbols(a)
        return out
    return set()


# --- scripts -------------------------------------------------------------

@dataclass
class SmtScript:
    logic: str
    declarations: list = field(default_factory=list)  # [(name, sort)]
    assertions: list = field(default_factory=list)  # [Formula]
    commands: list = field(default_factory=lambda: ["(check-sat)", "(get-model)"])
    comments: list = field(default_factory=list)

    @property
    def sort(self) -> str:
        return "Int" if "IA" in self.logic else "Real"

    def declare(self, name: str, sort: str | None = None):
        if any(n == name for n, _ in self.declarations):
            raise SmtError(f"symbol declared twice: {name}")
        self.declarations.append((name, sort or self.sort))

    def assert_(self, f: Formula):
        if f is True:
            return
        self.assertions.append(f)

    def validate(self):
        declared = {n for n, _ in self.declarations}
        for a in self.assertions:
            missing = symbols(a) - declared
            if missing:
                raise SmtError(f"undeclared symbols: {sorted(missing)}")

    def text(self) -> str:
        self.validate()
        lines = [f"; {c}" for c in self.comments]
        lines.append(f"(set-logic {self.logic})")
        lines += [f"(declare-fun {quote(n)} () {s})" for n, s in self.declarations]
        lines += [f"(assert {render(a, self.sort)})" for a in self.assertions]
        lines += self.commands
        return "\n".join(lines) + "\n"

    def holds(self, model: Mapping[str, Fraction]) -> bool:
        return all(evaluate(a, model) for a in self.assertions)


def emit_int(equations: Iterable[tuple[Formula, Formula]], lower: Mapping[str, int],
             names: Iterable[str], bound: int) -> SmtScript:
    """QF_NIA script: polynomial size equations, lower bounds and ``0 <= n <= bound``."""
    sc = SmtScript("QF_NIA")
    for n in names:
        sc.declare(n)
    for n, _ in sc.declarations:
        sc.assert_(("<=", 0, n))
        sc.assert_(("<=", n, bound))
    for n, lo in lower.items():
        sc.assert_((">=", n, lo))
    for lhs, rhs in equations:
        sc.assert_(("=", lhs, rhs))
    return sc


# --- stage-level formulas -----------------------------------------------

Pair = tuple  # (scale formula, phase formula)


def const_pair(s: Stage) -> Pair:
    return (s.scale, s.phase)


def compose(x: Pair, y: Pair) -> Pair:
    """``(s1, p1) × (s2, p2) = (s1·s2, s1·p2 + p1)``."""
    return (mul(x[0], y[0]), add(mul(x[0], y[1]), x[1]))


def end(x: Pair) -> Formula:
    return add(x[0], x[1])


def contractive(x: Pair) -> list:
    s, p = x
    return [("<=", 0, s), ("<=", s, 1), ("<=", 0, p), ("<=", add(s, p), 1)]


def neq_id(x: Pair) -> Formula:
    return ("not", ("and", ("=", x[0], 1), ("=", x[1], 0)))


def em_leq(x: Pair, y: Pair) -> Formula:
    return ("and", ("<=", x[1], y[1]), ("<=", end(x), end(y)))


def strictly_before(x: Pair, y: Pair) -> Formula:
    return ("and", em_leq(x, y), ("or", ("<", end(x), y[1]), ("<", end(y), x[1])))


def strict_fifo(x: Pair, y: Pair) -> Formula:
    return ("and", ("<", x[1], y[1]), ("<", end(x), end(y)))


def lex_leq(x: Pair, y: Pair) -> Formula:
    """Canonical multiset order (phase, then scale)."""
    return ("or", ("<", x[1], y[1]), ("and", ("=", x[1], y[1]), ("<=", x[0], y[0])))


def pair_eq(x: Pair, y: Pair) -> list:
    return [("=", x[0], y[0]), ("=", x[1], y[1])]


# --- solver driver -------------------------------------------------------

@dataclass
class SolverResult:
    status: str  # sat | unsat | timeout | unknown
    model: dict = field(default_factory=dict)  # name -> Fraction
    irrational: list = field(default_factory=list)  # names with approximate values
    raw: str = ""


def solver_command(cmd: str | None = None) -> list[str]:
    return shlex.split(cmd or os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER)


def run_solver(script: SmtScript | str, cmd: str | None = None, timeout: float = 60.0,
               decimal: bool = False) -> SolverResult:
    text = script.text() if isinstance(script, SmtScript) else script
    if decimal:
        text = "(set-option :pp.decimal true)\n(set-option :pp.decimal_precision 30)\n" + text
    try:
        proc = subprocess.run(solver_command(cmd), input=text, capture_output=True,
                              text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return SolverResult("timeout")
    except OSError as e:
        raise SmtError(f"cannot run solver: {e}") from e
    out = proc.stdout
    head = out.lstrip().split(None, 1)
    status = head[0] if head else ""
    if status == "sat":
        model, approx = parse_model(out[out.index("sat") + 3:])
        return SolverResult("sat", model, approx, out)
    if status in ("unsat", "unknown", "timeout"):
        return SolverResult(status, raw=out)
    raise SmtError(f"solver failure: {(out + proc.stderr).strip()[:500]}")


def parse_sexprs(text: str) -> list:
    toks = re.findall(r"\|[^|]*\||\(|\)|[^\s()]+", text)
    stack: list = [[]]
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise SmtError("unbalanced model output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t[1:-1] if t.startswith("|") else t)
    if len(stack) != 1:
        raise SmtError("unbalanced model output")
    return stack[0]


class _Approx(Exception):
    pass


def eval_value(e) -> Fraction:
    """Numeric model term: integers, decimals, ``(/ a b)``, ``(- a)``, ``(+ ..)``, ``(* ..)``."""
    if isinstance(e, str):
        if e.endswith("?"):
            raise _Approx(e[:-1])
        try:
            return Fraction(e)
        except ValueError:
            raise SmtError(f"unparseable model value {e!r}") from None
    if not e:
        raise SmtError("empty model value")
    op, *args = e
    if op == "root-obj" or op == "irrational":
        raise _Approx(None)
    vals = [eval_value(a) for a in args]
    if op == "/":
        return vals[0] / vals[1]
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    raise SmtError(f"unparseable model value {e!r}")


def parse_model(text: str) -> tuple[dict, list]:
    """Accepts ``(model (define-fun ..) ..)``, a bare define-fun list or ``get-value`` pairs.

    Returns exact values plus the names whose value was only an approximation
    (those carry the truncated decimal in the model).
    """
    model: dict = {}
    approx: list = []

    def put(name, value):
        try:
            model[name] = eval_value(value)
        except _Approx as a:
            approx.append(name)
            if a.args[0] is not None:
                model[name] = Fraction(a.args[0])

    def walk(items):
        for it in items:
            if not isinstance(it, list) or not it:
                continue
            if it[0] == "define-fun" and len(it) == 5:
                if it[2] == []:
                    put(it[1], it[4])
            elif it[0] == "model":
                walk(it[1:])
            elif all(isinstance(p, list) and len(p) == 2 and isinstance(p[0], str) for p in it):
                for name, value in it:
                    put(name, value)
            else:
                walk(it)

    walk(parse_sexprs(text))
    return model, approx


def solve(script: SmtScript, cmd: str | None = None, timeout: float = 60.0,
          pin_rounds: int = 4) -> SolverResult:
    """Run the solver, insisting on a rational model.

    Irrational values are pinned to their decimal approximation and the
    query is re-asked; a model that fails exact re-evaluation counts as unknown.
    """
    sc = script
    for _ in range(pin_rounds + 1):
        res = run_solver(sc, cmd, timeout)
        if res.status != "sat":
            return res
        if res.irrational:
            # ask again for decimal approximations of the algebraic values
            approx = run_solver(sc, cmd, timeout, decimal=True)
            if approx.status != "sat":
                return SolverResult("unknown", raw=approx.raw)
            res = approx
        if not res.irrational:
            for n, _ in sc.declarations:
                res.model.setdefault(n, Fraction(0))
            if not sc.holds(res.model):
                return SolverResult("unknown", raw=res.raw)
            return res
        sc = SmtScript(sc.logic, list(sc.declarations), list(sc.assertions), list(sc.commands), list(sc.comments))
        for n in res.irrational:
            if n in res.model:
                sc.assert_(("=", n, res.model[n].limit_denominator(10 ** 12)))
    return SolverResult("unknown")


# --- grid oracle ---------------------------------------------------------

class OracleTooLarge(ValueError):
    pass


def grid_stages(step: Fraction) -> list[Stage]:
    step = Fraction(step)
    n = int(1 / step)
    if n * step != 1:
        raise ValueError("grid step must divide 1")
    pts = [i * step for i in range(n + 1)]
    return [Stage(s, p) for p in pts for s in pts if is_contractive(s, p)]


def brute_oracle(constraints: list, sizes: Mapping, step=Fraction(1, 8), pipeline: bool = False,
                 max_stages: int = 6):
    """Exhaustive grid search for a model of ``constraints`` with known schedule sizes.

    Works on the semiring-level constraints directly (not on the lowered
    real system), so it shares nothing with the SMT route but the syntax.
    Returns a model dict or None.
    """
    from .infer import PipePred, SemiringEq, SizeEq, SizeGe, constraint_holds
    from .semiring import is_pipeline
    from .symbolic import StageVar, SVar, sched_vars

    cons = [c for c in constraints if not isinstance(c, (SizeEq, SizeGe))]
    order: list = []
    for c in cons:
        args = (c.lhs, c.rhs) if isinstance(c, SemiringEq) else (
            (c.expr,) if isinstance(c, PipePred) else c.args)
        for a in args:
            if isinstance(a, Fraction):
                continue
            for v in sorted(sched_vars(a), key=lambda v: (isinstance(v, SVar), v.name)):
                if v not in order:
                    order.append(v)
    order.sort(key=lambda v: (isinstance(v, SVar), 0))  # stage vars first, keeps first-seen order
    total = sum(1 if isinstance(v, StageVar) else sizes[v] for v in order)
    if total > max_stages:
        raise OracleTooLarge(f"{total} unknown stages exceed the oracle limit of {max_stages}")

    grid = grid_stages(step)
    # constraint becomes checkable once all its variables are assigned
    ready: dict[int, list] = {i: [] for i in range(len(order))}
    for c in cons:
        vs = set()
        args = (c.lhs, c.rhs) if isinstance(c, SemiringEq) else (
            (c.expr,) if isinstance(c, PipePred) else c.args)
        for a in args:
            if not isinstance(a, Fraction):
                vs |= sched_vars(a)
        idx = max((order.index(v) for v in vs), default=-1)
        ready.setdefault(idx, []).append(c)
    if not all(constraint_holds(c, {}) for c in ready.get(-1, [])):
        return None

    def candidates(v):
        if isinstance(v, StageVar):
            return grid
        seqs = itertools.combinations_with_replacement(grid, sizes[v])
        out = (Schedule(list(s)) for s in seqs)
        return (s for s in out if is_pipeline(s)) if pipeline else out

    model: dict = {}

    def go(i):
        if i == len(order):
            return True
        v = order[i]
        for val in candidates(v):
            model[v] = val
            if all(constraint_holds(c, model) for c in ready[i]) and go(i + 1):
                return True
        del model[v]
        return False

    return dict(model) if go(0) else None
