"""Abstract syntax, parser and printer for PIA terms and resource types.

Surface syntax (ASCII, with a few unicode aliases)::

    term  ::= \\x. term | \\x : J·type. term | new x. term
            | if term then term else term | seq
    seq   ::= par (';' par)*              (seq constant)
    par   ::= assign ('||' assign)*       (par constant)
    assign::= infix | x ':=' infix        (x bound by new x.)
    infix ::= app (OP app)*               (OP is +, +label or a declared operator)
    app   ::= atom atom*
    atom  ::= ident | (op) | !x | 1 | skip | const | '(' term ')'
    const ::= name['#'label]['{' params '}']  for name in one skip op comp seq par if new

Types::

    type  ::= dom '->' type | base
    dom   ::= J ('·' | '.') base | base   (a missing annotation is an unknown)
    base  ::= com | exp | acc | '(' type ')'
    J     ::= '[' stage (';' stage)* ']' | '[]' | '?' name?
    stage ::= '(' num ',' num ')' | ident
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .semiring import IDENTITY, Schedule, Stage, q
from .symbolic import SchedExpr, SSingleton, StageVar, SVar, show_sched, show_stage


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# --- resource types ------------------------------------------------------

@dataclass(frozen=True)
class Base:
    name: str  # "com" | "exp"

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    ann: object  # Schedule or symbolic schedule expression
    dom: "ResourceType"
    cod: "ResourceType"

    def __repr__(self) -> str:
        return pretty_type(self)


ResourceType = Union[Base, Arrow]
COM = Base("com")
EXP = Base("exp")
WRITE_STAGE = StageVar("w")


def acc_type(w=WRITE_STAGE) -> Arrow:
    """Acceptors: ``[w]·exp -> com``."""
    ann = Schedule([w]) if isinstance(w, Stage) else SSingleton(w)
    return Arrow(ann, EXP, COM)


def type_annotations(t: ResourceType) -> list:
    if isinstance(t, Base):
        return []
    return [t.ann] + type_annotations(t.dom) + type_annotations(t.cod)


def map_annotations(t: ResourceType, f) -> ResourceType:
    if isinstance(t, Base):
        return t
    return Arrow(f(t.ann), map_annotations(t.dom, f), map_annotations(t.cod, f))


# --- terms ---------------------------------------------------------------

CONSTANTS = ("one", "skip", "op", "comp", "seq", "par", "if", "new")
# number of stage-or-schedule parameters per constant; "if"/"new" also take σ first
PARAM_ARITY = {"one": 0, "skip": 0, "op": 2, "comp": 2, "seq": 2, "par": 1, "if": 3, "new": 3}


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    name: str
    body: "Term"
    ann: object = None  # binder annotation J (None when unannotated)
    ptype: Optional[ResourceType] = None


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Const:
    kind: str
    params: tuple = ()
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in CONSTANTS:
            raise ValueError(f"unknown constant {self.kind!r}")
        n = PARAM_ARITY[self.kind]
        params = tuple(self.params) if self.params else (None,) * n
        if len(params) != n:
            raise ValueError(f"{self.kind} takes {n} parameters, got {len(params)}")
        object.__setattr__(self, "params", params)


Term = Union[Var, Lam, App, Const]


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.name}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    return set()


def occurrences(t: Term, name: str) -> int:
    if isinstance(t, Var):
        return int(t.name == name)
    if isinstance(t, Lam):
        return 0 if t.name == name else occurrences(t.body, name)
    if isinstance(t, App):
        return occurrences(t.fun, name) + occurrences(t.arg, name)
    return 0


def subterms(t: Term):
    yield t
    if isinstance(t, Lam):
        yield from subterms(t.body)
    elif isinstance(t, App):
        yield from subterms(t.fun)
        yield from subterms(t.arg)


def term_depth(t: Term) -> int:
    if isinstance(t, Lam):
        return 1 + term_depth(t.body)
    if isinstance(t, App):
        return 1 + max(term_depth(t.fun), term_depth(t.arg))
    return 0


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


# --- lexer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#\#[^\n]*)
  | (?P<arrow>->|⊸|→)
  | (?P<assign>:=)
  | (?P<bar>\|\|)
  | (?P<plus>\+[A-Za-z0-9_]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<hole>\?[A-Za-z0-9_'#*+/%&^~]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<opid>[*/%&^~<>=-][A-Za-z0-9_]*)
  | (?P<punct>[\\λ.·:;!(),\[\]{}\#])
    """,
    re.VERBOSE,
)

KEYWORDS = {"new", "if", "then", "else", "skip", "com", "exp", "acc"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "punct":
                kind = {"λ": "\\", "·": "dot"}.get(text, text)
                if kind == ".":
                    kind = "."
            toks.append(Tok(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


# --- parser --------------------------------------------------------------

def parse_number(text: str) -> Fraction:
    return q(text)


class Parser:
    def __init__(self, src: str, operators: frozenset = frozenset()):
        self.toks = tokenize(src)
        self.i = 0
        self.operators = set(operators)
        self.sugared: list[str] = []

    # helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def advance(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind: str, text: str | None = None) -> Tok | None:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: str | None = None) -> Tok:
        t = self.accept(kind, text)
        if t is None:
            want = text or kind
            self.error(f"expected {want!r}, found {self.tok.text or 'end of input'!r}")
        return t

    def at_kw(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def end(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # terms
    def term(self) -> Term:
        t = self.tok
        if t.kind == "\\":
            self.advance()
            name = self.binder_name()
            ann = ptype = None
            if self.accept(":"):
                ann, ptype = self.annotated_type()
            self.expect(".")
            return Lam(name, self.term(), ann, ptype)
        if self.at_kw("new") and self.peek().kind in ("ident", "opid") and self.peek(2).kind == ".":
            self.advance()
            name = self.advance().text
            self.advance()
            self.sugared.append(name)
            try:
                body = self.term()
            finally:
                self.sugared.pop()
            return App(Const("new"), Lam(name + "_r", Lam(name + "_w", body)))
        if self.at_kw("if") and self.peek().kind != "{":
            self.advance()
            c = self.term()
            self.expect("ident", "then")
            a = self.term()
            self.expect("ident", "else")
            b = self.term()
            return apps(Const("if"), c, a, b)
        return self.seq()

    def binder_name(self) -> str:
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS:
            return self.advance().text
        if t.kind == "(" and self.peek().kind == "opid" and self.peek(2).kind == ")":
            self.advance()
            name = self.advance().text
            self.advance()
            return name
        self.error("expected a variable name")

    def seq(self) -> Term:
        t = self.par()
        while self.accept(";"):
            t = apps(Const("seq"), t, self.par())
        return t

    def par(self) -> Term:
        t = self.assign()
        while self.accept("bar"):
            t = apps(Const("par"), t, self.assign())
        return t

    def assign(self) -> Term:
        if self.tok.kind == "ident" and self.peek().kind == "assign":
            name_tok = self.advance()
            self.advance()
            if name_tok.text not in self.sugared:
                self.error(f"{name_tok.text!r} is not a variable bound by new", name_tok)
            return App(Var(name_tok.text + "_w"), self.infix())
        return self.infix()

    def infix(self) -> Term:
        t = self.app()
        while True:
            tok = self.tok
            if tok.kind == "plus":
                self.advance()
                label = tok.text[1:] or None
                t = apps(Const("op", label=label), t, self.app())
            elif tok.kind == "opid":
                if tok.text not in self.operators:
                    self.error(f"unbound operator {tok.text!r}")
                self.advance()
                t = apps(Var(tok.text), t, self.app())
            else:
                return t

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("(", "!", "num"):
            return True
        if t.kind == "ident":
            if t.text in ("then", "else"):
                return False
            if t.text == "new" and self.peek().kind in ("ident", "opid") and self.peek(2).kind == ".":
                return False
            if t.text == "if" and self.peek().kind != "{":
                return False
            return True
        return False

    def app(self) -> Term:
        if self.tok.kind == "\\" or (self.at_kw("if") and self.peek().kind != "{") or (
            self.at_kw("new") and self.peek().kind in ("ident", "opid") and self.peek(2).kind == "."
        ):
            return self.term()
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        if self.tok.kind == "\\":
            t = App(t, self.term())
        return t

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "(":
            if self.peek().kind == "opid" and self.peek(2).kind == ")":
                self.advance()
                name = self.advance().text
                self.advance()
                return Var(name)
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "!":
            self.advance()
            name = self.expect("ident")
            if name.text not in self.sugared:
                self.error(f"{name.text!r} is not a variable bound by new", name)
            return Var(name.text + "_r")
        if t.kind == "num":
            self.advance()
            if t.text != "1":
                self.error("the only integer literal is 1", t)
            return Const("one")
        if t.kind == "ident":
            if t.text in CONSTANTS:
                return self.constant()
            if t.text in ("then", "else", "com", "exp", "acc"):
                self.error(f"unexpected keyword {t.text!r}")
            self.advance()
            return Var(t.text)
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def constant(self) -> Const:
        kind = self.advance().text
        label = None
        if self.accept("#"):
            tok = self.advance()
            if tok.kind not in ("ident", "num"):
                self.error("expected a label", tok)
            label = tok.text
        params = ()
        if self.accept("{"):
            items = []
            if self.tok.kind != "}":
                items.append(self.param(kind, 0))
                while self.accept(","):
                    items.append(self.param(kind, len(items)))
            self.expect("}")
            params = tuple(items)
            if len(params) != PARAM_ARITY[kind]:
                self.error(f"{kind} takes {PARAM_ARITY[kind]} parameters")
        return Const(kind, params, label)

    def param(self, kind: str, idx: int):
        if kind in ("if", "new") and idx == 0:
            if self.accept("hole"):
                return None
            tok = self.expect("ident")
            if tok.text not in ("com", "exp"):
                self.error("expected com or exp", tok)
            return tok.text
        if kind == "new":
            return self.schedule()
        return self.stage_or_hole()

    def stage_or_hole(self):
        if self.tok.kind == "hole":
            tok = self.advance()
            return StageVar(tok.text[1:]) if len(tok.text) > 1 else None
        return self.stage()

    def stage(self):
        if self.tok.kind == "ident":
            return StageVar(self.advance().text)
        self.expect("(")
        s = parse_number(self.expect("num").text)
        self.expect(",")
        p = parse_number(self.expect("num").text)
        self.expect(")")
        return Stage(s, p)

    def schedule(self):
        tok = self.tok
        if tok.kind == "hole":
            self.advance()
            return SVar(tok.text[1:] or None)
        self.expect("[")
        stages = []
        if self.tok.kind != "]":
            stages.append(self.stage())
            while self.accept(";"):
                stages.append(self.stage())
        self.expect("]")
        if all(isinstance(s, Stage) for s in stages):
            return Schedule(stages)
        if len(stages) == 1:
            return SSingleton(stages[0])
        self.error("symbolic stages are only allowed in singleton schedules", tok)

    # types
    def rtype(self) -> ResourceType:
        if self.tok.kind in ("[", "hole"):
            ann, dom = self.annotated_type()
            self.expect("arrow")
            return Arrow(ann, dom, self.rtype())
        dom = self.base_type()
        if self.accept("arrow"):
            return Arrow(SVar(None), dom, self.rtype())
        return dom

    def annotated_type(self):
        ann = self.schedule()
        if not (self.accept("dot") or self.accept(".")):
            self.error("expected '·' after annotation")
        return ann, self.base_type()

    def base_type(self) -> ResourceType:
        if self.accept("("):
            t = self.rtype()
            self.expect(")")
            return t
        tok = self.expect("ident")
        if tok.text == "com":
            return COM
        if tok.text == "exp":
            return EXP
        if tok.text == "acc":
            return acc_type()
        self.error(f"unknown base type {tok.text!r}", tok)


def parse(src: str, operators=frozenset()) -> Term:
    p = Parser(src, frozenset(operators))
    t = p.term()
    p.end()
    return t


def parse_type(src: str) -> ResourceType:
    p = Parser(src)
    t = p.rtype()
    p.end()
    return t


def parse_annotated_type(src: str):
    """``J·θ`` as used in contexts; returns (J, θ)."""
    p = Parser(src)
    ann, t = p.annotated_type()
    p.end()
    return ann, t


# --- printing ------------------------------------------------------------

def pretty_type(t: ResourceType) -> str:
    if isinstance(t, Base):
        return t.name
    dom = pretty_type(t.dom)
    if isinstance(t.dom, Arrow):
        dom = f"({dom})"
    return f"{show_sched(t.ann)}·{dom} -> {pretty_type(t.cod)}"


def _show_const(c: Const) -> str:
    s = c.kind
    if c.label is not None:
        s += f"#{c.label}"
    if any(p is not None for p in c.params):
        parts = []
        for i, p in enumerate(c.params):
            if c.kind in ("if", "new") and i == 0:
                parts.append(p or "?")
            elif c.kind == "new":
                parts.append(show_sched(p) if p is not None else "?")
            elif isinstance(p, StageVar):
                parts.append("?" + p.name)
            else:
                parts.append(show_stage(p))
        s += "{" + ",".join(parts) + "}"
    return s


def _is_op_name(name: str) -> bool:
    return not (name[0].isalpha() or name[0] == "_")


def pretty(t) -> str:
    if isinstance(t, (Base, Arrow)):
        return pretty_type(t)
    if isinstance(t, Var):
        return f"({t.name})" if _is_op_name(t.name) else t.name
    if isinstance(t, Const):
        if t.kind == "one" and t.label is None:
            return "1"
        return _show_const(t)
    if isinstance(t, Lam):
        name = f"({t.name})" if _is_op_name(t.name) else t.name
        if t.ann is not None or t.ptype is not None:
            ann = t.ann if t.ann is not None else SVar(None)
            dom = pretty_type(t.ptype)
            if isinstance(t.ptype, Arrow):
                dom = f"({dom})"
            return f"\\{name} : {show_sched(ann)}·{dom}. {pretty(t.body)}"
        return f"\\{name}. {pretty(t.body)}"
    if isinstance(t, App):
        f = pretty(t.fun)
        if isinstance(t.fun, Lam):
            f = f"({f})"
        a = pretty(t.arg)
        if isinstance(t.arg, (App, Lam)):
            a = f"({a})"
        return f"{f} {a}"
    raise TypeError(t)


def resugar(t: Term) -> str:
    """Print with ``new x.``, ``!x`` and ``x :=`` sugar where the shape allows."""

    def go(t, vars_):
        if (
            isinstance(t, App)
            and isinstance(t.fun, Const)
            and t.fun.kind == "new"
            and t.fun.params == (None, None, None)
            and t.fun.label is None
            and isinstance(t.arg, Lam)
            and isinstance(t.arg.body, Lam)
            and t.arg.ann is None
            and t.arg.body.ann is None
            and t.arg.name.endswith("_r")
            and t.arg.body.name == t.arg.name[:-2] + "_w"
        ):
            x = t.arg.name[:-2]
            return f"(new {x}. {go(t.arg.body.body, vars_ | {x})})"
        if isinstance(t, Var):
            if t.name.endswith("_r") and t.name[:-2] in vars_:
                return "!" + t.name[:-2]
            return pretty(t)
        if isinstance(t, App) and isinstance(t.fun, Var) and t.fun.name.endswith("_w") and t.fun.name[:-2] in vars_:
            return f"({t.fun.name[:-2]} := {_wrap(go(t.arg, vars_), t.arg)})"
        if isinstance(t, Lam):
            head = pretty(Lam(t.name, Var("_"), t.ann, t.ptype))[:-1]
            return f"({head}{go(t.body, vars_)})"
        if isinstance(t, App):
            return f"{_wrap(go(t.fun, vars_), t.fun, lam_only=True)} {_wrap(go(t.arg, vars_), t.arg)}"
        return pretty(t)

    return go(t, frozenset())


def _wrap(s: str, t: Term, lam_only: bool = False) -> str:
    if isinstance(t, Lam) or (not lam_only and isinstance(t, App)):
        return s if s.startswith("(") and s.endswith(")") and _balanced(s[1:-1]) else f"({s})"
    return s


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


# --- files ---------------------------------------------------------------

@dataclass
class Source:
    """A program: declared free identifiers with their types, and one term."""

    declared: dict[str, ResourceType] = field(default_factory=dict)
    term: Term = None
    text: str = ""


def _strip_comment(line: str) -> str:
    return line.split("##", 1)[0].rstrip()


def parse_source(text: str) -> Source:
    lines = text.splitlines()
    sep = next((i for i, l in enumerate(lines) if l.strip() == "---"), None)
    declared: dict[str, ResourceType] = {}
    body_start = 0
    if sep is not None:
        for lineno, raw in enumerate(lines[:sep], start=1):
            line = _strip_comment(raw)
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if " : " not in line:
                raise ParseError("expected 'name : type'", lineno, 1)
            name, ty = line.split(" : ", 1)
            name = name.strip()
            if name in declared:
                raise ParseError(f"duplicate declaration of {name!r}", lineno, 1)
            try:
                declared[name] = parse_type(ty)
            except ParseError as e:
                raise ParseError(str(e).split(": ", 1)[1], lineno, e.col) from None
        body_start = sep + 1
    body = "\n".join(_strip_comment(l) for l in lines[body_start:] if not l.lstrip().startswith("#"))
    ops = {n for n in declared if _is_op_name(n)}
    try:
        term = parse(body, ops)
    except ParseError as e:
        raise ParseError(str(e).split(": ", 1)[1], e.line + body_start, e.col) from None
    return Source(declared, term, text)


def format_source(src: Source) -> str:
    lines = [f"{n} : {pretty_type(t)}" for n, t in src.declared.items()]
    lines.append("---")
    lines.append(pretty(src.term))
    return "\n".join(lines) + "\n"
