"""Command-line front end: ``pipia {infer,constraints,smt,check,denote,laws}``.

Exit codes: 0 ok, 1 law failures, 2 parse/type/check error, 3 unsatisfiable,
4 solver failure or timeout, 5 I/O error.

JSON reports (``--json``) always carry ``command``, ``status`` ("ok" or
"error") and ``exit_code``; errors add ``category`` and ``detail``.
``infer`` adds ``judgment``, ``type``, ``annotations``, ``sizes``,
``stats`` and ``residual`` = {"constraints", "failures", "verified"},
where the residual check is an exact re-evaluation independent of the
solver.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import smt
from .check import CheckError, check_judgment
from .infer import (InferenceError, SemiringEq, SizeEq, SizeGe, dump_constraints, format_judgment,
                    generate, parse_judgment)
from .pipeline import (Lowering, PipelineError, SolveConfig, Stats, infer_end_to_end,
                       order_guesses, residual_failures, size_formula, size_script, solve_sizes,
                       system_constraints)
from .semiring import INF, SemiringError, q
from .simple_types import SimpleTypeError, infer_simple
from .syntax import ParseError, parse_source, pretty_type

EXIT = {
    "ok": 0, "laws-failed": 1, "parse-error": 2, "type-error": 2, "check-rejected": 2,
    "size-unsatisfiable": 3, "pipeline-unsatisfiable": 3, "solver-timeout": 4,
    "solver-failure": 4, "io-error": 5,
}


class CliError(Exception):
    def __init__(self, category: str, detail: str):
        super().__init__(detail)
        self.category = category
        self.detail = detail


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise CliError("io-error", f"{path}: {e.strerror or e}") from e


def _config(args) -> SolveConfig:
    kw = {"pipeline": args.pipeline, "sequential": args.sequential}
    if args.solver:
        kw["solver"] = args.solver
    if args.write_stage:
        try:
            s, p = args.write_stage.split(",")
            kw["write_scale"], kw["write_phase"] = q(s), q(p)
        except (ValueError, ZeroDivisionError) as e:
            raise CliError("parse-error", f"--write-stage expects S,P: {args.write_stage}") from e
    if args.size_bound is not None:
        kw["size_bound_max"] = args.size_bound
    if args.order_retries is not None:
        kw["order_retry_budget"] = args.order_retries
    if args.timeout is not None:
        kw["timeout"] = args.timeout
    return SolveConfig(**kw)


def _translate(e: Exception) -> CliError:
    if isinstance(e, CliError):
        return e
    if isinstance(e, ParseError):
        return CliError("parse-error", str(e))
    if isinstance(e, (SimpleTypeError, InferenceError)):
        return CliError("type-error", str(e))
    if isinstance(e, CheckError):
        return CliError("check-rejected", str(e))
    if isinstance(e, PipelineError):
        return CliError(e.kind, e.detail or e.kind)
    if isinstance(e, smt.SmtError):
        return CliError("solver-failure", str(e))
    if isinstance(e, SemiringError):
        return CliError("type-error", str(e))
    raise e


def _count(size: int, semiring: str):
    if semiring == "zoi":
        return size if size < 2 else INF
    return size


def cmd_infer(args) -> dict:
    cfg = _config(args)
    src = _read(args.file)
    if args.semiring != "schedule":
        return _infer_counts(src, cfg, args.semiring)
    res = infer_end_to_end(src, cfg)
    fails = residual_failures(res.constraints, res.model, cfg.pipeline)
    return {
        "judgment": format_judgment(res.judgment),
        "type": pretty_type(res.judgment.type),
        "annotations": {v.name: repr(val) for v, val in sorted(res.model.items(), key=lambda kv: kv[0].name)},
        "sizes": {v.name: n for v, n in sorted(res.sizes.items(), key=lambda kv: kv[0].name)},
        "stats": res.stats.as_dict(),
        "residual": {"constraints": len(res.constraints), "failures": len(fails), "verified": not fails},
        "check": "accepted",
    }


def _infer_counts(src: str, cfg: SolveConfig, semiring: str) -> dict:
    """The natural-number instance: only the size phase is solved."""
    s = parse_source(src)
    j = generate(s.term, infer_simple(s.term, s.declared), s.declared)
    cons = system_constraints(j, cfg)
    stats = Stats()
    sizes = solve_sizes(cons, j.holes, cfg, stats)
    env = {v.name: Fraction(n) for v, n in sizes.items()}
    eqs = [c for c in cons if isinstance(c, (SemiringEq, SizeEq))]
    bad = sum(smt.evaluate(size_formula(c.lhs), env) != smt.evaluate(size_formula(c.rhs), env) for c in eqs)
    bad += sum(smt.evaluate(size_formula(c.expr), env) < c.bound for c in cons if isinstance(c, SizeGe))
    checked = len(eqs) + sum(isinstance(c, SizeGe) for c in cons)
    return {
        "judgment": None,
        "type": pretty_type(j.type),
        "annotations": {v.name: repr(_count(n, semiring)) for v, n in sorted(sizes.items(), key=lambda kv: kv[0].name)},
        "sizes": {v.name: n for v, n in sorted(sizes.items(), key=lambda kv: kv[0].name)},
        "stats": stats.as_dict(),
        "residual": {"constraints": checked, "failures": bad, "verified": bad == 0},
        "check": "not applicable",
    }


def cmd_constraints(args) -> dict:
    cfg = _config(args)
    s = parse_source(_read(args.file))
    j = generate(s.term, infer_simple(s.term, s.declared), s.declared, write_stage=cfg.write_stage)
    cons = system_constraints(j, cfg)
    return {"constraints": dump_constraints(cons), "count": len(cons)}


def cmd_smt(args) -> dict:
    cfg = _config(args)
    s = parse_source(_read(args.file))
    j = generate(s.term, infer_simple(s.term, s.declared), s.declared, write_stage=cfg.write_stage)
    cons = system_constraints(j, cfg)
    if args.phase == "sizes":
        bound = args.size_bound if args.size_bound is not None else cfg.size_bound_start
        return {"script": size_script(cons, j.holes, bound).text(), "bound": bound}
    sizes = solve_sizes(cons, j.holes, cfg)
    low = Lowering(cons, sizes, cfg.pipeline)
    guess = next(order_guesses(low.slot_sizes()))
    return {"script": low.script(guess, cfg.prefer_positive).text(),
            "sizes": {v.name: n for v, n in sizes.items()}}


def cmd_check(args) -> dict:
    j = parse_judgment(_read(args.file))
    d = check_judgment(j)
    return {"derivation": d.render(), "rules": d.size(), "result": "accepted"}


def cmd_denote(args) -> dict:
    from .denote import denote

    j = parse_judgment(_read(args.file))
    s = denote(j, args.max_int, args.bracketing)
    return {"dump": s.dump(), "plays": len(s.plays), "moves": len(s.arena.moves)}


def cmd_laws(args) -> dict:
    from . import laws

    sr = laws.semiring_laws(args.seed, args.cases)
    cat = laws.category_laws(args.seed, chains=8, quadruples=10)
    act = laws.action_functoriality(args.seed, 50)
    dl = laws.delta_coherence(args.seed, 50)
    rows = [(f"semiring {inst} {law}", args.cases, bad) for (inst, law), bad in sr.items()]
    rows += [(f"games {k}", n, bad) for k, (n, bad) in cat.items() if k != "arenas"]
    rows += [("schedule-action functoriality", *act), ("delta coherence", *dl)]
    return {"laws": [{"law": name, "cases": n, "failures": bad} for name, n, bad in rows],
            "failures": sum(bad for _, _, bad in rows)}


def _print_text(command: str, rep: dict):
    if command == "infer":
        if rep["judgment"]:
            print(rep["judgment"])
        else:
            print("type:", rep["type"])
            for k, v in rep["annotations"].items():
                print(f"  {k} = {v}")
        st = rep["stats"]
        print(f"# size bound {st['size_bound']}, {st['variables']} variables, {st['assertions']} assertions, "
              f"{st['order_attempts']} order guesses, {st['wall_ms']:.0f} ms")
        r = rep["residual"]
        print(f"# residual check: {r['failures']} of {r['constraints']} constraints fail")
    elif command == "constraints":
        sys.stdout.write(rep["constraints"])
    elif command == "smt":
        sys.stdout.write(rep["script"])
    elif command == "check":
        print(rep["derivation"])
        print("accepted")
    elif command == "denote":
        sys.stdout.write(rep["dump"])
    elif command == "laws":
        for row in rep["laws"]:
            mark = "ok  " if row["failures"] == 0 else "FAIL"
            print(f"{mark} {row['law']}: {row['cases']} cases, {row['failures']} failures")


COMMANDS = {
    "infer": cmd_infer, "constraints": cmd_constraints, "smt": cmd_smt,
    "check": cmd_check, "denote": cmd_denote, "laws": cmd_laws,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--semiring", choices=["nat", "zoi", "schedule"], default="schedule")
    common.add_argument("--pipeline", action="store_true", help="require every schedule to be a pipeline")
    common.add_argument("--solver", help="solver command line (overrides $PIPIA_SOLVER)")
    common.add_argument("--write-stage", metavar="S,P", help="fix the acceptor write stage")
    common.add_argument("--size-bound", type=int, help="largest size bound tried (smt: the bound to dump)")
    common.add_argument("--order-retries", type=int, help="order guesses tried per stage solve")
    common.add_argument("--timeout", type=float, help="seconds per solver call")
    common.add_argument("--sequential", action="store_true", help="try order guesses one at a time")
    common.add_argument("--json", action="store_true", help="machine-readable report")

    p = argparse.ArgumentParser(prog="pipia", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("infer", "constraints"):
        sub.add_parser(name, parents=[common]).add_argument("file")
    sp = sub.add_parser("smt", parents=[common])
    sp.add_argument("file")
    sp.add_argument("--phase", choices=["sizes", "stages"], default="sizes")
    sub.add_parser("check", parents=[common]).add_argument("file")
    dp = sub.add_parser("denote", parents=[common])
    dp.add_argument("file")
    dp.add_argument("--max-int", type=int, default=2)
    dp.add_argument("--bracketing", choices=["left", "right"], default="left")
    lp = sub.add_parser("laws", parents=[common])
    lp.add_argument("--seed", type=int, default=0)
    lp.add_argument("--cases", type=int, default=200)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = COMMANDS[args.command](args)
        status = "laws-failed" if rep.get("failures") else "ok"
    except Exception as e:  # noqa: BLE001 - mapped to exit categories below
        err = _translate(e)
        code = EXIT[err.category]
        if args.json:
            print(json.dumps({"command": args.command, "status": "error", "category": err.category,
                              "detail": err.detail, "exit_code": code}, indent=2))
        else:
            print(f"error [{err.category}]: {err.detail}", file=sys.stderr)
        return code
    code = EXIT[status]
    if args.json:
        print(json.dumps({"command": args.command, "status": "ok" if code == 0 else status,
                          "exit_code": code, **rep}, indent=2, default=str))
    else:
        _print_text(args.command, rep)
    return code


if __name__ == "__main__":
    sys.exit(main())
