"""Walk a program through inference, checking and its game denotation.

    python3 examples_pia/walkthrough.py [FILE.pia]
"""
import sys
from pathlib import Path

from pipia.check import check_judgment
from pipia.denote import denote
from pipia.infer import format_judgment
from pipia.pipeline import SolveConfig, infer_end_to_end, residual_failures

HERE = Path(__file__).resolve().parent


def main(path: Path) -> None:
    res = infer_end_to_end(path.read_text(), SolveConfig(pipeline=True))
    print(f"== {path.name}: {len(res.constraints)} constraints, "
          f"{res.stats.variables} stage variables, {res.stats.assertions} assertions")
    print(format_judgment(res.judgment))

    # the solver's answer is re-checked in exact arithmetic
    fails = residual_failures(res.constraints, res.model, True)
    print(f"residual failures: {len(fails)}")

    d = check_judgment(res.judgment)
    print(f"derivation: {len(d.rules())} rule applications, {d.rules().count('Abs-con')} Abs-con nodes")

    if len(res.judgment.context) <= 1:
        s = denote(res.judgment, 1)
        print(f"denotation at max_int 1: {len(s.plays)} plays over {len(s.arena.moves)} moves")
        print("\n".join(s.dump().splitlines()[:3]))


if __name__ == "__main__":
    for arg in sys.argv[1:] or ["incx.pia", "adders.pia"]:
        main(Path(arg) if Path(arg).exists() else HERE / arg)
        print()
