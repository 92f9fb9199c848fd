import random

from pipia import laws
from pipia.semiring import INSTANCES, Schedule


def test_semiring_law_suite_small():
    res = laws.semiring_laws(seed=1, cases=50)
    assert {inst for inst, _ in res} == set(INSTANCES)
    assert all(n == 0 for n in res.values())


def test_random_elements_respect_bounds():
    rng = random.Random(0)
    for _ in range(200):
        j = laws.random_element(INSTANCES["schedule"], rng)
        assert isinstance(j, Schedule) and j.size() <= 4
        assert all(s.scale.denominator <= 64 and s.phase.denominator <= 64 for s in j)
        assert all(0 <= s.phase and s.scale + s.phase <= 1 for s in j)


def test_arena_chains_are_causal_and_small():
    rng = random.Random(4)
    for _ in range(10):
        chain = laws.arena_chain(rng, 4)
        assert len(chain) == 4 and len(chain.stages) == 3
        again = laws.arena_chain(rng, 4, chain.stages)
        assert again.stages == chain.stages


def test_category_laws_small():
    res = laws.category_laws(seed=3, chains=4, quadruples=5)
    assert all(bad == 0 for k, (n, bad) in res.items() if k != "arenas")
    assert res["identity"][0] == 8
