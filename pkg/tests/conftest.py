import random
from itertools import combinations

import pytest

from dwork_bv.complex import BVComplex
from dwork_bv.ffield import make_field, variety
from dwork_bv.padic import choose_parameters

CONIC = {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}
CUBIC = {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1}


def random_element(cx, rng, deg, nterms=3, emax=2, exps=None):
    """Homogeneous element of cohomological degree deg with small integer coefficients."""
    Is = list(combinations(range(cx.N), -deg))
    terms = {}
    for _ in range(nterms):
        if exps is None:
            w = tuple(rng.randint(0, emax) for _ in range(cx.N))
        else:
            w = tuple(rng.choice(exps) for _ in range(cx.N))
        terms[(w, rng.choice(Is))] = cx.ctx.from_int(rng.randint(1, cx.ctx.p - 1))
    return cx.element(terms)


@pytest.fixture(scope="session")
def cubic7_cx():
    F = make_field(7)
    V = variety(F, 2, CUBIC)
    ctx = choose_parameters(7, 1, target_precision=4, field=F)
    return BVComplex(V, ctx, 12)


@pytest.fixture(scope="session")
def conic5_cx():
    F = make_field(5)
    V = variety(F, 2, CONIC)
    ctx = choose_parameters(5, 1, target_precision=4, field=F)
    return BVComplex(V, ctx, 40)


@pytest.fixture
def rng():
    return random.Random(20240611)


# acceptance criteria register here; the summary prints one line per criterion
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        for ok, text in ACCEPTANCE[k]:
            terminalreporter.write_line(f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {text}")
