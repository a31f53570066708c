import random

import pytest
import sympy

from dwork_bv.complex import BVComplex
from dwork_bv.dwork_series import build_E_S
from dwork_bv.ffield import make_field, variety
from dwork_bv.frobenius import apply_psi
from dwork_bv.linfinity import (
    FormalElement,
    Partition,
    bell_eval,
    bell_formula_psi_S,
    bell_poly,
    deform_operator,
    descendant_ell,
    descendant_phi,
    extend_multilinear,
    gamma_element,
    gamma_power_valuation,
    k_S_from_descendants,
    linf_algebra_defect,
    linf_morphism_defect,
    marker_sigma,
    partitions,
)
from dwork_bv.padic import choose_parameters

from conftest import CONIC, random_element


def test_partition_counts():
    assert [len(partitions(n)) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]
    assert [pi.blocks for pi in partitions(3)][0] == ((1, 2, 3),)
    pi = Partition(((1, 3), (2,)))
    assert pi.same_block(1, 3) and not pi.same_block(2, 3) and pi.n == 3
    with pytest.raises(ValueError):
        Partition(((2,), (1,)))


def test_bell_polynomials_closed_forms():
    assert str(bell_poly(1)) == "x1"
    assert str(bell_poly(2)) == "x1^2 + x2"
    assert str(bell_poly(3)) == "x1^3 + 3*x1*x2 + x3"


@pytest.mark.parametrize("n", range(1, 8))
def test_bell_against_sympy(n):
    xs = sympy.symbols(f"x1:{n + 1}")
    ref = sympy.expand(sum(sympy.bell(n, k, xs[: n - k + 1]) for k in range(1, n + 1)))
    ours = sympy.expand(sum(c * sympy.prod([xs[i] ** e for i, e in enumerate(es)]) for es, c in bell_poly(n).terms))
    assert ours == ref
    vals = [3, -1, 2, 5, 7, 1, 4][:n]
    assert bell_eval(n, vals) == ref.subs(dict(zip(xs, vals)))


@pytest.fixture(scope="module")
def conic7():
    F = make_field(7)
    V = variety(F, 2, CONIC)
    # D = 16 holds every fourfold product of exponent-<=1 monomials
    return BVComplex(V, choose_parameters(7, 1, target_precision=4, field=F), 16)


def test_descendants_of_second_order_operator(conic7):
    cx = conic7
    rng = random.Random(3)
    ell = descendant_ell(cx.delta)
    for _ in range(50):
        x, y, z, w = (random_element(cx, rng, rng.choice((0, -1, -2)), nterms=2, emax=1) for _ in range(4))
        assert ell(x) == cx.delta(x)
        assert ell(x, y) == cx.bracket(x, y)
        assert ell(x, y, z).is_zero()
        assert ell(x, y, z, w).is_zero()


def test_K_S_from_descendants(conic7):
    cx = conic7
    rng = random.Random(8)
    for _ in range(50):
        lam = random_element(cx, rng, rng.choice((-1, -2)), nterms=3, emax=1)
        d = k_S_from_descendants(cx, lam) - cx.K(lam)
        # the top degree sees S^ terms that Delta~(S^ lam) cannot see after truncation
        assert not [k for k in d.terms if sum(k[0]) < cx.D]


def _markers(cx, rng, exps=None):
    mdeg = (1, 1, 0)
    return FormalElement(
        mdeg,
        {
            (0,): random_element(cx, rng, -1, exps=exps),
            (1,): random_element(cx, rng, -1, exps=exps),
            (2,): random_element(cx, rng, 0, exps=exps),
        },
    )


def test_linf_algebra_identities(conic7):
    cx = conic7
    rng = random.Random(1)
    ell = descendant_ell(cx.delta)
    g = _markers(cx, rng, exps=(0, 1))
    for n in (1, 2, 3):
        assert linf_algebra_defect(ell, g, n).is_zero()
    bad = lambda *xs: ell(*xs) + xs[0] * xs[1] if len(xs) == 2 else ell(*xs)  # noqa: E731
    assert not all(linf_algebra_defect(bad, g, n).is_zero() for n in (2, 3))


@pytest.fixture(scope="module")
def conic5():
    F = make_field(5)
    V = variety(F, 2, CONIC)
    return BVComplex(V, choose_parameters(5, 1, target_precision=4, field=F), 40)


def test_linf_morphism_psi_pn(conic5):
    cx = conic5
    rng = random.Random(2)
    ell = descendant_ell(cx.delta)
    psi = lambda x: apply_psi(x, cx.V, "Pn")  # noqa: E731
    phi = descendant_phi(psi)
    # inputs with exponents in {0, q - 1, q} survive Psi_{P^n}
    g = _markers(cx, rng, exps=(0, 4, 5))
    assert not extend_multilinear(phi, 0)(g, g).is_zero()
    for n in (1, 2, 3):
        assert linf_morphism_defect(phi, ell, ell, g, n).is_zero()
    badphi = lambda *xs: phi(*xs) + psi(xs[0] * xs[1]) if len(xs) == 2 else phi(*xs)  # noqa: E731
    assert not all(linf_morphism_defect(badphi, ell, ell, g, n).is_zero() for n in (2, 3))


def test_deformed_operator_expansion(conic5):
    cx = conic5
    rng = random.Random(6)
    one = cx.element({((0,) * cx.N, ()): cx.ctx.one()})
    md = (0, 0, 0)
    G = FormalElement(md, {(i,): random_element(cx, rng, 0, emax=1) for i in range(3)})
    KG = deform_operator(cx.delta, G, one, p=5)
    L = extend_multilinear(descendant_ell(cx.delta), 1)
    x = FormalElement(md, {(): random_element(cx, rng, -1, emax=1), (0,): random_element(cx, rng, -2, emax=1)})
    d = KG(x) - (x.apply(cx.delta, 1) + L(G, x))
    # e^{-G} Delta e^{G} = Delta + ell_2(G, .) away from the truncation degree
    for v in d.terms.values():
        assert not [k for k in v.terms if sum(k[0]) < cx.D]
    with pytest.raises(ValueError):
        deform_operator(cx.delta, FormalElement((0,) * 5, {}), one, p=5)
    s = marker_sigma({0: 2})
    assert s(G).terms[(0,)] == G.terms[(0,)].scale(cx.ctx.from_int(2))


def test_bell_formula_partial_sums():
    F = make_field(5)
    V = variety(F, 2, CONIC)
    ctx = choose_parameters(5, 1, target_precision=4, field=F)
    Dout = 1
    cx = BVComplex(V, ctx, 5 * (Dout + 4))
    G = gamma_element(cx)
    E = build_E_S(V, ctx, cx.D)
    lam = cx.monomial((0, 2, 2, 0)) + cx.monomial((1, 2, 2, 2)) + cx.monomial((0, 0, 4, 0))

    def low(x):
        return cx.element({k: c for k, c in x.terms.items() if sum(k[0]) <= Dout})

    direct = low(apply_psi(lam, V, "S", E))
    assert direct.terms
    prev = None
    for R in (1, 2, 3):
        diff = direct - low(bell_formula_psi_S(cx, lam, R, G))
        nu = gamma_power_valuation(cx, G, R + 1)
        assert diff.min_val() >= nu
        if prev is not None:
            assert diff.min_val() >= prev
        prev = diff.min_val()
    with pytest.raises(ValueError):
        bell_formula_psi_S(cx, lam, 5, G)
