import random

import pytest
import sympy

from dwork_bv.ffield import make_field, point_counts, variety, zeta_from_counts
from dwork_bv.frobenius import (
    CharPoly,
    LatticeClasses,
    apply_psi,
    berkowitz,
    char_poly_psi_S,
    cohomology_H0,
    default_D,
    operator_matrix,
    recover_P_and_zeta,
    zeta_via_frobenius,
)
from dwork_bv.padic import PrecisionError, choose_parameters

from conftest import CONIC, CUBIC, random_element


def test_berkowitz_matches_sympy():
    ctx = choose_parameters(7, 1, target_precision=12)
    rng = random.Random(5)
    for n in (1, 2, 4, 6):
        A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        ours = berkowitz([[ctx.from_int(x) for x in row] for row in A], ctx.one(), ctx.zero())
        ref = sympy.Matrix(A).charpoly().all_coeffs()
        assert [c.to_fraction() for c in ours] == [int(c) for c in ref]


def test_lattice_classes():
    L = LatticeClasses([(1, 3, 0, 0), (1, 0, 3, 0), (1, 0, 0, 3)])
    # z^w and z^(w + e) lie in the same class exactly when e is in the lattice
    w = (0, 1, 0, 2)
    assert L.key(w) == L.key((1, 4, 0, 2)) == L.key((2, 1, 3, 5))
    assert L.key(w) != L.key((0, 2, 0, 2))


def test_operator_matrix_matches_operator(cubic7_cx):
    cx = cubic7_cx
    rep = operator_matrix("K_S", -1, cx, D=3)
    rng = random.Random(2)
    for _ in range(5):
        j = rng.randrange(len(rep.cols))
        w, I = rep.cols[j]
        y = cx.K(cx.monomial(w, I))
        got = rep.apply({j: cx.ctx.one()})
        assert {rep.rows[r]: v for r, v in got.items()} == {k: v for k, v in y.terms.items()}
    assert not operator_matrix("delta", 0, cx).entries
    with pytest.raises(ValueError):
        operator_matrix("nope", 0, cx)


def test_psi_pn_commutes_with_delta(conic5_cx):
    cx = conic5_cx
    q = cx.ctx.q
    rng = random.Random(9)
    for _ in range(50):
        x = random_element(cx, rng, rng.choice((-1, -2, -3)), exps=(0, q - 1, q, 2 * q - 1))
        lhs = apply_psi(cx.delta(x), cx.V, "Pn")
        rhs = cx.delta(apply_psi(x, cx.V, "Pn"))
        assert lhs == rhs


def test_psi_S_commutes_with_K(conic5_cx):
    cx = conic5_cx
    q = cx.ctx.q
    from dwork_bv.dwork_series import build_E_S

    E = build_E_S(cx.V, cx.ctx, q * (cx.D + cx.N))
    rng = random.Random(4)
    Dout = 3

    def low(x):
        return cx.element({k: c for k, c in x.terms.items() if sum(k[0]) <= Dout})

    nonzero = 0
    for _ in range(10):
        x = random_element(cx, rng, rng.choice((-1, -2)), exps=(0, 1, q - 1, q))
        a = low(apply_psi(cx.K(x), cx.V, "S", E))
        b = low(cx.K(apply_psi(x, cx.V, "S", E)))
        assert a == b
        nonzero += bool(a.terms)
    assert nonzero


@pytest.fixture(scope="module")
def f7():
    return make_field(7)


def test_conic_has_trivial_H0(f7):
    V = variety(f7, 2, CONIC)
    ctx = choose_parameters(7, 1, target_precision=3, field=f7)
    _, h = cohomology_H0(V, ctx, default_D(V, ctx))
    assert h.dim == 0
    z = zeta_via_frobenius(V)
    assert z.P == [1]


def test_cubic_char_poly_twist(f7):
    V = variety(f7, 2, CUBIC)
    ctx = choose_parameters(7, 1, target_precision=4, field=f7)
    cp, h = char_poly_psi_S(V, ctx, default_D(V, ctx))
    assert h.dim == 2
    # det(1 - T Psi_S) = P(7 T) with P = 1 + T + 7 T^2
    assert [c.to_fraction() for c in cp.coeffs] == [1, 7, 343]


@pytest.mark.parametrize(
    "p,poly",
    [
        (7, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 2, (1, 1, 1): 3}),
        (7, {(3, 0, 0): 1, (0, 3, 0): 2, (0, 0, 3): 3}),
        (5, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1, (1, 1, 1): 1}),
    ],
)
def test_cubics_match_counts(p, poly):
    F = make_field(p)
    V = variety(F, 2, poly)
    z = zeta_via_frobenius(V)
    ref = zeta_from_counts(point_counts(V, 2), 2, 1, degrees=V.degrees)
    assert z.P == ref.P
    assert z.diagnostics["stabilized"]


def test_recovery_uses_functional_equation(f7):
    V = variety(f7, 2, CUBIC)
    ctx = choose_parameters(7, 1, target_precision=3, field=f7)
    # only 7^3 digits: c_2 = 343 is invisible, c_1 = 7 is pinned
    cp = CharPoly([ctx.from_int(1), ctx.from_int(7), ctx.zero()], 3)
    z = recover_P_and_zeta(cp, V, ctx)
    assert z.P == [1, 1, 7]
    assert z.diagnostics["functional_equation"] == [2]
    with pytest.raises(PrecisionError):
        recover_P_and_zeta(CharPoly([ctx.from_int(2), ctx.zero(), ctx.zero()], 3), V, ctx)
    with pytest.raises(PrecisionError):
        recover_P_and_zeta(CharPoly([ctx.from_int(1), ctx.from_int(7), ctx.from_int(7)], 3), V, ctx)


def test_default_D_grows_with_precision(f7):
    V = variety(f7, 2, CUBIC)
    a = default_D(V, choose_parameters(7, 1, target_precision=4, field=f7))
    b = default_D(V, choose_parameters(7, 1, target_precision=6, field=f7))
    assert b > a


def test_two_quadrics_small_run():
    # H^0 dimension for the genus-1 intersection of two quadrics in P^3
    F = make_field(7)
    q1 = {(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 0, 2): 1}
    q2 = {(2, 0, 0, 0): 1, (0, 2, 0, 0): 2, (0, 0, 2, 0): 3, (0, 0, 0, 2): 4}
    V = variety(F, 3, q1, q2)
    z = zeta_via_frobenius(V, stabilize=False)
    assert z.diagnostics["dim_H0"] == 2
    assert z.P == zeta_from_counts(point_counts(V, 1), 3, 2, degrees=V.degrees).P == [1, 0, 7]
