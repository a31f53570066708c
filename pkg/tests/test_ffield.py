import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwork_bv.ffield import (
    EnumerationCeilingError,
    FieldError,
    PointCounts,
    VarietySpec,
    ZetaRecoveryError,
    count_points,
    exp_sum,
    expected_degree,
    is_irreducible,
    make_field,
    point_counts,
    smoothness_check,
    variety,
    weil_check,
    zeta_from_counts,
)
from dwork_bv.padic import choose_parameters


def naive_affine_count(p, n, polys):
    """Zeros in F_p^(n+1) by plain loops; polys are {exponent: coeff} dicts."""
    total = 0
    for x in itertools.product(range(p), repeat=n + 1):
        ok = True
        for poly in polys:
            s = 0
            for e, c in poly.items():
                t = c
                for xi, ei in zip(x, e):
                    t = t * pow(xi, ei, p)
                s += t
            if s % p:
                ok = False
                break
        total += ok
    return total


CUBIC = {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1}
CONIC = {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}


@pytest.mark.parametrize("p,a", [(3, 1), (5, 1), (3, 2), (5, 2), (7, 2)])
def test_field_axioms_exhaustive_small(p, a):
    F = make_field(p, a).field
    q = p**a
    elems = range(q)
    for x in elems:
        assert F.add(x, F.neg(x)) == 0
        if x:
            assert F.mul(x, F.inv(x)) == 1
            assert F.pow(x, q - 1) == 1
    # Frobenius is additive
    for x, y in itertools.product(range(0, q, max(1, q // 7)), repeat=2):
        assert F.pow(F.add(x, y), p) == F.add(F.pow(x, p), F.pow(y, p))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 24), st.integers(0, 24), st.integers(0, 24))
def test_field_distributive_f25(x, y, z):
    F = make_field(5, 2).field
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z))


def test_generator_has_full_order():
    Fc = make_field(3, 2)
    F = Fc.field
    seen = {F.pow(Fc.generator, i) for i in range(8)}
    assert len(seen) == 8


def test_bad_inputs():
    with pytest.raises(FieldError):
        make_field(2)
    with pytest.raises(FieldError):
        make_field(9)
    with pytest.raises(FieldError):
        make_field(3, 2, (2, 0, 1))  # x^2 - 1
    assert is_irreducible([1, 0, 1], 3)
    assert not is_irreducible([2, 0, 1], 3)


def test_bad_variety():
    F = make_field(7)
    with pytest.raises(FieldError):
        variety(F, 2, {(2, 0, 0): 1, (1, 0, 0): 1})  # inhomogeneous
    with pytest.raises(FieldError):
        variety(F, 2, {(2, 0): 1})
    with pytest.raises(FieldError):
        variety(F, 2, {(2, 0, 0): 7})  # zero mod p


@pytest.mark.parametrize("p", [5, 7])
@pytest.mark.parametrize("poly", [CONIC, CUBIC, {(3, 0, 0): 1, (0, 3, 0): 2, (0, 0, 3): 3, (1, 1, 1): 1}])
def test_counts_match_naive(p, poly):
    F = make_field(p)
    V = variety(F, 2, poly)
    aff, proj = count_points(V, 1)
    assert aff == naive_affine_count(p, 2, [poly])
    assert proj == (aff - 1) // (p - 1)


def test_two_quadrics_naive():
    q1 = {(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 0, 2): 1}
    q2 = {(2, 0, 0, 0): 1, (0, 2, 0, 0): 2, (0, 0, 2, 0): 3, (0, 0, 0, 2): 4}
    V = variety(make_field(7), 3, q1, q2)
    aff, proj = count_points(V, 1, threads=2)
    assert aff == naive_affine_count(7, 3, [q1, q2])
    assert proj == 8


def test_threads_do_not_change_counts():
    V = variety(make_field(5), 2, CUBIC)
    assert count_points(V, 2, threads=1) == count_points(V, 2, threads=3)


def test_ceiling():
    V = variety(make_field(7), 2, CUBIC)
    with pytest.raises(EnumerationCeilingError, match="enumeration ceiling"):
        count_points(V, 3, ceiling=10**6)


def test_zeta_from_counts_cubic_f7():
    V = variety(make_field(7), 2, CUBIC)
    z = zeta_from_counts(point_counts(V, 2), 2, 1, degrees=V.degrees)
    assert z.P == [1, 1, 7]
    assert weil_check(z.P, 7, 1)
    # the polynomial predicts the cubic-extension count too
    assert z.projective_count(3) == count_points(V, 3)[1]


def test_zeta_from_counts_conic():
    V = variety(make_field(7), 2, CONIC)
    z = zeta_from_counts(point_counts(V, 1), 2, 1, degrees=V.degrees)
    assert z.P == [1]
    assert z.zeta_string() == "(1)^1/((1-T)(1-7T))"


def test_zeta_from_counts_rejects_inconsistent():
    c = PointCounts(7)
    c.add(1, 1 + 6 * 9, 9)
    c.add(2, 1 + 48 * 40, 40)  # true value is 63
    with pytest.raises(ZetaRecoveryError):
        zeta_from_counts(c, 2, 1, degrees=(3,))


def test_point_counts_consistency_check():
    with pytest.raises(FieldError):
        PointCounts(7).add(1, 10, 9)


@pytest.mark.parametrize(
    "n,degrees,d",
    [(2, (2,), 0), (2, (3,), 2), (2, (4,), 6), (3, (2, 2), 2), (3, (3,), 6), (3, (4,), 21), (4, (2, 3), 21)],
)
def test_expected_degree(n, degrees, d):
    # plane curves 2g = (d-1)(d-2); cubic surface 6; K3 surfaces 21
    assert expected_degree(n, degrees) == d


def test_weil_check_rejects():
    assert weil_check([1, 5, 7], 7, 1)  # complex pair of modulus sqrt 7
    assert not weil_check([1, 6, 7], 7, 1)  # real roots


def test_smoothness_probe():
    F = make_field(3)
    V = variety(F, 2, CUBIC)  # (x + y + z)^3 in characteristic 3
    assert smoothness_check(V)
    assert not smoothness_check(variety(make_field(7), 2, CUBIC))


def test_variety_json_roundtrip():
    F = make_field(5, 2)
    V = variety(F, 2, {(3, 0, 0): 1, (0, 3, 0): F.generator, (0, 0, 3): 7})
    W = VarietySpec.from_json(V.to_json())
    assert W.polys == V.polys and W.F.q == 25


@pytest.mark.parametrize("p,a,ms", [(5, 1, (1, 2)), (3, 2, (1,))])
def test_exp_sum_counts_cone(p, a, ms):
    F = make_field(p, a)
    V = variety(F, 2, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    ctx = choose_parameters(p, a, target_precision=4, field=F)
    for m in ms:
        aff, _ = count_points(V, m)
        assert exp_sum(V, m, ctx) == ctx.from_int(F.q ** (m * V.k) * aff)
