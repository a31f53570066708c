"""Descendant L-infinity structures, Bell polynomials and operator deformations.

Elements are anything with the small algebra interface shared by
GradedElement and FiniteCdgaElement: terms {(w, I): c}, _like, +, -, *.
Formal parameters are nilpotent markers eps_i (eps_i^2 = 0) with assigned
degrees, carried by FormalElement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

from .complex import BVComplex, FiniteCdgaElement, GradedElement
from .padic import PadicScalar

# --------------------------------------------------------------------------
# partitions and Bell polynomials


@dataclass(frozen=True)
class Partition:
    blocks: tuple  # tuple of sorted tuples, ordered by their minima

    def __post_init__(self):
        seen = [x for b in self.blocks for x in b]
        if any(not b for b in self.blocks) or len(seen) != len(set(seen)):
            raise ValueError("blocks must be non-empty and disjoint")
        if set(seen) != set(range(1, len(seen) + 1)):
            raise ValueError("blocks must cover {1..n}")
        if list(self.blocks) != sorted(self.blocks, key=min) or any(list(b) != sorted(b) for b in self.blocks):
            raise ValueError("blocks are not in canonical order")

    def __len__(self):
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def same_block(self, i: int, j: int) -> bool:
        return any(i in b and j in b for b in self.blocks)


def partitions(n: int) -> list[Partition]:
    """All set partitions of {1..n}, in restricted-growth order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []

    def rec(i, blocks):
        if i > n:
            out.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(1, [])
    return out


@dataclass(frozen=True)
class BellPoly:
    n: int
    terms: tuple  # ((e_1, .., e_n), coefficient) with sum i e_i = n

    def __str__(self):
        mons = []
        for e, c in self.terms:
            f = "*".join(f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            mons.append((f"{c}*" if c != 1 else "") + (f or "1"))
        return " + ".join(mons)

    def coefficient(self, exps) -> int:
        exps = tuple(exps) + (0,) * (self.n - len(exps))
        return dict(self.terms).get(exps, 0)

    def __call__(self, values, one=None):
        return bell_eval(self.n, values, one, poly=self)


def bell_poly(n: int) -> BellPoly:
    """Complete Bell polynomial B_n, from the block-size profile of each partition of [n]."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return BellPoly(0, (((), 1),))
    counts: dict = {}
    for pi in partitions(n):
        e = [0] * n
        for b in pi.blocks:
            e[len(b) - 1] += 1
        counts[tuple(e)] = counts.get(tuple(e), 0) + 1
    # x1^n first, x_n last
    return BellPoly(n, tuple(sorted(counts.items(), key=lambda t: tuple(-x for x in t[0]))))


def bell_eval(n: int, values, one=None, poly: BellPoly | None = None):
    """B_n(values[0], .., values[n-1]) in any commutative ring (values are x_1..x_n)."""
    poly = poly or bell_poly(n)
    if n == 0:
        if one is None:
            raise ValueError("B_0 = 1 needs the ring unit")
        return one
    total = None
    for e, c in poly.terms:
        term = None
        for i, k in enumerate(e):
            for _ in range(k):
                term = values[i] if term is None else term * values[i]
        term = _scale(term, c)
        total = term if total is None else total + term
    return total


# --------------------------------------------------------------------------
# element helpers


def _parts(x) -> dict:
    """Homogeneous components {degree: element} of x (degree = -#eta)."""
    groups: dict = {}
    for k, c in x.terms.items():
        groups.setdefault(-len(k[1]), {})[k] = c
    return {d: x._like(t) for d, t in sorted(groups.items())}


def _degree(x) -> int:
    ds = {-len(k[1]) for k in x.terms}
    if len(ds) > 1:
        raise ValueError("input is not homogeneous")
    return ds.pop() if ds else 0


def _scale(x, c):
    if c == 1:
        return x
    if isinstance(x, GradedElement):
        if isinstance(c, Fraction):
            c = x.ctx.from_fraction(c)
        return x.scale(c)
    if isinstance(x, FiniteCdgaElement):
        F, p = x.F, x.V.F.p
        c = Fraction(c)
        k = c.numerator * pow(c.denominator, -1, p) % p
        return x._like({key: F.mul(v, k) for key, v in x.terms.items()}) if k else x._like({})
    if isinstance(x, FormalElement):
        return x.map(lambda v: _scale(v, c))
    return x * c


def _is_zero(x) -> bool:
    return not x.terms


# --------------------------------------------------------------------------
# descendant brackets and morphisms


def descendant_ell(K: Callable, mult: Callable | None = None) -> Callable:
    """ell^K_n(x_1, .., x_n) from the recursion with ell_1 = K."""
    mult = mult or (lambda a, b: a * b)

    def ell(*xs):
        n = len(xs)
        if n == 0:
            raise ValueError("need at least one input")
        degs = [_degree(x) for x in xs]
        if n == 1:
            return K(xs[0])
        a = ell(*xs[:-2], mult(xs[-2], xs[-1]))
        b = mult(ell(*xs[:-1]), xs[-1])
        c = mult(xs[-2], ell(*xs[:-2], xs[-1]))
        s = degs[-2] * (1 + sum(degs[:-2]))
        return a - b - c if s % 2 == 0 else a - b + c

    return ell


def descendant_phi(f: Callable, mult: Callable | None = None) -> Callable:
    """phi^f_m(x_1, .., x_m) from the partition recursion with phi_1 = f."""
    mult = mult or (lambda a, b: a * b)

    def phi(*xs):
        m = len(xs)
        if m == 0:
            raise ValueError("need at least one input")
        for x in xs:
            _degree(x)
        if m == 1:
            return f(xs[0])
        out = phi(*xs[:-2], mult(xs[-2], xs[-1]))
        for pi in partitions(m):
            if len(pi) != 2 or pi.same_block(m - 1, m):
                continue
            B1, B2 = pi.blocks
            s = _koszul_sign([_degree(x) for x in xs], list(B1) + list(B2))
            t = mult(phi(*(xs[i - 1] for i in B1)), phi(*(xs[i - 1] for i in B2)))
            out = out - t if s > 0 else out + t
        return out

    return phi


def _koszul_sign(degs: list, order: list) -> int:
    """Sign of permuting graded factors x_1..x_n into the given order (1-based)."""
    s = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            a, b = order[i], order[j]
            if a > b and degs[a - 1] % 2 and degs[b - 1] % 2:
                s = -s
    return s


# --------------------------------------------------------------------------
# nilpotent formal parameters


def _marker_mul(a: tuple, b: tuple, mdeg: tuple):
    """eps_a * eps_b for sorted index tuples; returns (sign, merged) or (0, None)."""
    if set(a) & set(b):
        return 0, None
    s = 1
    for j in b:
        if mdeg[j] % 2:
            # move eps_j left past the odd markers of a with larger index
            s *= (-1) ** sum(1 for i in a if i > j and mdeg[i] % 2)
    return s, tuple(sorted(a + b))


@dataclass
class FormalElement:
    """sum over marker monomials eps_M of eps_M (x) v_M, with eps_i^2 = 0."""

    mdeg: tuple  # degree of each marker
    terms: dict = field(default_factory=dict)  # sorted index tuple -> element

    def __post_init__(self):
        self.terms = {tuple(k): v for k, v in self.terms.items() if not _is_zero(v)}

    def _like(self, terms):
        return FormalElement(self.mdeg, terms)

    def mdegree(self, mono) -> int:
        return sum(self.mdeg[i] for i in mono)

    def map(self, fn):
        return self._like({k: fn(v) for k, v in self.terms.items()})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return self._like(out)

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FormalElement):
            return _scale(self, other)
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                s, k = _marker_mul(ka, kb, self.mdeg)
                if not s:
                    continue
                for dv, pv in _parts(va).items():
                    x = pv * vb
                    # (a v)(b w) = (-1)^{|v||b|} ab vw
                    if (dv * self.mdegree(kb)) % 2:
                        s2 = -s
                    else:
                        s2 = s
                    x = x if s2 > 0 else -x
                    out[k] = out[k] + x if k in out else x
        return self._like(out)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        """Largest number of markers in a term."""
        return max((len(k) for k in self.terms), default=0)

    def of_order(self, r: int) -> "FormalElement":
        return self._like({k: v for k, v in self.terms.items() if len(k) == r})

    def up_to_order(self, r: int) -> "FormalElement":
        return self._like({k: v for k, v in self.terms.items() if len(k) <= r})

    def degrees(self) -> set:
        return {self.mdegree(k) + d for k, v in self.terms.items() for d in _parts(v)}

    def apply(self, op: Callable, op_deg: int) -> "FormalElement":
        """Extend a linear map of degree op_deg: a v -> (-1)^{|a| op_deg} a op(v)."""
        out = {}
        for k, v in self.terms.items():
            y = op(v)
            if (self.mdegree(k) * op_deg) % 2:
                y = -y
            out[k] = y
        return self._like(out)

    def min_val(self):
        return min((v.min_val() for v in self.terms.values()), default=math.inf)

    @classmethod
    def marker(cls, mdeg: tuple, i: int, v) -> "FormalElement":
        return cls(tuple(mdeg), {(i,): v})

    @classmethod
    def scalar(cls, mdeg: tuple, v) -> "FormalElement":
        return cls(tuple(mdeg), {(): v})


def extend_multilinear(fn: Callable, deg: int) -> Callable:
    """Koszul extension of an n-linear map of degree deg to FormalElement inputs.

    fn(a_1 v_1, .., a_n v_n) = (-1)^{sum_i |a_i|(deg + |v_1| + .. + |v_{i-1}|)} a_1..a_n fn(v_1, .., v_n).
    """

    def ext(*xs: FormalElement) -> FormalElement:
        mdeg = xs[0].mdeg
        expanded = []
        for x in xs:
            expanded.append([(k, d, pv) for k, v in x.terms.items() for d, pv in _parts(v).items()])
        out: dict = {}
        for combo in product(*expanded):
            s, mono = 1, ()
            e = deg
            for k, d, _ in combo:
                if (sum(mdeg[i] for i in k) * e) % 2:
                    s = -s
                e += d
                s2, mono = _marker_mul(mono, k, mdeg)
                if not s2:
                    break
                s *= s2
            else:
                y = fn(*(pv for _, _, pv in combo))
                if _is_zero(y):
                    continue
                y = y if s > 0 else -y
                out[mono] = out[mono] + y if mono in out else y
        return FormalElement(mdeg, out)

    return ext


def formal_exp(G: FormalElement, one) -> FormalElement:
    """e^G for nilpotent G (every term carries a marker)."""
    if () in G.terms:
        raise ValueError("exponent must lie in the maximal ideal")
    out = FormalElement.scalar(G.mdeg, one)
    term = out
    n = 1
    while True:
        term = _scale(term * G, Fraction(1, n))
        if term.is_zero():
            return out
        out = out + term
        n += 1


def _check_factorials(order: int, p: int | None):
    if p is not None and order >= p:
        raise ValueError(f"order {order} needs division by {order}!, which is not invertible mod {p}")


# --------------------------------------------------------------------------
# L-infinity identities with nilpotent gamma


def linf_algebra_defect(ell: Callable, gamma: FormalElement, n: int) -> FormalElement:
    """n! times sum_k ell_{n-k+1}(ell_k(g..g), g..g) / ((n-k)! k!); zero for an L-infinity algebra."""
    L = {m: extend_multilinear(ell, 1) for m in range(1, n + 1)}
    out = None
    for k in range(1, n + 1):
        inner = L[k](*([gamma] * k))
        t = _scale(L[n - k + 1](inner, *([gamma] * (n - k))), math.comb(n, k))
        out = t if out is None else out + t
    return out


def linf_morphism_defect(phi: Callable, ell: Callable, ell2: Callable, gamma: FormalElement, n: int) -> FormalElement:
    """n! (LHS - RHS) of the L-infinity morphism identity at order n.

    LHS: sum_{j1 + j2 = n} phi_{j1+1}(ell_{j2}(g..), g..) / (j1! j2!)
    RHS: sum over set partitions of [n] of ell'_r(phi_{|B_1|}(g..), ..) / n!
    """
    Phi = extend_multilinear(phi, 0)
    L = extend_multilinear(ell, 1)
    L2 = extend_multilinear(ell2, 1)
    lhs = None
    for j2 in range(1, n + 1):
        inner = L(*([gamma] * j2))
        t = _scale(Phi(inner, *([gamma] * (n - j2))), math.comb(n, j2))
        lhs = t if lhs is None else lhs + t
    rhs = None
    cache: dict = {}
    for pi in partitions(n):
        args = []
        for b in pi.blocks:
            if len(b) not in cache:
                cache[len(b)] = Phi(*([gamma] * len(b)))
            args.append(cache[len(b)])
        t = L2(*args)
        rhs = t if rhs is None else rhs + t
    return lhs - rhs


# --------------------------------------------------------------------------
# deformations


def deform_operator(K: Callable, Gamma: FormalElement, one, sigma: Callable | None = None,
                    K_deg: int = 1, check_mc: bool = True, p: int | None = None) -> Callable:
    """K_Gamma = e^{-sigma Gamma} o K o e^{Gamma} on FormalElements (sigma = identity by default)."""
    _check_factorials(len(Gamma.mdeg), p)
    E = formal_exp(Gamma, one)
    if check_mc:
        mc = (E - FormalElement.scalar(Gamma.mdeg, one)).apply(K, K_deg)
        if not mc.is_zero():
            raise ValueError("Maurer-Cartan condition K(e^Gamma - 1) = 0 fails")
    sG = Gamma if sigma is None else sigma(Gamma)
    Einv = formal_exp(-sG, one)

    def KG(x: FormalElement) -> FormalElement:
        return Einv * (E * x).apply(K, K_deg)

    return KG


def marker_sigma(scalars: dict) -> Callable:
    """Algebra endomorphism eps_i -> c_i eps_i of the marker algebra, applied to FormalElements."""

    def sigma(x: FormalElement) -> FormalElement:
        out = {}
        for k, v in x.terms.items():
            c = 1
            for i in k:
                c *= scalars.get(i, 1)
            out[k] = _scale(v, c)
        return x._like(out)

    return sigma


# --------------------------------------------------------------------------
# K~_S and Psi_S from descendants


def k_S_from_descendants(cx: BVComplex, lam: GradedElement) -> GradedElement:
    """Delta~(lam) + ell_2^{Delta~}(S^, lam)."""
    ell = descendant_ell(cx.delta)
    Shat = cx.element({(w, ()): c for w, c in cx.Shat.terms.items()})
    return cx.delta(lam) + ell(Shat, lam)


def psi_pn_phi(cx: BVComplex) -> Callable:
    from .frobenius import apply_psi

    return descendant_phi(lambda x: apply_psi(x, cx.V, "Pn"))


def bell_formula_psi_S(cx: BVComplex, lam: GradedElement, R: int, Gamma: GradedElement | None = None) -> GradedElement:
    """Psi_{P^n}(lam) + sum_{m=1}^R sum_{j+k=m} B_j(phi_1(G), ..) phi_{k+1}(G, .., G, lam) / (j! k!)."""
    p = cx.ctx.p
    _check_factorials(R, p)
    if Gamma is None:
        Gamma = gamma_element(cx)
    phi = psi_pn_phi(cx)
    tower = [phi(*([Gamma] * i)) for i in range(1, R + 1)]
    out = phi(lam)
    for m in range(1, R + 1):
        for j in range(0, m + 1):
            k = m - j
            right = phi(*([Gamma] * k), lam)
            if _is_zero(right):
                continue
            if j == 0:
                t = right
            else:
                t = bell_eval(j, tower[:j]) * right
            out = out + _scale(t, Fraction(1, math.factorial(j) * math.factorial(k)))
    return out


def gamma_element(cx: BVComplex) -> GradedElement:
    """The potential Gamma with E_S~ = exp(Gamma), as a degree-0 element."""
    from .dwork_series import build_potentials

    _, _, G = build_potentials(cx.V, cx.ctx, cx.D)
    return cx.element({(w, ()): c for w, c in G.terms.items()})


def gamma_power_valuation(cx: BVComplex, Gamma: GradedElement, m: int):
    """Least valuation of the coefficients of Gamma^m / m!: the size of the order-m Bell terms."""
    x = Gamma
    for _ in range(m - 1):
        x = x * Gamma
    x = _scale(x, Fraction(1, math.factorial(m)))
    return x.min_val()
