"""The graded complex A~(b)[eta] with its BV-type differentials.

Elements are sparse maps (w, I) -> coefficient, with w an exponent vector in
z = (y_1..y_k, x_0..x_n) and I a sorted tuple of 0-based eta indices.  The
cohomological degree of z^w eta_I is -len(I).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .dwork_series import Grading, build_potentials
from .ffield import VarietySpec
from .padic import PadicScalar, PrecisionContext, compute_gamma, teichmuller_lift


class FiltrationError(ValueError):
    pass


# --------------------------------------------------------------------------
# Koszul signs, shared by every operation below


def eta_mul(I: tuple, J: tuple):
    """eta_I * eta_J as (sign, sorted tuple), or (0, None) if they overlap."""
    if set(I) & set(J):
        return 0, None
    inv = sum(1 for i in I for j in J if i > j)
    return (-1) ** inv, tuple(sorted(I + J))


def eta_drop(I: tuple, i: int):
    """Left derivative d/d eta_i of eta_I as (sign, rest); (0, None) if i not in I."""
    if i not in I:
        return 0, None
    pos = I.index(i)
    return (-1) ** pos, I[:pos] + I[pos + 1 :]


def _shift(w, i, d):
    v = list(w)
    v[i] += d
    return tuple(v)


def _acc(out: dict, key, val):
    if key in out:
        s = out[key] + val
        if s.is_zero() if hasattr(s, "is_zero") else not s:
            del out[key]
        else:
            out[key] = s
    else:
        out[key] = val


@dataclass
class GradedElement:
    ctx: PrecisionContext
    nvars: int
    D: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {
            (tuple(w), tuple(I)): c for (w, I), c in self.terms.items() if sum(w) <= self.D and not c.is_zero()
        }

    def _like(self, terms):
        return GradedElement(self.ctx, self.nvars, self.D, terms)

    def zero(self):
        return self._like({})

    def degrees(self) -> set:
        return {-len(I) for _, I in self.terms}

    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("element is not homogeneous")
        return ds.pop() if ds else 0

    def part(self, m: int):
        """Homogeneous component of degree m."""
        return self._like({k: c for k, c in self.terms.items() if -len(k[1]) == m})

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return self._like(out)

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._like({k: x * c for k, x in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, GradedElement):
            return self.scale(other)
        out: dict = {}
        for (wa, Ia), ca in self.terms.items():
            for (wb, Ib), cb in other.terms.items():
                s, I = eta_mul(Ia, Ib)
                if not s:
                    continue
                w = tuple(x + y for x, y in zip(wa, wb))
                if sum(w) > self.D:
                    continue
                x = ca * cb
                _acc(out, (w, I), x if s > 0 else -x)
        return self._like(out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, GradedElement) and (self - other).is_zero()

    def min_val(self):
        return min((c.val() for c in self.terms.values()), default=math.inf)

    def to_json(self) -> list:
        return [
            {"e": list(w), "eta": list(I), "c": c.to_json()}
            for (w, I), c in sorted(self.terms.items())
        ]

    @classmethod
    def from_json(cls, ctx, nvars, D, data):
        return cls(ctx, nvars, D, {(tuple(t["e"]), tuple(t["eta"])): PadicScalar.from_json(ctx, t["c"]) for t in data})


# --------------------------------------------------------------------------


class BVComplex:
    """Operators of A~(b)[eta] for one variety at fixed (D, N)."""

    def __init__(self, V: VarietySpec, ctx: PrecisionContext, D: int | None = None):
        self.V = V
        self.ctx = ctx
        self.D = ctx.D if D is None else D
        self.grading = Grading.of(V)
        self.N = V.N
        self.k = V.k
        G = compute_gamma(ctx)
        # pi^{Mb}/gamma, valuation b - 1/(p-1) > 0
        self.c = ctx.pi_power(ctx.Mb) / G.gamma
        self.S, self.Shat, _ = build_potentials(V, ctx, self.D + 1)

    @cached_property
    def dShat(self) -> list[dict]:
        return [self.Shat.partial(i).terms for i in range(self.N)]

    def element(self, terms: dict) -> GradedElement:
        return GradedElement(self.ctx, self.N, self.D, terms)

    def monomial(self, w, I=(), c=None) -> GradedElement:
        c = self.ctx.one() if c is None else c
        return self.element({(tuple(w), tuple(I)): c})

    # differentials -------------------------------------------------------

    def _contract(self, x: GradedElement, with_delta: bool, with_S: bool) -> GradedElement:
        out: dict = {}
        D = self.D
        for (w, I), a in x.terms.items():
            for i in I:
                s, rest = eta_drop(I, i)
                a_s = a if s > 0 else -a
                if with_delta and w[i]:
                    _acc(out, (_shift(w, i, -1), rest), a_s * w[i])
                if with_S:
                    dw = sum(w)
                    for u, g in self.dShat[i].items():
                        if dw + sum(u) > D:
                            continue
                        _acc(out, (tuple(x + y for x, y in zip(w, u)), rest), a_s * g)
        return x._like({k: v * self.c for k, v in out.items()})

    def delta(self, x):
        return self._contract(x, True, False)

    def K(self, x):
        return self._contract(x, True, True)

    def Q(self, x):
        return self._contract(x, False, True)

    def bracket(self, a: GradedElement, b: GradedElement, op=None) -> GradedElement:
        """l_2^op(a, b) = op(ab) - op(a) b - (-1)^{|a|} a op(b)."""
        op = op or self.delta
        da, _ = a.degree(), b.degree()
        t = op(a * b) - op(a) * b
        return t - (a * op(b)) if da % 2 == 0 else t + (a * op(b))

    # filtration ----------------------------------------------------------

    def _norm_exp(self, w, I) -> int:
        # pi^{Mb(|v| + k - r)} with r the number of y-indices in I
        r = sum(1 for i in I if i < self.k)
        return self.ctx.Mb * (sum(w[: self.k]) + self.k - r)

    def filtration_level(self, x: GradedElement):
        """Largest s with x in F^s (pi-adic units); infinite for x = 0."""
        lv = math.inf
        for (w, I), a in x.terms.items():
            lv = min(lv, a.val_pi() - self._norm_exp(w, I))
        return lv

    def check_filtered(self, op, levels=(0, 1, 2), basis=None) -> bool:
        basis = basis if basis is not None else self.basis(degrees=range(-self.N, 1))
        for s in levels:
            for w, I in basis:
                x = self.monomial(w, I, self.ctx.pi_power(s + self._norm_exp(w, I)))
                if self.filtration_level(op(x)) < s:
                    return False
        return True

    def basis(self, degrees=(0,), D=None):
        """Monomials z^w eta_I with |w| <= D, in graded lex order."""
        from itertools import combinations

        D = self.D if D is None else D
        ws = list(_exponents(self.N, D))
        out = []
        for m in degrees:
            for I in combinations(range(self.N), -m):
                out.extend((w, I) for w in ws)
        return out

    def reduce_R(self, x: GradedElement) -> "FiniteCdgaElement":
        ctx = self.ctx
        out: dict = {}
        for (w, I), a in x.terms.items():
            b = a * ctx.pi_power(-self._norm_exp(w, I))
            if b.val_pi() < 0:
                raise FiltrationError("element is not in F^0")
            if b.val_pi() > 0:
                continue
            r = residue(b)
            if r:
                out[(w, I)] = r
        return FiniteCdgaElement(self.V, out)

    def section_sR(self, y: "FiniteCdgaElement") -> GradedElement:
        ctx = self.ctx
        return self.element(
            {(w, I): teichmuller_lift(ctx, c) * ctx.pi_power(self._norm_exp(w, I)) for (w, I), c in y.terms.items()}
        )

    # de Rham side --------------------------------------------------------

    def de_rham_D(self, form: dict) -> dict:
        return self._dR(form, True)

    def partial_X(self, form: dict) -> dict:
        return self._dR(form, False)

    def _dR(self, form: dict, with_d: bool) -> dict:
        """(pi^{Mb}/gamma)(d w + dS^ ^ w) on forms {(w, I): coeff}, I the dz indices."""
        out: dict = {}
        for (w, I), a in form.items():
            for i in range(self.N):
                if i in I:
                    continue
                s = (-1) ** sum(1 for j in I if j < i)
                J = tuple(sorted(I + (i,)))
                a_s = a if s > 0 else -a
                if with_d and w[i]:
                    _acc(out, (_shift(w, i, -1), J), a_s * w[i])
                for u, g in self.dShat[i].items():
                    v = tuple(x + y for x, y in zip(w, u))
                    if sum(v) <= self.D:
                        _acc(out, (v, J), a_s * g)
        return {k: v * self.c for k, v in out.items() if sum(k[0]) <= self.D}

    def J(self, form: dict) -> GradedElement:
        out: dict = {}
        for (w, I), a in form.items():
            s, comp = fourier_J(I, self.N)
            _acc(out, (w, comp), a if s > 0 else -a)
        return self.element(out)


def fourier_J(I: tuple, N: int):
    """dz_I -> sign * eta_{complement}; I holds 0-based increasing indices.

    With 1-based labels the sign is (-1)^{i_1 + ... + i_s - s}, which for
    0-based labels is (-1)^{sum I}.
    """
    if any(b <= a for a, b in zip(I, I[1:])) or any(i < 0 or i >= N for i in I):
        raise ValueError(f"not a strictly increasing index tuple: {I}")
    comp = tuple(i for i in range(N) if i not in I)
    return (-1) ** sum(I), comp


def residue(b: PadicScalar) -> int:
    """Image in F_q of an integral scalar, as the int encoding of F_q."""
    ctx = b.ctx
    if b.is_zero() or b.val_pi() > 0:
        return 0
    if b.val_pi() < 0:
        raise FiltrationError("scalar is not integral")
    x = b.c[0]
    coeffs = [x % ctx.p] if ctx.a == 1 else [u % ctx.p for u in x]
    return ctx.F.field.from_coeffs(coeffs)


def _exponents(nvars: int, D: int):
    """All exponent vectors of total degree <= D, by degree then lex."""

    def rec(n, d):
        if n == 1:
            yield (d,)
            return
        for a in range(d, -1, -1):
            for rest in rec(n - 1, d - a):
                yield (a,) + rest

    for d in range(D + 1):
        yield from rec(nvars, d)


# --------------------------------------------------------------------------
# the finite cdga over F_q


@dataclass
class FiniteCdgaElement:
    V: VarietySpec
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {(tuple(w), tuple(I)): c for (w, I), c in self.terms.items() if c}

    @property
    def F(self):
        return self.V.F.field

    def _like(self, terms):
        return FiniteCdgaElement(self.V, terms)

    def __add__(self, other):
        out = dict(self.terms)
        F = self.F
        for k, c in other.terms.items():
            out[k] = F.add(out.get(k, 0), c)
        return self._like(out)

    def __neg__(self):
        return self._like({k: self.F.neg(c) for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        F = self.F
        out: dict = {}
        for (wa, Ia), ca in self.terms.items():
            for (wb, Ib), cb in other.terms.items():
                s, I = eta_mul(Ia, Ib)
                if not s:
                    continue
                w = tuple(x + y for x, y in zip(wa, wb))
                x = F.mul(ca, cb)
                out[(w, I)] = F.add(out.get((w, I), 0), x if s > 0 else F.neg(x))
        return self._like(out)

    def __eq__(self, other):
        return isinstance(other, FiniteCdgaElement) and not (self - other).terms

    def degree(self) -> int:
        ds = {-len(I) for _, I in self.terms}
        if len(ds) > 1:
            raise ValueError("element is not homogeneous")
        return ds.pop() if ds else 0


def finite_Q_S(y: FiniteCdgaElement) -> FiniteCdgaElement:
    """Q_S = sum dS/dz_i d/d eta_i over F_q, with S = sum_l y_l G_l."""
    V = y.V
    F = V.F.field
    dS: list[list] = [[] for _ in range(V.N)]
    for c, u in V.potential_terms():
        for i, ui in enumerate(u):
            if ui:
                dS[i].append((F.mul(c, ui % V.F.p), _shift(u, i, -1)))
    out: dict = {}
    for (w, I), a in y.terms.items():
        for i in I:
            s, rest = eta_drop(I, i)
            for g, u in dS[i]:
                key = (tuple(x + z for x, z in zip(w, u)), rest)
                x = F.mul(a, g)
                out[key] = F.add(out.get(key, 0), x if s > 0 else F.neg(x))
    return y._like(out)
