"""Dwork power series: Artin-Hasse exponential, splitting function, potentials.

Multivariate series are sparse dicts from exponent tuples to PadicScalar,
truncated at a total-degree bound.  The variables are ordered
z = (y_1..y_k, x_0..x_n) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .ffield import VarietySpec
from .padic import GammaTable, PadicScalar, PrecisionContext, compute_gamma, teichmuller_lift


@lru_cache(maxsize=None)
def _ah_fractions(p: int, D_t: int) -> tuple[Fraction, ...]:
    # n e_n = sum_{p^j <= n} e_{n - p^j}, from E' = E * sum t^{p^j - 1}
    e = [Fraction(1)]
    for n in range(1, D_t + 1):
        s = Fraction(0)
        pj = 1
        while pj <= n:
            s += e[n - pj]
            pj *= p
        e.append(s / n)
    return tuple(e)


def artin_hasse_coeffs(ctx: PrecisionContext, D_t: int) -> list[PadicScalar]:
    """Coefficients e_0..e_{D_t} of the Artin-Hasse exponential, mod p^N."""
    if D_t < 1:
        raise ValueError("D_t must be >= 1")
    out = []
    for i, x in enumerate(_ah_fractions(ctx.p, D_t)):
        if x.denominator % ctx.p == 0:
            raise ArithmeticError(f"Artin-Hasse coefficient e_{i} is not p-integral")
        out.append(ctx.from_fraction(x))
    return out


@dataclass
class ThetaTable:
    lam: list[PadicScalar]
    ah: list[PadicScalar]

    def __len__(self):
        return len(self.lam)

    def evaluate(self, t: PadicScalar) -> PadicScalar:
        # Horner; t is p-integral so terms past the table are below precision
        acc = t.ctx.zero()
        for c in reversed(self.lam):
            acc = acc * t + c
        return acc


def default_theta_degree(ctx: PrecisionContext) -> int:
    # val(lambda_i) >= i/(p-1), so i >= (p-1) N is invisible
    return (ctx.p - 1) * ctx.N + 1


def theta_coeffs(ctx: PrecisionContext, gamma: GammaTable | None = None, D_t: int | None = None) -> ThetaTable:
    """lambda_i = e_i gamma^i, the coefficients of theta(t) = E(gamma t)."""
    gamma = gamma or compute_gamma(ctx)
    D_t = D_t or default_theta_degree(ctx)
    ah = artin_hasse_coeffs(ctx, D_t)
    lam, g = [], ctx.one()
    for e in ah:
        lam.append(e * g)
        g = g * gamma.gamma
    return ThetaTable(lam, ah)


_THETA: dict = {}


def _theta(ctx: PrecisionContext) -> ThetaTable:
    key = (ctx.p, ctx.a, ctx.F.modulus, ctx.N, ctx.M)
    if key not in _THETA:
        _THETA[key] = theta_coeffs(ctx)
    return _THETA[key]


def psi_q(ctx: PrecisionContext, x: int) -> PadicScalar:
    """The additive character theta(t) theta(t^p) ... theta(t^{p^{a-1}}), t the Teichmuller lift of x."""
    th = _theta(ctx)
    t = teichmuller_lift(ctx, x)
    acc = ctx.one()
    for _ in range(ctx.a):
        acc = acc * th.evaluate(t)
        t = t**ctx.p
    return acc


def psi_table(ctx: PrecisionContext) -> list[PadicScalar]:
    return [psi_q(ctx, x) for x in range(ctx.q)]


# --------------------------------------------------------------------------
# truncated multivariate series


@dataclass(frozen=True)
class Grading:
    """Charge and weight of monomials; the first k variables are the y's."""

    degrees: tuple[int, ...]
    n: int

    @property
    def k(self) -> int:
        return len(self.degrees)

    @property
    def nvars(self) -> int:
        return self.k + self.n + 1

    @property
    def c_X(self) -> int:
        return sum(self.degrees) - (self.n + 1)

    def ch(self, w) -> int:
        k = self.k
        return sum(w[k:]) - sum(d * x for d, x in zip(self.degrees, w[:k]))

    def wt(self, w) -> int:
        return sum(w[: self.k])

    @classmethod
    def of(cls, V: VarietySpec) -> "Grading":
        return cls(V.degrees, V.n)


def _addv(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass
class TruncatedSeries:
    ctx: PrecisionContext
    grading: Grading
    D: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {w: c for w, c in self.terms.items() if sum(w) <= self.D and not c.is_zero()}

    def _like(self, terms, D=None):
        return TruncatedSeries(self.ctx, self.grading, self.D if D is None else D, terms)

    @classmethod
    def one(cls, ctx, grading, D):
        return cls(ctx, grading, D, {(0,) * grading.nvars: ctx.one()})

    def coeff(self, w) -> PadicScalar:
        return self.terms.get(tuple(w), self.ctx.zero())

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return self._like(out, min(self.D, other.D))

    def __neg__(self):
        return self._like({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._like({w: x * c for w, x in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        D = min(self.D, other.D)
        out: dict = {}
        for wa in sorted(self.terms):
            ca = self.terms[wa]
            da = sum(wa)
            for wb in sorted(other.terms):
                if da + sum(wb) > D:
                    continue
                w = _addv(wa, wb)
                x = ca * other.terms[wb]
                out[w] = out[w] + x if w in out else x
        return self._like(out, D)

    def truncate(self, D: int):
        return self._like(dict(self.terms), D)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and (self - other).is_zero()

    def partial(self, i: int):
        """d/dz_i."""
        out = {}
        for w, c in self.terms.items():
            if w[i]:
                v = list(w)
                v[i] -= 1
                out[tuple(v)] = c * w[i]
        return self._like(out)

    def substitute_power(self, q: int):
        """z -> z^q, with the degree bound scaled by q."""
        return self._like({tuple(q * x for x in w): c for w, c in self.terms.items()}, self.D * q)

    def to_ctx(self, ctx):
        return TruncatedSeries(ctx, self.grading, self.D, {w: c.to_ctx(ctx) for w, c in self.terms.items()})

    def to_json(self) -> list:
        return [{"e": list(w), "c": self.terms[w].to_json()} for w in sorted(self.terms)]

    @classmethod
    def from_json(cls, ctx, grading, D, data):
        return cls(ctx, grading, D, {tuple(t["e"]): PadicScalar.from_json(ctx, t["c"]) for t in data})


def exp_series(s: TruncatedSeries) -> TruncatedSeries:
    """exp of a series without constant term, sum s^n/n! up to the degree bound.

    Division by n! costs v_p(n!) digits; callers wanting N exact digits
    should work in a context widened accordingly.
    """
    if any(sum(w) == 0 for w in s.terms):
        raise ValueError("exp_series needs a series without constant term")
    if not s.terms:
        return TruncatedSeries.one(s.ctx, s.grading, s.D)
    dmin = min(sum(w) for w in s.terms)
    acc = TruncatedSeries.one(s.ctx, s.grading, s.D)
    term = acc
    for n in range(1, s.D // dmin + 1):
        term = (term * s).scale(s.ctx.from_fraction(Fraction(1, n)))
        acc = acc + term
    return acc


# --------------------------------------------------------------------------
# potentials


def lifted_terms(V: VarietySpec, ctx: PrecisionContext) -> list[tuple[PadicScalar, tuple]]:
    """Teichmuller-lifted monomials s_w z^w of S = sum_l y_l G_l."""
    return [(teichmuller_lift(ctx, c), w) for c, w in V.potential_terms()]


def _val_cut(ctx, c: PadicScalar) -> bool:
    return c.is_zero() or c.val() >= ctx.N


def build_potentials(V: VarietySpec, ctx: PrecisionContext, D: int | None = None):
    """(S~, S^, Gamma) truncated at total degree D and precision N."""
    D = ctx.D if D is None else D
    if D < max(V.degrees) + 1:
        raise ValueError(f"degree bound D={D} holds no term of S (need >= {max(V.degrees) + 1})")
    gr = Grading.of(V)
    G = compute_gamma(ctx)
    p = ctx.p
    terms = lifted_terms(V, ctx)
    S = TruncatedSeries(ctx, gr, D, {w: c for c, w in terms})

    Sh: dict = {}
    for m, gm in enumerate(G.gamma_l):
        if gm.is_zero():
            continue
        for c, w in terms:
            wm = tuple(x * p**m for x in w)
            if sum(wm) > D:
                continue
            x = gm * c ** (p**m)
            if not _val_cut(ctx, x):
                Sh[wm] = Sh[wm] + x if wm in Sh else x
    Shat = TruncatedSeries(ctx, gr, D, Sh)

    Gm: dict = {}
    for j in range(ctx.a):
        for c, w in terms:
            l = 0
            gpl = G.gamma
            while Fraction(p**l, p - 1) - l < ctx.N:
                e = p ** (j + l)
                wl = tuple(x * e for x in w)
                if sum(wl) > D:
                    break
                x = (gpl * c**e).shift(-l)
                if not _val_cut(ctx, x):
                    Gm[wl] = Gm[wl] + x if wl in Gm else x
                gpl = gpl**p
                l += 1
    Gam = TruncatedSeries(ctx, gr, D, Gm)
    return S, Shat, Gam


def theta_atoms(V: VarietySpec, ctx: PrecisionContext) -> list[tuple[PadicScalar, tuple]]:
    """Factors (c, e) of E_S~ = prod theta(c z^e): one per monomial and Frobenius twist."""
    out = []
    for c, w in lifted_terms(V, ctx):
        for j in range(ctx.a):
            e = ctx.p**j
            out.append((c**e, tuple(x * e for x in w)))
    return out


def build_E_S(V: VarietySpec, ctx: PrecisionContext, D: int | None = None) -> TruncatedSeries:
    """E_S~ as a truncated product of theta series."""
    D = ctx.D if D is None else D
    gr = Grading.of(V)
    th = _theta(ctx)
    acc = TruncatedSeries.one(ctx, gr, D)
    for c, e in theta_atoms(V, ctx):
        de = sum(e)
        fac, ci = {}, ctx.one()
        for i, lam in enumerate(th.lam):
            if i * de > D:
                break
            x = lam * ci
            if not x.is_zero():
                fac[tuple(i * u for u in e)] = x
            ci = ci * c
        acc = acc * TruncatedSeries(ctx, gr, D, fac)
    return acc


class ECoefficients:
    """Single coefficients of E_S~ without expanding the full product.

    The coefficient at W is a sum over decompositions W = sum_i n_i e_i
    into atom exponents, each weighted by prod lambda_{n_i} c_i^{n_i}.
    """

    def __init__(self, V: VarietySpec, ctx: PrecisionContext):
        self.ctx = ctx
        self.atoms = theta_atoms(V, ctx)
        self.theta = _theta(ctx)
        # weights[i][n] = lambda_n c_i^n
        self.weights = []
        for c, _ in self.atoms:
            row, ci = [], ctx.one()
            for lam in self.theta.lam:
                row.append(lam * ci)
                ci = ci * c
            while row and row[-1].is_zero():
                row.pop()
            self.weights.append(row)
        self._memo: dict = {}

    def __call__(self, W) -> PadicScalar:
        W = tuple(W)
        if min(W) < 0:
            return self.ctx.zero()
        return self._rec(W, 0)

    def _rec(self, W, i):
        key = (W, i)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if i == len(self.atoms):
            out = self.ctx.one() if not any(W) else self.ctx.zero()
        else:
            e = self.atoms[i][1]
            acc = self.ctx.zero()
            R = W
            for w in self.weights[i]:
                if min(R) < 0:
                    break
                if not w.is_zero():
                    sub = self._rec(R, i + 1)
                    if not sub.is_zero():
                        acc = acc + w * sub
                R = tuple(x - y for x, y in zip(R, e))
            out = acc
        self._memo[key] = out
        return out
