"""Frobenius operators, degree-0 cohomology and the characteristic polynomial.

The degree-0 computation works in the scaled basis e_w = pi^{Mb|v|} z^w, where
the relations K~_S(z^{w'} eta_i) reduce to unit-level Jacobian relations.
Both the relations and Psi_S respect the coset of (w + 1) modulo the lattice
spanned by the exponents of S, so the problem splits into small blocks.
Blocks that never return to themselves under Psi_S are nilpotent and are
skipped, since they contribute nothing to det(1 - T Psi_S).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

from .complex import BVComplex, GradedElement
from .dwork_series import ECoefficients, TruncatedSeries, build_E_S
from .ffield import VarietySpec, ZetaOutput, expected_degree
from .padic import PadicScalar, PrecisionContext, PrecisionError, QqFloat, choose_parameters, compute_gamma, qq_int, qq_zero

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# T_q and Psi on series and graded elements


def apply_T_q(s: TruncatedSeries, q: int) -> TruncatedSeries:
    out = {}
    for w, c in s.terms.items():
        if all(x % q == 0 for x in w):
            out[tuple(x // q for x in w)] = c
    return TruncatedSeries(s.ctx, s.grading, s.D // q, out)


def apply_psi(x: GradedElement, V: VarietySpec, mode: str = "S", E: TruncatedSeries | None = None) -> GradedElement:
    """Psi^{-m}(xi eta_I) = q^m T(xi z^{comp}) / z^{comp} eta_I, T = T_q or T_q(E . -)."""
    ctx = x.ctx
    q = ctx.q
    if mode not in ("S", "Pn"):
        raise ValueError("mode must be 'S' or 'Pn'")
    if mode == "S":
        E = E if E is not None else build_E_S(V, ctx, q * (x.D + 1) + x.nvars * q)
        eterms = E.terms
    out: dict = {}
    for (w, I), a in x.terms.items():
        m = len(I)
        comp = [0 if j in I else 1 for j in range(x.nvars)]
        src = tuple(u + c for u, c in zip(w, comp))
        scale = a * q**m
        if mode == "Pn":
            cands = [(src, ctx.one())]
        else:
            cands = [(tuple(s + e for s, e in zip(src, ew)), ce) for ew, ce in eterms.items()]
        for tgt, ce in cands:
            if any(t % q for t in tgt):
                continue
            u = tuple(t // q - c for t, c in zip(tgt, comp))
            if min(u) < 0 or sum(u) > x.D:
                continue
            key = (u, I)
            val = scale * ce
            out[key] = out[key] + val if key in out else val
    return x._like(out)


# --------------------------------------------------------------------------
# operator matrices on the truncated monomial basis


@dataclass
class OperatorRep:
    name: str
    rows: list
    cols: list
    entries: dict
    D: int
    N: int
    degree: int

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "rows": [[list(w), list(I)] for w, I in self.rows],
            "cols": [[list(w), list(I)] for w, I in self.cols],
            "entries": [[r, c, v.to_json()] for (r, c), v in sorted(self.entries.items())],
            "D": self.D,
            "N": self.N,
            "degree": self.degree,
        }

    def apply(self, vec: dict) -> dict:
        """vec: col index -> scalar; returns row index -> scalar."""
        out: dict = {}
        for (r, c), v in self.entries.items():
            if c in vec:
                x = v * vec[c]
                out[r] = out[r] + x if r in out else x
        return out


def operator_matrix(op: str, m: int, cx: BVComplex, D: int | None = None) -> OperatorRep:
    """Matrix of an operator on monomials z^w eta_I of degree m with |w| <= D."""
    ops = {"delta": (cx.delta, 1), "K_S": (cx.K, 1), "Q_S": (cx.Q, 1), "Psi_Pn": (None, 0), "Psi_S": (None, 0)}
    if op not in ops:
        raise ValueError(f"unknown operator {op}")
    if not -cx.N <= m <= 0:
        raise ValueError(f"degree {m} out of range")
    if m + ops[op][1] > 0:
        # the differentials vanish on degree 0
        return OperatorRep(op, [], cx.basis(degrees=(m,), D=D), {}, cx.D, cx.ctx.N, m)
    D = cx.D if D is None else D
    cols = cx.basis(degrees=(m,), D=D)
    rdeg = m + ops[op][1]
    rows = cx.basis(degrees=(rdeg,), D=cx.D)
    ridx = {r: i for i, r in enumerate(rows)}
    entries = {}
    E = None
    if op == "Psi_S":
        E = build_E_S(cx.V, cx.ctx, cx.ctx.q * (cx.D + cx.N))
    for j, (w, I) in enumerate(cols):
        x = cx.monomial(w, I)
        if op in ("Psi_Pn", "Psi_S"):
            y = apply_psi(x, cx.V, "S" if op == "Psi_S" else "Pn", E)
        else:
            y = ops[op][0](x)
        for key, v in y.terms.items():
            if key in ridx:
                entries[(ridx[key], j)] = v
    return OperatorRep(op, rows, cols, entries, cx.D, cx.ctx.N, m)


# --------------------------------------------------------------------------
# lattice classes


def _hnf(gens: list[tuple[int, ...]]) -> list[tuple[int, tuple[int, ...]]]:
    """Integer row echelon form: list of (pivot column, row) with positive pivots."""
    rows = [list(g) for g in gens if any(g)]
    n = len(gens[0]) if gens else 0
    out = []
    col = 0
    while rows and col < n:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                f = r[col] // piv[col]
                for t in range(n):
                    r[t] -= f * piv[t]
            nz = [r for r in nz if r[col]]
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        rows = [r for r in rows if r[col] == 0 and any(r)]
        out.append((col, tuple(piv)))
        col += 1
    # reduce above pivots for a canonical basis
    for i in range(len(out)):
        ci, ri = out[i]
        for j in range(i):
            cj, rj = out[j]
            f = rj[ci] // ri[ci]
            if f:
                out[j] = (cj, tuple(a - f * b for a, b in zip(rj, ri)))
    return out


class LatticeClasses:
    def __init__(self, exps: list[tuple[int, ...]]):
        self.basis = _hnf(exps)

    def reduce(self, v) -> tuple[int, ...]:
        v = list(v)
        for col, row in self.basis:
            f = v[col] // row[col]
            if f:
                for t in range(len(v)):
                    v[t] -= f * row[t]
        return tuple(v)

    def key(self, w) -> tuple[int, ...]:
        """Class of the monomial z^w: the coset of w + 1."""
        return self.reduce(x + 1 for x in w)


# --------------------------------------------------------------------------
# degree-0 cohomology


def _sorted_by_degree(ws):
    return sorted(ws, key=lambda w: (sum(w), tuple(-x for x in w)))


@dataclass
class Block:
    key: tuple
    monos: list
    pivots: dict = field(default_factory=dict)  # pivot monomial -> reduced relation row
    order: list = field(default_factory=list)
    complement: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)  # pivot monomial -> pivot norm


@dataclass
class H0Result:
    blocks: dict
    cyclic: list
    basis: list  # (class key, monomial) pairs spanning H^0
    loss: int  # total pivot valuation loss, in pi-adic units
    N_eff: int
    D: int

    @property
    def dim(self) -> int:
        return len(self.basis)


def _axpy_kernel(p: int, a: int, drop: int):
    """x - f*y on QqFloat entries (x may be None); None when it vanishes or drops."""
    if a > 1:
        def axpy(x, f, y):
            z = -(f * y) if x is None else x - f * y
            return None if not z.r or z.v >= drop else z
        return axpy

    pows = [p**i for i in range(4 * drop + 64)]

    def axpy(x, f, y):
        fv = f.v + y.v
        fr = f.r if f.r < y.r else y.r
        fu = f.u * y.u
        if x is None:
            if fv >= drop:
                return None
            return QqFloat(f.Z, p, fv, -fu % pows[fr], fr)
        xv = x.v
        top = xv + x.r
        if fv + fr < top:
            top = fv + fr
        if xv <= fv:
            lo = xv
            s = (x.u - fu * pows[fv - xv]) % pows[top - lo] if fv < top else x.u % pows[top - lo]
        else:
            lo = fv
            s = (x.u * pows[xv - fv] - fu) % pows[top - lo] if xv < top else -fu % pows[top - lo]
        if not s:
            return None
        while not s % p:
            s //= p
            lo += 1
        if lo >= drop:
            return None
        return QqFloat(f.Z, p, lo, s, top - lo)

    return axpy


class DegreeZero:
    """Degree-0 data at a truncation D (total degree) and precision ctx.

    Linear algebra runs in the basis f_w = gamma^{|v|} z^w. There both the
    relations and the matrix of Psi_S have entries in Q_q, because gamma^{p-1}
    lies in Q_p, so no ramified arithmetic is needed. Pivots are still chosen
    by the Banach norm of the scaled basis e_w = pi^{Mb|v|} z^w, in which the
    f_w-coordinate of valuation t at y-degree s has norm t - (b - 1/(p-1)) s.
    """

    def __init__(self, V: VarietySpec, ctx: PrecisionContext, D: int | None = None):
        self.V = V
        self.target = ctx
        self.D = ctx.D if D is None else D
        self.k = V.k
        self.N = V.N
        self.c_X = sum(V.degrees) - (V.n + 1)
        terms = V.potential_terms()
        self.lattice = LatticeClasses([w for _, w in terms])
        self.ymax = max(0, (self.D - self.c_X) // (1 + min(V.degrees)))
        self.gain = ctx.b - Fraction(1, ctx.p - 1)
        # gamma^{-s} costs s/(p-1) digits when moving to the f-basis
        self.guard = math.ceil(Fraction(self.ymax + 2, ctx.p - 1)) + 2
        self.ctx = ctx.with_precision(ctx.N + self.guard)
        self.prec = self.ctx.N
        # reductions in the f-basis have unit-size coefficients, so a
        # coordinate of valuation >= N + 1 never reaches the answer mod p^N
        self.drop = ctx.N + 1
        self._axpy = _axpy_kernel(ctx.p, ctx.a, self.drop)
        # norms scaled by (p - 1) to stay integral
        self._gain_num = (ctx.b * (ctx.p - 1) - 1)
        self.cx = BVComplex(V, self.ctx, self.D + 1)
        self._gamma_pows: dict = {}
        self._h = None

    def ydeg(self, w) -> int:
        return sum(w[: self.k])

    def ch(self, w) -> int:
        k = self.k
        return sum(w[k:]) - sum(d * x for d, x in zip(self.V.degrees, w[:k]))

    def norm(self, x: QqFloat, w) -> Fraction:
        """Valuation of the f_w-coordinate x in the scaled basis."""
        return x.v - self.gain * self.ydeg(w)

    def _norm_key(self, x: QqFloat, w) -> int:
        return x.v * (self.ctx.p - 1) - self._gain_num * sum(w[: self.k])

    def gamma_pow(self, n: int) -> PadicScalar:
        g = self._gamma_pows.get(n)
        if g is None:
            gam = compute_gamma(self.ctx).gamma
            g = gam**n if n >= 0 else gam.inverse() ** (-n)
            self._gamma_pows[n] = g
        return g

    def to_q(self, x: PadicScalar) -> QqFloat:
        if any(r for r in x.c):
            raise PrecisionError("coordinate left Q_q; the f-basis assumption failed")
        return QqFloat.from_padic(x)

    def _charge_zero_monomials(self, D, low=0):
        """Exponent vectors (entries >= low) with ch(w + 1) = 0 and |w| <= D."""
        k, N = self.k, self.N
        degs = self.V.degrees
        target = self.c_X  # ch(w) must equal c_X

        def ys(i, rem):
            if i == k:
                yield ()
                return
            for a in range(low, rem + 1):
                for rest in ys(i + 1, rem - a):
                    yield (a,) + rest

        def xs(i, total):
            if i == N - k - 1:
                if total >= low:
                    yield (total,)
                return
            for a in range(low, total - low * (N - k - 1 - i) + 1):
                for rest in xs(i + 1, total - a):
                    yield (a,) + rest

        for v in ys(0, D):
            xsum = target + sum(d * a for d, a in zip(degs, v))
            if xsum < low * (N - k) or sum(v) + xsum > D:
                continue
            for u in xs(0, xsum):
                yield v + u

    def blocks(self) -> dict:
        out: dict = {}
        for w in self._charge_zero_monomials(self.D):
            key = self.lattice.key(w)
            out.setdefault(key, Block(key, [])).monos.append(w)
        for b in out.values():
            b.monos = _sorted_by_degree(b.monos)
        return out

    def cyclic_keys(self, keys) -> list:
        q = self.ctx.q
        keys = set(keys)
        # c' -> c when q (c' ) == c as cosets of w + 1
        phi = {c: self.lattice.reduce(q * x for x in c) for c in keys}
        cyc = []
        for c in keys:
            seen, x = set(), c
            while x in keys and x not in seen:
                seen.add(x)
                x = phi[x]
            if x == c:
                cyc.append(c)
        return sorted(cyc)

    # relations -----------------------------------------------------------

    def _relation_terms(self):
        """Per variable i: [(u, h)] with h = coefficient of z^u in d_i S^ over gamma^{|v_u| + [i is y]}."""
        if self._h is None:
            out = []
            for i in range(self.N):
                dy = 1 if i < self.k else 0
                terms = []
                for u, g in sorted(self.cx.dShat[i].items()):
                    h = self.to_q(g * self.gamma_pow(-(self.ydeg(u) + dy)))
                    # p-power tail terms of valuation >= N change nothing mod p^N
                    if not h.is_zero() and h.v < self.drop:
                        terms.append((u, h))
                out.append(terms)
            self._h = out
        return self._h

    def relations(self, block: Block):
        """Rows of K~_S(z^{w'} eta_i) in the f-basis, landing in this block, within D."""
        ctx = self.ctx
        D = self.D
        hs = self._relation_terms()
        main = max(self.V.degrees) + 1
        cands = []
        for m in block.monos:
            for i in range(self.N):
                cands.append((i, tuple(x + (1 if j == i else 0) for j, x in enumerate(m))))
        # relations without a delta term: w'_i = 0
        for t in self._charge_zero_monomials(self.D, low=-1):
            if min(t) >= 0 or self.lattice.key(t) != block.key:
                continue
            neg = [i for i, x in enumerate(t) if x < 0]
            if len(neg) == 1:
                i = neg[0]
                cands.append((i, tuple(x + (1 if j == i else 0) for j, x in enumerate(t))))
        seen = set()
        for i, wp in cands:
            if (i, wp) in seen:
                continue
            seen.add((i, wp))
            # the gamma_0 part must fit
            if sum(wp) + main - 1 > D:
                continue
            row: dict = {}
            if wp[i]:
                w = tuple(x - (1 if j == i else 0) for j, x in enumerate(wp))
                row[w] = qq_int(ctx, wp[i], self.prec)
            # tails past D stay as columns that are never pivots: the
            # reduced images of Psi_S only meet them at valuation >= N
            for u, h in hs[i]:
                w = tuple(a + b for a, b in zip(wp, u))
                row[w] = row[w] + h if w in row else h
            row = {w: x for w, x in row.items() if x.r and x.v < self.drop}
            if row:
                yield row

    def _pivot(self, row):
        # a row led by a column past D only relates monomials outside the
        # truncation, and pivoting below it would inflate those columns
        ydeg = self.ydeg
        key = self._norm_key
        pm = min(row, key=lambda w: (key(row[w], w), sum(w) > self.D, -ydeg(w), -sum(w), w))
        return None if sum(pm) > self.D else pm

    def eliminate(self, block: Block) -> Fraction:
        """Echelon form by minimal-norm pivots; returns the largest pivot norm."""
        loss = Fraction(0)
        cap = self.target.N
        axpy = self._axpy
        for row in self.relations(block):
            for pm in block.order:
                if pm in row:
                    f = row[pm]
                    for w, a in block.pivots[pm].items():
                        x = axpy(row.get(w), f, a)
                        if x is None:
                            row.pop(w, None)
                        else:
                            row[w] = x
            if not row:
                continue
            # highest y-degree first among equal norms, so relations
            # reduce downwards in y-degree
            pm = self._pivot(row)
            if pm is None:
                continue
            x = row[pm]
            nv = self.norm(x, pm)
            if nv >= cap:
                continue  # zero modulo p^N: a dependent relation up to truncation
            loss = max(loss, nv)
            block.norms[pm] = nv
            inv = x.inverse()
            block.pivots[pm] = {w: a * inv for w, a in row.items()}
            block.order.append(pm)
        block.complement = [w for w in block.monos if w not in block.pivots]
        return loss

    def reduce_vector(self, block: Block, vec: dict) -> dict:
        drop, axpy = self.drop, self._axpy
        vec = {w: x for w, x in vec.items() if x.v < drop}
        for pm in block.order:
            if pm in vec:
                f = vec.pop(pm)
                for w, a in block.pivots[pm].items():
                    if w == pm:
                        continue
                    x = axpy(vec.get(w), f, a)
                    if x is None:
                        vec.pop(w, None)
                    else:
                        vec[w] = x
        return vec

    def cohomology(self) -> H0Result:
        blocks = self.blocks()
        cyc = self.cyclic_keys(blocks)
        loss = Fraction(0)
        basis = []
        for key in cyc:
            loss = max(loss, self.eliminate(blocks[key]))
            basis.extend((key, w) for w in blocks[key].complement)
        N_eff = self.target.N - math.ceil(loss)
        return H0Result(blocks, cyc, basis, loss, N_eff, self.D)

    def psi_matrix(self, h: H0Result) -> list[list[QqFloat]]:
        """Matrix of Psi_S on the f-basis representatives of H^0 (columns = inputs)."""
        ctx = self.ctx
        q = ctx.q
        E = ECoefficients(self.V, ctx)
        index = {b: i for i, b in enumerate(h.basis)}
        n = len(h.basis)
        zero = qq_zero(ctx, self.prec)
        mat = [[zero] * n for _ in range(n)]
        for j, (key, v) in enumerate(h.basis):
            for key2 in h.cyclic:
                if self.lattice.reduce(q * x for x in key2) != key:
                    continue
                blk = h.blocks[key2]
                vec = {}
                for u in blk.monos:
                    # for a = 1 the f-coordinate at y-degree t has valuation >= t + k
                    if ctx.a == 1 and self.ydeg(u) + self.k >= self.drop:
                        continue
                    W = tuple(q * (a + 1) - (b + 1) for a, b in zip(u, v))
                    if min(W) < 0:
                        continue
                    e = E(W)
                    if e.is_zero():
                        continue
                    x = self.to_q(e * self.gamma_pow(self.ydeg(v) - self.ydeg(u)))
                    if not x.is_zero():
                        vec[u] = x
                red = self.reduce_vector(blk, vec)
                for u, x in red.items():
                    i = index.get((key2, u))
                    if i is not None:
                        mat[i][j] = x
        return mat


def cohomology_H0(V: VarietySpec, ctx: PrecisionContext, D: int | None = None, floor: int = 1):
    dz = DegreeZero(V, ctx, D)
    h = dz.cohomology()
    if h.N_eff < floor:
        raise PrecisionError(f"effective precision {h.N_eff} below floor {floor}; raise N")
    return dz, h


# --------------------------------------------------------------------------
# characteristic polynomial


def berkowitz(mat: list[list], one, zero) -> list:
    """Coefficients of det(t I - A), highest degree first, without division."""
    n = len(mat)
    if n == 0:
        return [one]
    vect = [one, -mat[0][0]]
    for r in range(1, n):
        # A = [[a11, R], [C, A_r]] with the leading r x r block A_r
        R = [mat[r][j] for j in range(r)]
        C = [mat[i][r] for i in range(r)]
        Ar = [row[:r] for row in mat[:r]]
        a = mat[r][r]
        # Toeplitz column: 1, -a, -R C, -R A C, ..., -R A^{r-1} C
        col = [one, -a]
        Ck = C
        for _ in range(r):
            s = zero
            for x, y in zip(R, Ck):
                s = s + x * y
            col.append(-s)
            Ck = [sum((Ar[i][j] * Ck[j] for j in range(r)), zero) for i in range(r)]
        # multiply the (r+2) x (r+1) lower Toeplitz matrix by vect
        new = []
        for i in range(r + 2):
            s = zero
            for j in range(min(i + 1, len(vect))):
                s = s + col[i - j] * vect[j]
            new.append(s)
        vect = new
    return vect


@dataclass
class CharPoly:
    coeffs: list  # c_0 .. c_d of det(1 - T A), as PadicScalar
    N_eff: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def char_poly(mat, ctx: PrecisionContext, N_eff: int | None = None) -> CharPoly:
    if mat and isinstance(mat[0][0], QqFloat):
        cp = berkowitz(mat, qq_int(ctx, 1, ctx.N), qq_zero(ctx, ctx.N))
        cp = [c.to_padic(ctx) for c in cp]
    else:
        cp = berkowitz(mat, ctx.one(), ctx.zero())
    # det(tI - A) = sum cp[i] t^{n-i}, so det(1 - T A) = sum cp[i] T^i
    return CharPoly(cp, ctx.N if N_eff is None else N_eff)


def char_poly_psi_S(V: VarietySpec, ctx: PrecisionContext, D: int | None = None, floor: int = 1):
    dz, h = cohomology_H0(V, ctx, D, floor)
    return char_poly(dz.psi_matrix(h), ctx, h.N_eff), h


# --------------------------------------------------------------------------
# recovery of P(T)


def _lift(c: PadicScalar, modulus: int) -> int:
    x = c.to_fraction()
    if x.denominator != 1:
        raise PrecisionError("coefficient is not an integer at this precision")
    v = x.numerator % modulus
    return v - modulus if v > modulus // 2 else v


def _weil_bound(d: int, j: int, q: int, w: int) -> int:
    return comb(d, j) * math.isqrt(q ** (j * w)) + comb(d, j)


def recover_P_and_zeta(cp: CharPoly, V: VarietySpec, ctx: PrecisionContext, diagnostics: dict | None = None) -> ZetaOutput:
    """Integer P(T) from det(1 - T Psi_S) = P(q^k T).

    Coefficients pinned down by the precision are lifted directly; the rest
    follow from the functional equation P_{d-j} = e q^{w(d-2j)/2} P_j, and are
    then checked against the p-adic values.
    """
    q, k, n = ctx.q, V.k, V.n
    w = n - k
    p = ctx.p
    d = cp.degree
    known: dict[int, int] = {}
    mods = []
    for j, c in enumerate(cp.coeffs):
        if any(r for r in c.c):
            raise PrecisionError(f"coefficient {j} is not in Z_p at this precision")
        mod = p ** min(cp.N_eff, c.prec // ctx.M)
        mods.append(mod)
        bound = _weil_bound(d, j, q, w)
        if mod <= 2 * bound * q ** (k * j):
            continue
        x = _lift(c, mod) if not c.is_zero() else 0
        if x % q ** (k * j):
            raise PrecisionError(f"coefficient {j} is not divisible by q^{k * j}")
        x //= q ** (k * j)
        if abs(x) > bound:
            raise PrecisionError(f"coefficient {j} = {x} violates the Weil bound")
        known[j] = x
    if known.get(0) != 1:
        raise PrecisionError("constant term of P is not pinned to 1")
    sign = 1 if w % 2 else None
    for j in range(d // 2 + 1, d + 1):
        if sign is None and 2 * j > d and j in known and known.get(d - j):
            t = q ** (w * (2 * j - d) // 2) * known[d - j]
            sign = 1 if known[j] == t else -1 if known[j] == -t else 0
    if sign == 0:
        raise PrecisionError("coefficients violate the functional equation")
    P = []
    for j in range(d + 1):
        if j in known:
            P.append(known[j])
            continue
        if 2 * j <= d or d - j not in known:
            raise PrecisionError(f"precision p^{cp.N_eff} does not pin coefficient {j}")
        if sign is None:
            raise PrecisionError("sign of the functional equation is not determined; raise N")
        P.append(sign * q ** (w * (2 * j - d) // 2) * known[d - j])
    for j, x in enumerate(P):
        c = cp.coeffs[j]
        got = 0 if c.is_zero() else c.to_fraction()
        if (x * q ** (k * j) - got) % mods[j]:
            raise PrecisionError(f"coefficient {j} is inconsistent with the functional equation")
    diag = {"D": None, "N": ctx.N, "M": ctx.M, "b": str(ctx.b), "N_eff": cp.N_eff,
            "functional_equation": sorted(set(range(d + 1)) - set(known))}
    diag.update(diagnostics or {})
    return ZetaOutput(P, n, k, q, diag)


def zeta_via_frobenius(V: VarietySpec, ctx: PrecisionContext | None = None, D: int | None = None,
                       stabilize: bool = True, max_steps: int = 4, floor: int = 1) -> ZetaOutput:
    """P(T) from det(1 - T Psi_S | H^0), rerun at (D + step, N + 1) until two runs agree."""
    p, a = V.F.p, V.F.a
    d_exp = expected_degree(V.n, V.degrees)
    if ctx is None:
        ctx = choose_parameters(p, a, target_precision=_default_precision(V, d_exp), field=V.F)
    if D is None:
        D = default_D(V, ctx)
    step = max(V.degrees) + 1
    prev = None
    for it in range(max_steps if stabilize else 1):
        try:
            cp, h = char_poly_psi_S(V, ctx, D, floor)
            z = recover_P_and_zeta(cp, V, ctx, {"D": D, "dim_H0": h.dim, "pivot_loss": h.loss})
        except PrecisionError:
            if not stabilize or it == max_steps - 1:
                raise
            ctx = ctx.with_precision(ctx.N + 1)
            D = max(D + step, default_D(V, ctx))
            continue
        if not stabilize:
            z.diagnostics["stabilized"] = False
            return z
        if prev is not None and prev.P == z.P:
            z.diagnostics["stabilized"] = True
            return z
        prev = z
        ctx = ctx.with_precision(ctx.N + 1)
        D = max(D + step, default_D(V, ctx))
    prev.diagnostics["stabilized"] = False
    return prev


def default_D(V: VarietySpec, ctx: PrecisionContext) -> int:
    """Total degree reaching y-degree Y, where Y levels gain N digits.

    Each step down in y-degree during reduction gains b - 1/(p-1) digits, and
    relations broken by the truncation only show up beyond that.
    """
    gain = ctx.b - Fraction(1, ctx.p - 1)
    Y = math.ceil(ctx.N / gain) + 1
    return (1 + max(V.degrees)) * Y + max(0, sum(V.degrees) - V.n - 1)


def _default_precision(V: VarietySpec, d: int) -> int:
    """Smallest N lifting the coefficients not given by the functional equation."""
    q, k, w = V.F.q, V.k, V.n - V.k
    js = range(d // 2 + 1) if w % 2 else range(d + 1)
    need = max(2 * _weil_bound(d, j, q, w) * q ** (k * j) for j in js)
    N = 1
    while V.F.p**N <= need:
        N += 1
    return N + 1
