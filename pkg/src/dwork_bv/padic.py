"""Precision-tracked arithmetic in O = Z_q[pi]/(pi^M + p), modulo p^N.

A :class:`PadicScalar` is ``p^e * sum_r pi^r c_r`` with ``0 <= r < M`` and
``c_r`` in Z_q, together with an absolute precision ``prec`` counted in
pi-adic digits (the value is known modulo ``pi^prec``).  Negative ``e`` is
allowed so that quotients by non-units (cohomology is taken over the
fraction field) stay representable.

Z_q = Z_p[t]/(f) where f is the monic lift of the F_q modulus; for a = 1 the
Z_q coefficients are plain ints, otherwise tuples of length a.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from functools import cached_property

from .ffield import FieldCtx, make_field

INF = math.inf


class PrecisionError(ArithmeticError):
    """Raised when the tracked precision drops below a requested floor."""


class NonUnitError(ZeroDivisionError):
    pass


def _vp_int(n: int, p: int) -> int:
    if n == 0:
        return 10**9
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class _Zp:
    """Z_q arithmetic for a = 1: plain Python ints."""

    a = 1

    def __init__(self, p):
        self.p = p

    zero = 0
    one = 1

    @staticmethod
    def add(x, y):
        return x + y

    @staticmethod
    def sub(x, y):
        return x - y

    @staticmethod
    def neg(x):
        return -x

    @staticmethod
    def mul(x, y):
        return x * y

    @staticmethod
    def scale(x, n):
        return x * n

    @staticmethod
    def mod(x, m):
        return x % m

    def vp(self, x):
        return _vp_int(x, self.p)

    @staticmethod
    def is_zero(x):
        return x == 0

    @staticmethod
    def from_int(n):
        return n

    @staticmethod
    def exact_div(x, n):
        return x // n

    def residue(self, x):
        return x % self.p

    @staticmethod
    def from_residue(r):
        return r

    def to_json(self, x):
        return [str(x)]

    def from_json(self, v):
        return int(v[0])


class _Zq:
    """Z_q arithmetic for a > 1: coefficient tuples modulo a monic lift."""

    def __init__(self, p, modulus):
        self.p = p
        self.a = len(modulus) - 1
        self.f = tuple(modulus)
        self.zero = (0,) * self.a
        self.one = (1,) + (0,) * (self.a - 1)

    def add(self, x, y):
        return tuple(u + v for u, v in zip(x, y))

    def sub(self, x, y):
        return tuple(u - v for u, v in zip(x, y))

    def neg(self, x):
        return tuple(-u for u in x)

    def scale(self, x, n):
        return tuple(u * n for u in x)

    def mul(self, x, y):
        a = self.a
        out = [0] * (2 * a - 1)
        for i, u in enumerate(x):
            if u:
                for j, v in enumerate(y):
                    out[i + j] += u * v
        f = self.f
        for d in range(2 * a - 2, a - 1, -1):
            c = out[d]
            if c:
                s = d - a
                for i in range(a):
                    out[s + i] -= c * f[i]
        return tuple(out[:a])

    def mod(self, x, m):
        return tuple(u % m for u in x)

    def vp(self, x):
        return min(_vp_int(u, self.p) for u in x)

    @staticmethod
    def is_zero(x):
        return not any(x)

    def from_int(self, n):
        return (n,) + (0,) * (self.a - 1)

    @staticmethod
    def exact_div(x, n):
        return tuple(u // n for u in x)

    def residue(self, x):
        return tuple(u % self.p for u in x)

    def from_residue(self, r):
        return tuple(r)

    def to_json(self, x):
        return [str(u) for u in x]

    def from_json(self, v):
        return tuple(int(u) for u in v)


@dataclass(frozen=True)
class PrecisionContext:
    """Global arithmetic parameters (p, a, q, b, M, N, D) and the ring data."""

    p: int
    a: int
    b: Fraction
    M: int
    N: int
    D: int
    F: FieldCtx = field(repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p**self.a

    @cached_property
    def cap(self) -> int:
        """Working precision in pi-adic digits (p^N = pi^(MN) up to a unit)."""
        return self.M * self.N

    @property
    def Mb(self) -> int:
        v = self.M * self.b
        assert v.denominator == 1
        return int(v)

    @property
    def ramified_modulus(self) -> str:
        return f"x^{self.M} + {self.p}"

    @cached_property
    def Z(self):
        return _Zp(self.p) if self.a == 1 else _Zq(self.p, self.F.modulus)

    @cached_property
    def _ppow(self):
        return [self.p**i for i in range(self.N + 2)]

    def ppow(self, i):
        if i < len(self._ppow):
            return self._ppow[i]
        return self.p**i

    # constructors
    def zero(self) -> "PadicScalar":
        return PadicScalar(self, {}, 0, self.cap)

    def one(self) -> "PadicScalar":
        return self.from_int(1)

    def from_int(self, n: int) -> "PadicScalar":
        return PadicScalar.make(self, {0: self.Z.from_int(n)}, 0, self.cap)

    def from_fraction(self, x: Fraction) -> "PadicScalar":
        x = Fraction(x)
        vnum, vden = _vp_int(x.numerator, self.p), _vp_int(x.denominator, self.p)
        num = x.numerator // self.p ** (vnum if x.numerator else 0)
        den = x.denominator // self.p**vden
        e = (vnum if x.numerator else 0) - vden
        if x.numerator == 0:
            return self.zero()
        m = self.ppow(self.N + max(0, -e) + 1)
        c = num * pow(den, -1, m) % m
        return PadicScalar.make(self, {0: self.Z.from_int(c)}, e, self.cap)

    def from_zq(self, c) -> "PadicScalar":
        return PadicScalar.make(self, {0: c}, 0, self.cap)

    def pi_power(self, n: int) -> "PadicScalar":
        """pi^n for any integer n, using pi^M = -p."""
        qd, r = divmod(n, self.M)
        sign = -1 if qd % 2 else 1
        return PadicScalar.make(self, {r: self.Z.from_int(sign)}, qd, self.cap)

    def to_json(self) -> dict:
        return {"p": self.p, "a": self.a, "b": f"{self.b.numerator}/{self.b.denominator}",
                "M": self.M, "N": self.N, "D": self.D, "modulus": list(self.F.modulus),
                "ramified_modulus": self.ramified_modulus}

    @classmethod
    def from_json(cls, d: dict) -> "PrecisionContext":
        F = make_field(int(d["p"]), int(d["a"]), d.get("modulus"))
        num, den = d["b"].split("/")
        return cls(F.p, F.a, Fraction(int(num), int(den)), int(d["M"]), int(d["N"]), int(d["D"]), F)

    def with_precision(self, N: int | None = None, D: int | None = None) -> "PrecisionContext":
        return PrecisionContext(self.p, self.a, self.b, self.M, N or self.N, D or self.D, self.F)


def choose_parameters(p: int, a: int = 1, target_precision: int = 10, degree_bound: int | None = None,
                      field: FieldCtx | None = None) -> PrecisionContext:
    """Least M = (p-1) p m and the admissible b nearest the interval midpoint.

    b must lie strictly between 1/(p-1) and p/(p-1), and M b/((p-1) p) must be
    an integer, so b is a multiple of 1/m.  For m = 1 the integer b = 1 is
    always admissible, which makes M = p(p-1) the least choice.
    """
    if field is None:
        field = make_field(p, a)
    lo, hi = Fraction(1, p - 1), Fraction(p, p - 1)
    mid = Fraction(p + 1, 2 * (p - 1))
    m = 1
    while True:
        M = (p - 1) * p * m
        cands = [Fraction(j, m) for j in range(1, 2 * p * m) if lo < Fraction(j, m) < hi]
        if cands:
            b = min(cands, key=lambda x: (abs(x - mid), x))
            break
        m += 1  # pragma: no cover
    D = degree_bound if degree_bound is not None else 4 * p
    return PrecisionContext(p, a, b, M, target_precision, D, field)


class PadicScalar:
    __slots__ = ("ctx", "c", "e", "prec", "_v")

    def __init__(self, ctx: PrecisionContext, c: dict, e: int, prec: int):
        self.ctx, self.c, self.e, self.prec = ctx, c, e, prec
        self._v = None

    @classmethod
    def make(cls, ctx, c, e, prec):
        """Normalise: pull common powers of p into e, then reduce each c_r
        modulo the digits that ``prec`` pins down."""
        cap = ctx.cap
        if prec > cap:
            prec = cap
        if not c:
            return cls(ctx, {}, e, prec)
        M, p = ctx.M, ctx.p
        if ctx.a == 1:
            g = 0
            for x in c.values():
                g = gcd(g, x)
            if g == 0:
                return cls(ctx, {}, e, prec)
            if g % p == 0:
                t = 0
                while g % p == 0:
                    g //= p
                    t += 1
                pt = p**t
                c = {r: x // pt for r, x in c.items()}
                e += t
            out = {}
            for r, x in c.items():
                # need pi^r p^(e+j) < pi^prec  <=>  j < (prec - r)/M - e
                k = -((r - prec) // M) - e
                if k > 0:
                    x %= ctx.ppow(k)
                    if x:
                        out[r] = x
            if out and all(x % p == 0 for x in out.values()):
                return cls.make(ctx, out, e, prec)
            return cls(ctx, out, e, prec)
        Z = ctx.Z
        vals = list(c.values())
        while all(u % p == 0 for x in vals for u in x) and any(any(x) for x in vals):
            vals = [tuple(u // p for u in x) for x in vals]
            e += 1
        c = dict(zip(c.keys(), vals))
        out = {}
        for r, x in c.items():
            k = -((r - prec) // M) - e
            if k <= 0:
                continue
            x = Z.mod(x, ctx.ppow(k))
            if not Z.is_zero(x):
                out[r] = x
        if out and all(u % p == 0 for x in out.values() for u in x):
            return cls.make(ctx, out, e, prec)
        return cls(ctx, out, e, prec)

    # --- inspection -----------------------------------------------------
    def val_pi(self):
        """Valuation in pi-adic digits (INF for a zero at its precision)."""
        v = self._v
        if v is None:
            if not self.c:
                v = INF
            else:
                M, Z, e = self.ctx.M, self.ctx.Z, self.e
                v = min(r + M * (e + Z.vp(x)) for r, x in self.c.items())
            self._v = v
        return v

    def val(self):
        v = self.val_pi()
        return INF if v == INF else Fraction(v, self.ctx.M)

    def is_zero(self) -> bool:
        return not self.c

    def _floor(self):
        v = self.val_pi()
        return self.prec if v == INF else min(v, self.prec)

    def __repr__(self):
        if not self.c:
            return f"O(pi^{self.prec})"
        terms = " + ".join(f"{x}*pi^{r}" for r, x in sorted(self.c.items()))
        return f"p^{self.e}*({terms}) + O(pi^{self.prec})"

    # --- ring operations ------------------------------------------------
    def _coerce(self, y):
        if isinstance(y, PadicScalar):
            return y
        if isinstance(y, int):
            return self.ctx.from_int(y)
        if isinstance(y, Fraction):
            return self.ctx.from_fraction(y)
        return NotImplemented

    def __add__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        Z, p = self.ctx.Z, self.ctx.p
        e = min(self.e, y.e)
        out = {}
        s1 = p ** (self.e - e)
        for r, x in self.c.items():
            out[r] = Z.scale(x, s1) if s1 != 1 else x
        s2 = p ** (y.e - e)
        for r, x in y.c.items():
            x = Z.scale(x, s2) if s2 != 1 else x
            out[r] = Z.add(out[r], x) if r in out else x
        return PadicScalar.make(self.ctx, out, e, min(self.prec, y.prec))

    __radd__ = __add__

    def __neg__(self):
        Z = self.ctx.Z
        return PadicScalar(self.ctx, {r: Z.neg(x) for r, x in self.c.items()}, self.e, self.prec)

    def __sub__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        return self + (-y)

    def __rsub__(self, y):
        return (-self) + y

    def __mul__(self, y):
        if isinstance(y, int):
            if y == 0:
                return self.ctx.zero()
            Z = self.ctx.Z
            v = _vp_int(y, self.ctx.p)
            return PadicScalar.make(self.ctx, {r: Z.scale(x, y) for r, x in self.c.items()}, self.e,
                                    self.prec + v * self.ctx.M)
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        ctx = self.ctx
        M, Z, p = ctx.M, ctx.Z, ctx.p
        out = {}
        for r1, x1 in self.c.items():
            for r2, x2 in y.c.items():
                r = r1 + r2
                t = Z.mul(x1, x2)
                if r >= M:
                    r -= M
                    t = Z.scale(t, -p)
                out[r] = Z.add(out[r], t) if r in out else t
        prec = min(self.prec + y._floor(), y.prec + self._floor())
        return PadicScalar.make(ctx, out, self.e + y.e, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.ctx.one(), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _unit_inverse(self):
        """Newton inverse of a valuation-0 element."""
        ctx, Z = self.ctx, self.ctx.Z
        c0 = self.c.get(0)
        if c0 is None or self.e + Z.vp(c0) != 0:
            raise NonUnitError("not a unit")
        F = ctx.F.field
        # residue of the pi^0 digit
        unit = Z.exact_div(c0, ctx.p ** (-self.e)) if self.e < 0 else c0
        res = Z.residue(unit)
        res_int = F.from_coeffs([res] if ctx.a == 1 else list(res))
        inv_res = F.to_coeffs(F.inv(res_int))
        y = PadicScalar.make(ctx, {0: Z.from_residue(inv_res[0] if ctx.a == 1 else inv_res)}, 0, ctx.cap)
        x = self
        good = 1
        target = min(self.prec, ctx.cap)
        two = ctx.from_int(2)
        while good < target:
            y = y * (two - x * y)
            good *= 2
        return PadicScalar.make(ctx, y.c, y.e, target)

    def inverse(self):
        v = self.val_pi()
        if v == INF:
            raise NonUnitError("inverse of zero")
        ctx = self.ctx
        u = self * ctx.pi_power(-v)
        inv = u._unit_inverse() * ctx.pi_power(-v)
        return PadicScalar.make(ctx, inv.c, inv.e, min(ctx.cap, self.prec - 2 * v))

    def inv(self):
        """Inverse of a unit (valuation zero); raises for non-units."""
        if self.val_pi() != 0:
            raise NonUnitError("inversion of a non-unit")
        return self._unit_inverse()

    def __truediv__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return y
        return self * y.inverse()

    def __rtruediv__(self, y):
        return self._coerce(y) * self.inverse()

    def shift(self, k: int) -> "PadicScalar":
        """Exact multiplication by p^k (k may be negative)."""
        return PadicScalar.make(self.ctx, dict(self.c), self.e + k, self.prec + k * self.ctx.M)

    def to_ctx(self, ctx: "PrecisionContext") -> "PadicScalar":
        """Move to a context sharing p, a and M (precision is re-capped)."""
        return PadicScalar.make(ctx, dict(self.c), self.e, min(self.prec, ctx.cap))

    def reduce_prec(self, prec: int) -> "PadicScalar":
        return PadicScalar.make(self.ctx, self.c, self.e, min(prec, self.prec))

    def __eq__(self, y):
        y = self._coerce(y)
        if y is NotImplemented:
            return False
        return (self - y).is_zero()

    def __hash__(self):  # pragma: no cover - values are compared, not hashed
        raise TypeError("PadicScalar is unhashable")

    # --- conversions ----------------------------------------------------
    def is_rational_integer(self) -> bool:
        """True when only the pi^0, omega_0 digit is nonzero."""
        if any(r != 0 for r in self.c):
            return False
        x = self.c.get(0)
        return x is None or self.ctx.a == 1 or not any(x[1:])

    def to_fraction(self) -> Fraction:
        """Rational value of a p-adic element lying in Q_p, symmetric lift."""
        if not self.is_rational_integer():
            raise ValueError("element is not in Q_p")
        x = self.c.get(0, self.ctx.Z.zero)
        x = x if self.ctx.a == 1 else x[0]
        k = -((0 - self.prec) // self.ctx.M) - self.e  # digits of c_0 pinned down
        if k > 0:
            m = self.ctx.p**k
            x %= m
            if x > m // 2:
                x -= m
        return Fraction(x) * Fraction(self.ctx.p) ** self.e

    def frobenius(self) -> "PadicScalar":
        """Coefficient-wise Frobenius of Z_q (pi is fixed)."""
        if self.ctx.a == 1:
            return self
        sig = frobenius_of_t(self.ctx)
        Z = self.ctx.Z
        out = {}
        for r, x in self.c.items():
            acc = Z.zero
            powt = Z.one
            for coeff in x:
                acc = Z.add(acc, Z.scale(powt, coeff))
                powt = Z.mod(Z.mul(powt, sig), self.ctx.ppow(self.ctx.N + 1 + abs(self.e)))
            out[r] = acc
        return PadicScalar.make(self.ctx, out, self.e, self.prec)

    def to_json(self) -> dict:
        M, a = self.ctx.M, self.ctx.a
        Z = self.ctx.Z
        coeffs = [[str(0)] * a for _ in range(M)]
        for r, x in self.c.items():
            coeffs[r] = Z.to_json(x)
        return {"coeffs": coeffs, "e": self.e, "prec": self.prec}

    @classmethod
    def from_json(cls, ctx, d) -> "PadicScalar":
        Z = ctx.Z
        c = {r: Z.from_json(v) for r, v in enumerate(d["coeffs"]) if any(int(u) for u in v)}
        return cls.make(ctx, c, int(d.get("e", 0)), int(d["prec"]))


_FROB_CACHE: dict = {}


class QqFloat:
    """Element p^v u of Q_q carrying r relative digits (u a unit mod p^r).

    A zero is stored as u = 0 with v its absolute precision. Much lighter
    than PadicScalar, for linear algebra that stays inside the unramified
    field.
    """

    __slots__ = ("Z", "p", "v", "u", "r")

    def __init__(self, Z, p, v, u, r):
        self.Z, self.p, self.v, self.u, self.r = Z, p, v, u, r

    @classmethod
    def make(cls, Z, p, v, u, absprec):
        """Normalize p^v u known modulo p^absprec."""
        if absprec <= v:
            return cls(Z, p, absprec, Z.zero_elt, 0)
        u = Z.mod(u, p ** (absprec - v))
        if Z.is_zero(u):
            return cls(Z, p, absprec, Z.zero_elt, 0)
        t = Z.vp(u)
        if t:
            u = Z.exact_div(u, p**t)
            v += t
        return cls(Z, p, v, u, absprec - v)

    @classmethod
    def from_padic(cls, x: "PadicScalar") -> "QqFloat":
        if any(r for r in x.c):
            raise ValueError("element is not in Q_q")
        ctx = x.ctx
        Z = ctx.Z
        u = x.c.get(0, Z.zero)
        return cls.make(_qq_ring(Z), ctx.p, x.e, u, x.prec // ctx.M)

    def to_padic(self, ctx: "PrecisionContext") -> "PadicScalar":
        M = ctx.M
        if self.is_zero():
            return PadicScalar.make(ctx, {}, 0, min(ctx.cap, self.v * M))
        return PadicScalar.make(ctx, {0: self.u}, self.v, min(ctx.cap, (self.v + self.r) * M))

    def is_zero(self) -> bool:
        return not self.r

    @property
    def absprec(self) -> int:
        return self.v + self.r

    def __mul__(self, y):
        if not self.r or not y.r:
            return QqFloat(self.Z, self.p, self.v + y.v, self.Z.zero_elt, 0)
        r = min(self.r, y.r)
        Z = self.Z
        return QqFloat(Z, self.p, self.v + y.v, Z.mod(Z.mul(self.u, y.u), self.p**r), r)

    def __add__(self, y):
        if not y.r:
            if y.v >= self.v + self.r:
                return self
            return QqFloat.make(self.Z, self.p, self.v, self.u, y.v) if self.r else y
        if not self.r:
            if self.v >= y.v + y.r:
                return y
            return QqFloat.make(self.Z, self.p, y.v, y.u, self.v)
        Z, p = self.Z, self.p
        a = min(self.v + self.r, y.v + y.r)
        if self.v <= y.v:
            s = Z.add(self.u, Z.scale(y.u, p ** (y.v - self.v))) if y.v < a else self.u
            return QqFloat.make(Z, p, self.v, s, a)
        s = Z.add(y.u, Z.scale(self.u, p ** (self.v - y.v))) if self.v < a else y.u
        return QqFloat.make(Z, p, y.v, s, a)

    def __neg__(self):
        if not self.r:
            return self
        return QqFloat(self.Z, self.p, self.v, self.Z.neg(self.u), self.r)

    def __sub__(self, y):
        return self + (-y)

    def inverse(self) -> "QqFloat":
        if not self.r:
            raise NonUnitError("inverse of zero")
        Z, p, r = self.Z, self.p, self.r
        return QqFloat(Z, p, -self.v, Z.unit_inverse(self.u, r), r)

    def __repr__(self):
        return f"QqFloat({self.u} p^{self.v} + O(p^{self.v + self.r}))" if self.r else f"O(p^{self.v})"


class _QqRing:
    """Ring helpers for QqFloat on top of _Zp / _Zq."""

    def __init__(self, Z, p, q):
        self.base, self.p, self.q = Z, p, q
        self.zero_elt = Z.zero if hasattr(Z, "zero") else 0
        for name in ("add", "neg", "mul", "scale", "mod", "vp", "is_zero", "exact_div"):
            setattr(self, name, getattr(Z, name))

    def unit_inverse(self, u, r):
        Z, p = self.base, self.p
        if isinstance(u, int):
            return pow(u, -1, p**r)
        # u^(q-2) inverts modulo p, then Newton doubles the precision
        x, e, base = Z.one, self.q - 2, Z.mod(u, p)
        while e:
            if e & 1:
                x = Z.mod(Z.mul(x, base), p)
            base = Z.mod(Z.mul(base, base), p)
            e >>= 1
        k = 1
        two = Z.from_int(2)
        while k < r:
            k = min(2 * k, r)
            x = Z.mod(Z.mul(x, Z.sub(two, Z.mul(u, x))), p**k)
        return x


_QQ_RINGS: dict = {}


def _qq_ring(Z) -> _QqRing:
    ring = _QQ_RINGS.get(id(Z))
    if ring is None or ring.base is not Z:
        a = getattr(Z, "a", 1)
        ring = _QQ_RINGS[id(Z)] = _QqRing(Z, Z.p, Z.p**a)
    return ring


def qq_zero(ctx: "PrecisionContext", absprec: int) -> QqFloat:
    R = _qq_ring(ctx.Z)
    return QqFloat(R, ctx.p, absprec, R.zero_elt, 0)


def qq_int(ctx: "PrecisionContext", n: int, absprec: int) -> QqFloat:
    R = _qq_ring(ctx.Z)
    return QqFloat.make(R, ctx.p, 0, ctx.Z.from_int(n), absprec)


def frobenius_of_t(ctx: PrecisionContext):
    """The lift sigma(t) in Z_q of t^p: the root of f congruent to t^p (Hensel)."""
    key = (ctx.p, ctx.a, ctx.F.modulus, ctx.N)
    if key in _FROB_CACHE:
        return _FROB_CACHE[key]
    Z, p = ctx.Z, ctx.p
    m = ctx.ppow(ctx.N + 2)
    t = tuple([0, 1] + [0] * (ctx.a - 2))
    y = Z.one
    for _ in range(p):
        y = Z.mod(Z.mul(y, t), m)
    # Newton on f(y) = 0 in Z_q; f'(y) is a unit since f is separable mod p
    f = ctx.F.modulus
    for _ in range(ctx.N.bit_length() + 3):
        fy, dfy, pw = Z.zero, Z.zero, Z.one
        for i, c in enumerate(f):
            fy = Z.add(fy, Z.scale(pw, c))
            pw = Z.mod(Z.mul(pw, y), m)
        pw = Z.one
        for i in range(1, len(f)):
            dfy = Z.add(dfy, Z.scale(pw, i * f[i]))
            pw = Z.mod(Z.mul(pw, y), m)
        inv = PadicScalar.make(ctx, {0: dfy}, 0, ctx.cap + ctx.M).inv()
        step = Z.mul(fy, inv.c.get(0, Z.zero))
        y = Z.mod(Z.sub(y, step), m)
    _FROB_CACHE[key] = y
    return y


def teichmuller_lift(ctx: PrecisionContext, x: int) -> PadicScalar:
    """Teichmuller representative of x in F_q (x encoded as an int)."""
    return _teich_table(ctx)[x]


_TEICH: dict = {}


def _teich_table(ctx: PrecisionContext):
    key = (ctx.p, ctx.a, ctx.F.modulus, ctx.N, ctx.M)
    if key not in _TEICH:
        F, Z = ctx.F.field, ctx.Z
        q = ctx.q
        table = []
        for x in range(q):
            coeffs = F.to_coeffs(x)
            y = PadicScalar.make(ctx, {0: coeffs[0] if ctx.a == 1 else tuple(coeffs)}, 0, ctx.cap)
            # y <- y^q converges to the root of unity: error shrinks by p per step
            for _ in range(ctx.N + 1):
                y = y**q
            table.append(y)
        _TEICH[key] = table
    return _TEICH[key]


@dataclass
class GammaTable:
    gamma: PadicScalar
    gamma_l: list[PadicScalar]
    pi_dwork: PadicScalar

    def bound(self, l: int) -> Fraction:
        p = self.gamma.ctx.p
        return Fraction(p ** (l + 1), p - 1) - (l + 1)


_GAMMA: dict = {}


def compute_gamma(ctx: PrecisionContext) -> GammaTable:
    """Dwork's gamma: the root of sum t^{p^n}/p^n with val 1/(p-1), by Newton."""
    key = (ctx.p, ctx.a, ctx.F.modulus, ctx.N, ctx.M)
    if key in _GAMMA:
        return _GAMMA[key]
    p, M = ctx.p, ctx.M
    if M % (p - 1):
        raise ValueError("M must be divisible by p - 1")
    # L: discarded terms t^{p^n}/p^n have valuation p^n/(p-1) - n >= N
    L = 0
    while Fraction(p ** (L + 1), p - 1) - (L + 1) < ctx.N + 1:
        L += 1
    # dividing by p^n costs n digits, so work with L + 1 guard digits
    wide = ctx.with_precision(ctx.N + L + 1)
    pi_d = wide.pi_power(M // (p - 1))  # pi_d^(p-1) = -p

    def f_and_df(t):
        f, df = wide.zero(), wide.zero()
        tp = t
        for n in range(L + 1):
            f = f + tp.shift(-n)
            df = df + tp / t
            tp = tp**p
        return f, df

    g = pi_d
    for _ in range(2 * (wide.cap.bit_length() + 2)):
        f, df = f_and_df(g)
        if f.is_zero():
            break
        g = g - f / df
    f, _ = f_and_df(g)
    if f._floor() < ctx.cap:
        raise ArithmeticError("Newton iteration for gamma did not converge")
    if g.val() != Fraction(1, p - 1):
        raise ArithmeticError("gamma has the wrong valuation")
    # gamma_l = sum_{i<=l} gamma^{p^i}/p^i, up to the first index past precision
    table = []
    acc, gp = wide.zero(), g
    l = 0
    while True:
        acc = acc + gp.shift(-l)
        table.append(acc.to_ctx(ctx))
        if Fraction(p ** (l + 1), p - 1) - (l + 1) >= ctx.N:
            break
        gp = gp**p
        l += 1
    g, pi_d = g.to_ctx(ctx), pi_d.to_ctx(ctx)
    out = GammaTable(g, table, pi_d)
    _GAMMA[key] = out
    return out
