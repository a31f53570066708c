"""Finite fields F_{p^e}, polynomials over F_q and brute-force point counts.

Field elements are plain integers in ``range(p**e)``: the base-p digits of the
integer are the coefficients (low degree first) of the residue polynomial
modulo the defining modulus.  Every arithmetic helper accepts either Python
ints or numpy integer arrays, so enumeration code is vectorised.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

DEFAULT_CEILING = 10**8


class FieldError(ValueError):
    pass


class EnumerationCeilingError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the configured ceiling."""


class ZetaRecoveryError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# --- dense polynomials over F_p, coefficient lists low -> high -------------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = list(a)
    dm = len(m) - 1
    inv = pow(m[-1], -1, p)
    while len(_ptrim(a)) - 1 >= dm:
        c = a[-1] * inv % p
        s = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[s + i] = (a[s + i] - c * mi) % p
    return a


def _pmulmod(a, b, m, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, m, p)


def _ppowmod(a, e, m, p):
    result, base = [1], _pmod(a, m, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
        _ptrim(b)
    return a


def is_irreducible(modulus: list[int], p: int) -> bool:
    """Rabin's test for a polynomial over F_p (coefficients low -> high)."""
    f = _ptrim([c % p for c in modulus])
    e = len(f) - 1
    if e < 1:
        return False
    if e == 1:
        return True
    x = [0, 1]

    def frob_power(k):
        return _ppowmod(x, p**k, f, p)

    xe = frob_power(e)
    diff = _ptrim([(c - d) % p for c, d in itertools.zip_longest(xe, x, fillvalue=0)])
    if diff:
        return False
    for r in _prime_factors(e):
        xr = frob_power(e // r)
        diff = _ptrim([(c - d) % p for c, d in itertools.zip_longest(xr, x, fillvalue=0)])
        g = _pgcd(f, diff, p) if diff else f
        if len(g) - 1 > 0:
            return False
    return True


@lru_cache(maxsize=None)
def least_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree ``e`` over F_p.

    Candidates are ordered by their lower coefficients read from the top
    (x^e + c_{e-1} x^{e-1} + ... + c_0 with (c_{e-1}, ..., c_0) increasing).
    """
    if e == 1:
        return (0, 1)
    for lower in itertools.product(range(p), repeat=e):
        coeffs = list(reversed(lower)) + [1]
        if coeffs[0] == 0:
            continue
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise FieldError(f"no irreducible polynomial of degree {e} over F_{p}")


class FiniteField:
    """F_{p^e} = F_p[t]/(modulus) with log/antilog tables."""

    def __init__(self, p: int, e: int, modulus=None):
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        if e < 1:
            raise FieldError("extension degree must be positive")
        if modulus is None:
            modulus = least_irreducible(p, e)
        modulus = [c % p for c in modulus]
        if len(_ptrim(list(modulus))) - 1 != e:
            raise FieldError(f"modulus must have degree {e}")
        if not is_irreducible(modulus, p):
            raise FieldError("modulus is reducible")
        inv_lead = pow(modulus[-1], -1, p)
        self.modulus = tuple(c * inv_lead % p for c in modulus)
        self.p, self.e = p, e
        self.order = p**e
        self._pow = np.array([p**i for i in range(e)], dtype=np.int64)
        self._build_tables()

    def __repr__(self):
        return f"FiniteField({self.p}^{self.e})"

    # integer <-> coefficient vector
    def to_coeffs(self, x: int) -> list[int]:
        return [(x // self.p**i) % self.p for i in range(self.e)]

    def from_coeffs(self, coeffs) -> int:
        coeffs = list(coeffs) + [0] * (self.e - len(coeffs))
        if len(coeffs) > self.e:
            raise FieldError("too many coefficients")
        return sum((c % self.p) * self.p**i for i, c in enumerate(coeffs))

    def _mul_slow(self, x: int, y: int) -> int:
        prod = _pmulmod(self.to_coeffs(x), self.to_coeffs(y), list(self.modulus), self.p)
        return self.from_coeffs(prod)

    def _build_tables(self):
        q = self.order
        exp = np.zeros(q - 1, dtype=np.int64)
        # deterministic generator search: smallest element of order q - 1
        for g in range(1, q):
            if g == 1 and q > 2:
                continue
            x, ok = 1, True
            for i in range(q - 1):
                exp[i] = x
                x = self._mul_slow(x, g)
                if x == 1 and i < q - 2:
                    ok = False
                    break
            if ok:
                self.generator = g
                break
        else:  # pragma: no cover
            raise FieldError("no generator found")
        log = np.full(q, -1, dtype=np.int64)
        log[exp] = np.arange(q - 1)
        self._exp, self._log = exp, log

    # --- vectorised arithmetic ------------------------------------------
    def add(self, x, y):
        if self.e == 1:
            return (x + y) % self.p
        out = 0
        for i in range(self.e):
            w = self.p**i
            out = out + (((x // w) + (y // w)) % self.p) * w
        return out

    def neg(self, x):
        if self.e == 1:
            return (-x) % self.p
        out = 0
        for i in range(self.e):
            w = self.p**i
            out = out + ((-(x // w)) % self.p) * w
        return out

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        if isinstance(x, (int, np.integer)) and isinstance(y, (int, np.integer)):
            if x == 0 or y == 0:
                return 0
            return int(self._exp[(self._log[x] + self._log[y]) % (self.order - 1)])
        x = np.asarray(x)
        y = np.asarray(y)
        lx, ly = self._log[x], self._log[y]
        r = self._exp[(lx + ly) % (self.order - 1)]
        return np.where((x == 0) | (y == 0), 0, r)

    def pow(self, x, n: int):
        if isinstance(x, (int, np.integer)):
            if x == 0:
                return 1 if n == 0 else 0
            return int(self._exp[(self._log[x] * n) % (self.order - 1)])
        x = np.asarray(x)
        r = self._exp[(self._log[x] * n) % (self.order - 1)]
        if n == 0:
            return np.ones_like(x)
        return np.where(x == 0, 0, r)

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return int(self._exp[(-self._log[x]) % (self.order - 1)])

    def elements(self):
        return range(self.order)

    def from_int(self, n: int) -> int:
        return n % self.p


@dataclass(frozen=True)
class FieldCtx:
    """F_q with q = p^a together with its defining data."""

    p: int
    a: int
    q: int
    modulus: tuple[int, ...]
    generator: int
    field: FiniteField = field(repr=False, compare=False)


def make_field(p: int, a: int = 1, modulus=None) -> FieldCtx:
    if not is_prime(p) or p == 2:
        raise FieldError(f"p must be an odd prime, got {p}")
    F = FiniteField(p, a, modulus)
    return FieldCtx(p, a, p**a, F.modulus, F.generator, F)


@lru_cache(maxsize=None)
def _extension(p: int, a: int, modulus: tuple[int, ...], m: int):
    """F_{q^m} plus the embedding table F_q -> F_{q^m} and its inverse."""
    base = FiniteField(p, a, modulus)
    ext = FiniteField(p, a * m) if m > 1 else base
    if m == 1:
        emb = np.arange(base.order, dtype=np.int64)
    else:
        # smallest root of the F_q modulus in F_{q^m}
        root = None
        for r in range(ext.order):
            acc = 0
            for c in reversed(modulus):
                acc = ext.add(ext.mul(acc, r), c)
            if acc == 0:
                root = r
                break
        if root is None:  # pragma: no cover
            raise FieldError("embedding root not found")
        emb = np.zeros(base.order, dtype=np.int64)
        for x in range(base.order):
            acc = 0
            for c in reversed(base.to_coeffs(x)):
                acc = ext.add(ext.mul(acc, root), c)
            emb[x] = acc
    back = {int(v): i for i, v in enumerate(emb)}
    return base, ext, emb, back


def extension_field(F: FieldCtx, m: int):
    """Return ``(F_{q^m}, embed)`` where ``embed`` is an index array F_q -> F_{q^m}."""
    _, ext, emb, _ = _extension(F.p, F.a, F.modulus, m)
    return ext, emb


def trace_to_base(F: FieldCtx, m: int, z):
    """Tr_{q^m/q}(z) = z + z^q + ... + z^{q^{m-1}}, returned as F_q elements."""
    _, ext, emb, back = _extension(F.p, F.a, F.modulus, m)
    acc = 0 if np.isscalar(z) else np.zeros_like(np.asarray(z))
    for i in range(m):
        acc = ext.add(acc, ext.pow(z, F.q**i))
    if np.isscalar(acc) or np.ndim(acc) == 0:
        return back[int(acc)]
    lookup = np.full(ext.order, -1, dtype=np.int64)
    for k, v in back.items():
        lookup[k] = v
    out = lookup[np.asarray(acc)]
    if (out < 0).any():  # pragma: no cover
        raise FieldError("trace left the base field")
    return out


# --- polynomials and varieties --------------------------------------------

Term = tuple[int, tuple[int, ...]]  # (F_q coefficient, exponent vector)


@dataclass(frozen=True)
class VarietySpec:
    """Complete intersection G_1 = ... = G_k = 0 in P^n over F_q."""

    F: FieldCtx
    n: int
    polys: tuple[tuple[Term, ...], ...]

    @property
    def k(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sum(poly[0][1]) for poly in self.polys)

    @property
    def N(self) -> int:
        return self.n + self.k + 1

    def __post_init__(self):
        clean = []
        for poly in self.polys:
            acc: dict[tuple[int, ...], int] = {}
            for c, e in poly:
                e = tuple(int(x) for x in e)
                if len(e) != self.n + 1 or min(e) < 0:
                    raise FieldError(f"bad exponent vector {e}")
                acc[e] = self.F.field.add(acc.get(e, 0), int(c) % self.F.q)
            terms = tuple(sorted((c, e) for e, c in acc.items() if c))
            if not terms:
                raise FieldError("defining polynomial is identically zero")
            if len({sum(e) for _, e in terms}) != 1:
                raise FieldError("defining polynomial is not homogeneous")
            clean.append(tuple((c, e) for c, e in sorted(terms, key=lambda t: t[1])))
        object.__setattr__(self, "polys", tuple(clean))
        if not (self.n >= self.k >= 1):
            raise FieldError("need n >= k >= 1")

    def potential_terms(self) -> list[Term]:
        """Monomials of S(z) = sum_l y_l G_l(x) in z = (y_1..y_k, x_0..x_n)."""
        out = []
        for l, poly in enumerate(self.polys):
            for c, e in poly:
                y = [0] * self.k
                y[l] = 1
                out.append((c, tuple(y) + tuple(e)))
        return out

    def to_json(self) -> dict:
        F = self.F.field
        return {
            "p": self.F.p,
            "a": self.F.a,
            "modulus": list(self.F.modulus),
            "n": self.n,
            "polys": [[{"c": F.to_coeffs(c), "e": list(e)} for c, e in poly] for poly in self.polys],
        }

    @classmethod
    def from_json(cls, data: dict, F: FieldCtx | None = None) -> "VarietySpec":
        if F is None:
            F = make_field(int(data["p"]), int(data.get("a", 1)), data.get("modulus"))
        polys = []
        for poly in data["polys"]:
            terms = []
            for t in poly:
                c = t["c"]
                c = F.field.from_coeffs([int(x) for x in c]) if isinstance(c, list) else int(c) % F.q
                terms.append((c, tuple(int(x) for x in t["e"])))
            polys.append(tuple(terms))
        return cls(F, int(data["n"]), tuple(polys))


def variety(F: FieldCtx, n: int, *polys) -> VarietySpec:
    """Convenience constructor taking dicts ``{exponent: coefficient}``."""
    return VarietySpec(F, n, tuple(tuple((c, e) for e, c in poly.items()) for poly in polys))


def _eval_poly(ext: FiniteField, emb, poly, coords):
    """Evaluate a polynomial with F_q coefficients on arrays of F_{q^m} points."""
    shape = coords[0].shape
    total = np.zeros(shape, dtype=np.int64)
    for c, e in poly:
        term = np.full(shape, int(emb[c]), dtype=np.int64)
        for x, k in zip(coords, e):
            if k:
                term = ext.mul(term, ext.pow(x, k))
        total = ext.add(total, term)
    return total


def _chunks(total: int, size: int):
    start = 0
    while start < total:
        yield start, min(total, start + size)
        start += size


def _coords(lo, hi, Q, nvars):
    idx = np.arange(lo, hi, dtype=np.int64)
    out = []
    for _ in range(nvars):
        out.append(idx % Q)
        idx = idx // Q
    return out


def count_points(V: VarietySpec, m: int = 1, ceiling: int = DEFAULT_CEILING,
                 threads: int = 1, chunk: int = 1 << 18) -> tuple[int, int]:
    """Affine cone count |Y(F_{q^m})| and projective count |X(F_{q^m})|."""
    ext, emb = extension_field(V.F, m)
    Q = ext.order
    total = Q ** (V.n + 1)
    if total > ceiling:
        raise EnumerationCeilingError(
            f"enumeration ceiling: {total} points exceeds ceiling {ceiling}")

    def work(bounds):
        lo, hi = bounds
        coords = _coords(lo, hi, Q, V.n + 1)
        mask = np.ones(hi - lo, dtype=bool)
        for poly in V.polys:
            mask &= _eval_poly(ext, emb, poly, coords) == 0
        return int(mask.sum())

    ranges = list(_chunks(total, chunk))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            affine = sum(pool.map(work, ranges))
    else:
        affine = sum(map(work, ranges))
    if (affine - 1) % (Q - 1):
        raise FieldError("affine count violates (|Y| - 1) divisible by (q^m - 1)")
    return affine, (affine - 1) // (Q - 1)


@dataclass
class PointCounts:
    q: int
    affine: dict[int, int] = field(default_factory=dict)
    projective: dict[int, int] = field(default_factory=dict)

    def add(self, m: int, affine: int, projective: int):
        if projective * (self.q**m - 1) + 1 != affine:
            raise FieldError("projective/affine counts are inconsistent")
        self.affine[m] = affine
        self.projective[m] = projective

    def to_json(self) -> list[dict]:
        return [{"m": m, "affine": str(self.affine[m]), "projective": str(self.projective[m])}
                for m in sorted(self.affine)]

    @classmethod
    def from_json(cls, q: int, rows: list[dict]) -> "PointCounts":
        out = cls(q)
        for r in rows:
            out.add(int(r["m"]), int(r["affine"]), int(r["projective"]))
        return out


def point_counts(V: VarietySpec, B: int, ceiling: int = DEFAULT_CEILING, threads: int = 1) -> PointCounts:
    out = PointCounts(V.F.q)
    for m in range(1, B + 1):
        out.add(m, *count_points(V, m, ceiling, threads))
    return out


def smoothness_check(V: VarietySpec, m: int = 1, ceiling: int = DEFAULT_CEILING) -> list[tuple[int, ...]]:
    """Soft smoothness probe: F_{q^m}-points of X where the Jacobian has rank < k.

    An empty list does not certify smoothness; it only means no singular
    point was found among the enumerated rational points.
    """
    ext, emb = extension_field(V.F, m)
    Q = ext.order
    if Q ** (V.n + 1) > ceiling:
        raise EnumerationCeilingError("enumeration ceiling")
    Fq = V.F.field
    partials = []
    for poly in V.polys:
        row = []
        for j in range(V.n + 1):
            d = []
            for c, e in poly:
                if e[j]:
                    cc = 0
                    for _ in range(e[j] % V.F.p):
                        cc = Fq.add(cc, c)
                    if cc:
                        d.append((cc, e[:j] + (e[j] - 1,) + e[j + 1:]))
            row.append(d)
        partials.append(row)
    bad = []
    coords = _coords(0, Q ** (V.n + 1), Q, V.n + 1)
    mask = np.ones(coords[0].shape, dtype=bool)
    for poly in V.polys:
        mask &= _eval_poly(ext, emb, poly, coords) == 0
    mask[0] = False  # origin
    pts = np.nonzero(mask)[0]
    for idx in pts:
        pt = [np.array([c[idx]]) for c in coords]
        mat = [[int(_eval_poly(ext, emb, d, pt)[0]) if d else 0 for d in row] for row in partials]
        if _rank(ext, mat) < V.k:
            bad.append(tuple(int(c[0]) for c in pt))
    return bad


def _rank(F: FiniteField, mat) -> int:
    mat = [list(r) for r in mat]
    rank, cols = 0, len(mat[0]) if mat else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = F.inv(mat[rank][c])
        mat[rank] = [F.mul(inv, x) for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [F.sub(x, F.mul(f, y)) for x, y in zip(mat[r], mat[rank])]
        rank += 1
    return rank


# --- zeta functions from point counts --------------------------------------

def expected_degree(n: int, degrees) -> int:
    """Primitive middle Betti number of a smooth complete intersection.

    Euler characteristic from the Chern class generating function, then
    deg P = (-1)^(n-k) (chi - (n-k+1)).
    """
    k = len(degrees)
    w = n - k
    # coefficient of h^w in (1+h)^(n+1) / prod(1 + d h)
    series = [Fraction(math.comb(n + 1, i)) for i in range(w + 1)]
    for d in degrees:
        inv = [Fraction((-d) ** i) for i in range(w + 1)]
        series = [sum(series[j] * inv[i - j] for j in range(i + 1)) for i in range(w + 1)]
    chi = series[w] * math.prod(degrees)
    return int((-1) ** w * (chi - (w + 1)))


@dataclass
class ZetaOutput:
    P: list[int]
    n: int
    k: int
    q: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def exponent(self) -> int:
        return (-1) ** (self.n - self.k - 1)

    def zeta_string(self) -> str:
        w = self.n - self.k
        poly = " + ".join(
            (f"{c}" if i == 0 else f"{c}*T" if i == 1 else f"{c}*T^{i}")
            for i, c in enumerate(self.P) if c) or "0"
        den = "".join("(1-T)" if i == 0 else f"(1-{self.q**i}T)" for i in range(w + 1))
        return f"({poly})^{self.exponent}/({den})"

    def to_json(self) -> dict:
        return {"P": [str(c) for c in self.P], "zeta": self.zeta_string(),
                "diagnostics": self.diagnostics}

    def projective_count(self, m: int) -> int:
        """|X(F_{q^m})| implied by the zeta function (via Newton's identities)."""
        w = self.n - self.k
        s = _power_sums(self.P, m)[m]
        return sum(self.q ** (i * m) for i in range(w + 1)) - self.exponent * s


def _power_sums(P: list[int], upto: int) -> list[int]:
    """s_m = sum alpha_i^m for P(T) = prod(1 - alpha_i T)."""
    c = [Fraction(x) for x in P] + [Fraction(0)] * (upto + 1)
    # log P(T) = -sum s_m T^m / m ; P'/P = -sum s_m T^{m-1}
    s = [0] * (upto + 1)
    for m in range(1, upto + 1):
        acc = -m * c[m]
        for j in range(1, m):
            acc -= c[j] * s[m - j]
        s[m] = acc
    return [int(x) for x in s]


def _series_mul(a, b, n):
    out = [Fraction(0)] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def _series_exp(f, n):
    # f[0] == 0; E' = f' E
    e = [Fraction(0)] * (n + 1)
    e[0] = Fraction(1)
    for m in range(1, n + 1):
        e[m] = sum(i * f[i] * e[m - i] for i in range(1, m + 1)) / m
    return e


def _series_inv(a, n):
    out = [Fraction(0)] * (n + 1)
    out[0] = 1 / a[0]
    for m in range(1, n + 1):
        out[m] = -sum(a[i] * out[m - i] for i in range(1, min(m, len(a) - 1) + 1)) / a[0]
    return out


def zeta_from_counts(counts: PointCounts, n: int, k: int, degree: int | None = None,
                     degrees=None) -> ZetaOutput:
    """Recover P(T) from projective counts |X(F_{q^m})|, m = 1..B.

    The degree of P is taken from ``degree`` or computed from the
    multidegree; coefficients beyond the counted range come from the
    functional equation, and every supplied count is re-checked.
    """
    q = counts.q
    w = n - k
    B = max(counts.projective) if counts.projective else 0
    if sorted(counts.projective) != list(range(1, B + 1)):
        raise ZetaRecoveryError("counts must be given for m = 1..B")
    if degree is None:
        if degrees is None:
            raise ZetaRecoveryError("need the degree of P or the multidegree")
        degree = expected_degree(n, degrees)
    d = degree
    logz = [Fraction(0)] + [Fraction(counts.projective[m], m) for m in range(1, B + 1)]
    Z = _series_exp(logz, B)
    den = [Fraction(1)]
    for i in range(w + 1):
        den = _series_mul(den, [Fraction(1), Fraction(-(q**i))], B)
    Pe = _series_mul(Z, den, B)
    eps = (-1) ** (w - 1)
    low = Pe if eps == 1 else _series_inv(Pe, B)
    if any(x.denominator != 1 for x in low):
        raise ZetaRecoveryError("counts are inconsistent with an integer polynomial")
    low = [int(x) for x in low]
    if B >= d:
        if any(low[d + 1:]):
            raise ZetaRecoveryError("counts are inconsistent with deg P = %d" % d)
        candidates = [low[: d + 1]]
    else:
        half = d // 2
        if B < half:
            raise ZetaRecoveryError(f"need at least {half} counts for deg P = {d}")
        signs = [1] if w % 2 == 1 else [1, -1]
        candidates = []
        for sign in signs:
            if w % 2 == 1 and d % 2:
                raise ZetaRecoveryError("odd degree P with odd weight")
            P = [0] * (d + 1)
            for j in range(half + 1):
                P[j] = low[j]
            ok = True
            for j in range(half + 1):
                # c_{d-j} = sign * q^{w(d-2j)/2} * c_j
                expo = w * (d - 2 * j)
                if expo % 2:
                    ok = False
                    break
                c = sign * P[j] * q ** (expo // 2)
                if j < d - j:
                    P[d - j] = c
                elif c != P[j]:
                    ok = False
                    break
            if ok:
                candidates.append(P)
    good = []
    for P in candidates:
        z = ZetaOutput(P, n, k, q)
        if all(z.projective_count(m) == counts.projective[m] for m in range(1, B + 1)):
            good.append(P)
    if len(good) != 1:
        raise ZetaRecoveryError(
            "counts do not determine a unique integer polynomial" if good else
            "counts are inconsistent with any integer polynomial of the expected shape")
    out = ZetaOutput(good[0], n, k, q, {"counts_used": B, "degree": d})
    out.diagnostics["weil_check"] = weil_check(out.P, q, w)
    return out


def weil_check(P: list[int], q: int, w: int, tol: float = 1e-6) -> bool:
    """Numerical check |alpha|^2 = q^w for the reciprocal roots of P."""
    if len(P) <= 1:
        return True
    # reciprocal roots are the roots of T^d P(1/T)
    roots = np.roots([float(c) for c in P])
    return bool(np.all(np.abs(np.abs(roots) ** 2 - q**w) <= tol * q**w))


def exp_sum(V: VarietySpec, m: int, ctx=None, ceiling: int = DEFAULT_CEILING, chunk: int = 1 << 18):
    """sum over z in A^N(F_{q^m}) of psi_q(Tr S(z)) as a p-adic scalar.

    The histogram of trace values is built by exhaustive enumeration of all
    N = n + k + 1 coordinates; the character values come from the Dwork
    splitting function stack in :mod:`dwork_bv.dwork_series`.
    """
    from .dwork_series import psi_table
    from .padic import choose_parameters

    if ctx is None:
        ctx = choose_parameters(V.F.p, V.F.a, field=V.F)
    ext, emb = extension_field(V.F, m)
    Q = ext.order
    total = Q**V.N
    if total > ceiling:
        raise EnumerationCeilingError(f"enumeration ceiling: {total} > {ceiling}")
    terms = V.potential_terms()
    hist = np.zeros(V.F.q, dtype=np.int64)
    for lo, hi in _chunks(total, chunk):
        coords = _coords(lo, hi, Q, V.N)
        s = _eval_poly(ext, emb, terms, coords)
        tr = trace_to_base(V.F, m, s)
        hist += np.bincount(tr, minlength=V.F.q)
    psi = psi_table(ctx)
    acc = ctx.zero()
    for t, cnt in enumerate(hist):
        if cnt:
            acc = acc + psi[t] * int(cnt)
    return acc
