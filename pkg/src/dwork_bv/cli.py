"""Command-line front end: JSON jobs in, deterministic JSON reports out.

Exit codes: 0 success, 2 precision floor failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .ffield import (
    DEFAULT_CEILING,
    EnumerationCeilingError,
    FieldError,
    VarietySpec,
    ZetaRecoveryError,
    expected_degree,
    make_field,
    point_counts,
    smoothness_check,
    zeta_from_counts,
)
from .padic import PrecisionContext, PrecisionError, choose_parameters

log = logging.getLogger(__name__)

COMMANDS = ("zeta", "count", "charpoly", "verify", "params")
EXIT_OK, EXIT_PRECISION, EXIT_VALIDATION = 0, 2, 3


class ValidationError(ValueError):
    pass


def _int(x, name):
    if x is None:
        return None
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ValidationError(f"{name} must be a decimal integer string")
    try:
        return int(x)
    except ValueError:
        raise ValidationError(f"{name} must be a decimal integer string") from None


@dataclass
class JobSpec:
    p: int
    a: int
    n: int
    polys: list  # [[(coefficient, exponent tuple)]], coefficients as ints or coefficient lists
    modulus: list | None = None
    command: str = "zeta"
    overrides: dict = field(default_factory=dict)  # b, M, N, D, ceiling, floor

    @classmethod
    def from_json(cls, data: dict) -> "JobSpec":
        if not isinstance(data, dict):
            raise ValidationError("job must be a JSON object")
        try:
            fld, var = data["field"], data["variety"]
            p, a = _int(fld["p"], "field.p"), _int(fld.get("a", "1"), "field.a")
            n = _int(var["n"], "variety.n")
            polys = []
            for poly in var["polys"]:
                terms = []
                for t in poly:
                    c = t["c"]
                    c = [_int(x, "c") for x in c] if isinstance(c, list) else _int(c, "c")
                    terms.append((c, tuple(_int(x, "e") for x in t["e"])))
                polys.append(terms)
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed job: missing or bad field {e}") from None
        modulus = fld.get("modulus")
        if modulus is not None:
            modulus = [_int(x, "modulus") for x in modulus]
        ov = {}
        for k, v in (data.get("overrides") or {}).items():
            if k not in ("b", "M", "N", "D", "ceiling", "floor"):
                raise ValidationError(f"unknown override {k}")
            if v is None:
                continue
            ov[k] = str(Fraction(v)) if k == "b" else _int(v, k)
        cmd = data.get("command", "zeta")
        if cmd not in COMMANDS:
            raise ValidationError(f"unknown command {cmd}")
        return cls(p, a, n, polys, modulus, cmd, ov)

    def to_json(self) -> dict:
        def coef(c):
            return [str(x) for x in c] if isinstance(c, list) else str(c)

        return {
            "command": self.command,
            "field": {"p": str(self.p), "a": str(self.a),
                      "modulus": None if self.modulus is None else [str(x) for x in self.modulus]},
            "variety": {"n": str(self.n),
                        "polys": [[{"c": coef(c), "e": [str(x) for x in e]} for c, e in poly] for poly in self.polys]},
            "overrides": {k: str(v) for k, v in sorted(self.overrides.items())},
        }

    def variety(self) -> VarietySpec:
        try:
            F = make_field(self.p, self.a, self.modulus)
            data = {"n": self.n, "polys": [[{"c": c, "e": list(e)} for c, e in poly] for poly in self.polys]}
            return VarietySpec.from_json(data, F)
        except FieldError as e:
            raise ValidationError(str(e)) from None

    def context(self, V: VarietySpec) -> PrecisionContext:
        from .frobenius import _default_precision, default_D

        ov = self.overrides
        N = ov.get("N") or _default_precision(V, expected_degree(V.n, V.degrees))
        ctx = choose_parameters(V.F.p, V.F.a, target_precision=N, field=V.F)
        if "b" in ov or "M" in ov:
            p = V.F.p
            b = Fraction(ov.get("b", str(ctx.b)))
            M = ov.get("M", ctx.M)
            if not Fraction(1, p - 1) < b < Fraction(p, p - 1):
                raise ValidationError("b must lie strictly between 1/(p-1) and p/(p-1)")
            if M % (p * (p - 1)) or (M * b / (p * (p - 1))).denominator != 1:
                raise ValidationError("M must be a multiple of p(p-1) with M b/(p(p-1)) integral")
            ctx = PrecisionContext(p, V.F.a, b, M, N, ctx.D, V.F)
        D = ov.get("D") or default_D(V, ctx)
        return ctx.with_precision(N, D)


@dataclass
class Report:
    command: str
    job: dict
    exit_code: int
    result: dict = field(default_factory=dict)
    reason: str | None = None
    timing: dict = field(default_factory=dict)

    def body(self) -> dict:
        return {"command": self.command, "job": self.job, "exit_code": self.exit_code,
                "status": "ok" if self.exit_code == 0 else "error",
                "reason": self.reason, "result": self.result}

    def to_json(self, timing: bool = True) -> dict:
        out = self.body()
        if timing:
            out["timing"] = self.timing
        return out

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        return cls(data["command"], data["job"], data["exit_code"], data.get("result", {}),
                   data.get("reason"), data.get("timing", {}))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, type(None), str)):
        return x
    if isinstance(x, int):
        return str(x)
    return str(x)


def _count_bound(V: VarietySpec) -> int:
    d = expected_degree(V.n, V.degrees)
    w = V.n - V.k
    return max(1, d // 2 if w % 2 else d)


def _counts_feasible(V: VarietySpec, B: int, ceiling: int) -> bool:
    return V.F.q ** (B * (V.n + 1)) <= ceiling


# --------------------------------------------------------------------------
# commands


def cmd_params(job: JobSpec, V: VarietySpec, ctx: PrecisionContext, args) -> dict:
    return {"p": ctx.p, "a": ctx.a, "q": ctx.q, "b": str(ctx.b), "M": ctx.M, "N": ctx.N, "D": ctx.D,
            "expected_degree": expected_degree(V.n, V.degrees)}


def cmd_count(job: JobSpec, V: VarietySpec, ctx: PrecisionContext, args) -> dict:
    B = _count_bound(V)
    counts = point_counts(V, B, ceiling=args.ceiling, threads=args.threads)
    z = zeta_from_counts(counts, V.n, V.k, degrees=V.degrees)
    return {"counts": counts.to_json(), "P": [str(c) for c in z.P], "zeta": z.zeta_string()}


def cmd_zeta(job: JobSpec, V: VarietySpec, ctx: PrecisionContext, args) -> dict:
    from .frobenius import zeta_via_frobenius

    z = zeta_via_frobenius(V, ctx, ctx.D, floor=int(job.overrides.get("floor", 1)))
    out = z.to_json()
    B = _count_bound(V)
    if _counts_feasible(V, B, args.ceiling):
        c = zeta_from_counts(point_counts(V, B, ceiling=args.ceiling, threads=args.threads), V.n, V.k,
                             degrees=V.degrees)
        out["counts_P"] = [str(x) for x in c.P]
        out["counts_match"] = c.P == z.P
    else:
        out["counts_match"] = None
    return out


def cmd_charpoly(job: JobSpec, V: VarietySpec, ctx: PrecisionContext, args) -> dict:
    from .frobenius import char_poly_psi_S

    cp, h = char_poly_psi_S(V, ctx, ctx.D, int(job.overrides.get("floor", 1)))
    coeffs = []
    for c in cp.coeffs:
        coeffs.append({"value": str(c.to_fraction()) if not any(r for r in c.c) else c.to_json(),
                       "abs_precision": str(c.prec // ctx.M)})
    return {"dim_H0": h.dim, "N_eff": cp.N_eff, "D": h.D, "det_1_minus_T_psi": coeffs}


def cmd_verify(job: JobSpec, V: VarietySpec, ctx: PrecisionContext, args) -> dict:
    rows = verification_suite(V, ctx, seed=0)
    return {"checks": rows, "all_pass": all(r["pass"] for r in rows)}


def verification_suite(V: VarietySpec, ctx: PrecisionContext, seed: int = 0, samples: int = 5) -> list[dict]:
    """Quick invariant checks from every module; each row carries its residual."""
    from .complex import BVComplex
    from .dwork_series import psi_table
    from .frobenius import apply_psi
    from .linfinity import (
        FormalElement, bell_poly, descendant_ell, descendant_phi, k_S_from_descendants, linf_morphism_defect)
    from .padic import compute_gamma

    rng = random.Random(seed)
    rows = []

    def add(name, ok, residual):
        rows.append({"name": name, "pass": bool(ok), "residual": str(residual)})

    small = ctx.with_precision(min(ctx.N, 4))
    # splitting function and gamma
    psi = psi_table(small)
    F = V.F.field
    q = V.F.q
    bad = 0
    for _ in range(samples):
        x, y = rng.randrange(q), rng.randrange(q)
        if psi[F.add(x, y)] != psi[x] * psi[y]:
            bad += 1
    add("psi_q additive", bad == 0, f"{bad} failures")
    G = compute_gamma(small)
    add("val(gamma) = 1/(p-1)", G.gamma.val() == Fraction(1, ctx.p - 1), G.gamma.val())
    # complex
    D = 3 * V.N + 2 * max(V.degrees)  # room for triple products
    cx = BVComplex(V, small, D)

    def rnd(deg):
        terms = {}
        for _ in range(3):
            w = tuple(rng.randint(0, 1) for _ in range(cx.N))
            I = tuple(sorted(rng.sample(range(cx.N), -deg)))
            terms[(w, I)] = small.from_int(rng.randint(1, ctx.p - 1))
        return cx.element(terms)

    res = [cx.delta(cx.delta(rnd(-2))) for _ in range(samples)]
    add("Delta~^2 = 0", all(r.is_zero() for r in res), min(r.min_val() for r in res))
    res = [cx.K(cx.K(rnd(-2))) for _ in range(samples)]
    add("K~_S^2 = 0", all(r.is_zero() for r in res), min(r.min_val() for r in res))
    ell = descendant_ell(cx.delta)
    res = [ell(rnd(-1), rnd(-1), rnd(-2)) for _ in range(samples)]
    add("ell_3^Delta = 0", all(r.is_zero() for r in res), min(r.min_val() for r in res))
    res = []
    for _ in range(samples):
        lam = rnd(-1)
        d = k_S_from_descendants(cx, lam) - cx.K(lam)
        res.append(d._like({k: c for k, c in d.terms.items() if sum(k[0]) < D}))
    add("K~_S = Delta~ + ell_2(S^, .)", all(r.is_zero() for r in res), min(r.min_val() for r in res))
    b3 = bell_poly(3)
    add("B_3 = x1^3 + 3 x1 x2 + x3", str(b3) == "x1^3 + 3*x1*x2 + x3", str(b3))
    # L-infinity morphism for Psi_{P^n}, inputs with exponents in {0, q-1, q}
    big = BVComplex(V, small, 2 * q * cx.N)

    def rnd_q(deg):
        terms = {}
        for _ in range(3):
            w = tuple(rng.choice((0, q - 1, q)) for _ in range(big.N))
            I = tuple(sorted(rng.sample(range(big.N), -deg)))
            terms[(w, I)] = small.from_int(rng.randint(1, ctx.p - 1))
        return big.element(terms)

    phi = descendant_phi(lambda x: apply_psi(x, V, "Pn"))
    ellb = descendant_ell(big.delta)
    mdeg = (1, 0)
    g = FormalElement(mdeg, {(0,): rnd_q(-1), (1,): rnd_q(0)})
    ok = all(linf_morphism_defect(phi, ellb, ellb, g, n).is_zero() for n in (1, 2))
    add("L-infinity morphism phi^Psi_Pn (orders 1, 2)", ok, "exact" if ok else "nonzero")
    return rows


HANDLERS = {"zeta": cmd_zeta, "count": cmd_count, "charpoly": cmd_charpoly, "verify": cmd_verify,
            "params": cmd_params}


def run(command: str, job: JobSpec, args=None) -> Report:
    args = args or argparse.Namespace(ceiling=job.overrides.get("ceiling", DEFAULT_CEILING), threads=1)
    t0 = time.perf_counter()
    echo = job.to_json()
    try:
        if command not in HANDLERS:
            raise ValidationError(f"unknown command {command}")
        V = job.variety()
        if command in ("zeta", "charpoly", "verify") and V.F.q ** (V.n + 1) <= args.ceiling:
            bad = smoothness_check(V, 1, args.ceiling)
            if bad:
                raise ValidationError(f"singular point {bad[0]}")
        ctx = job.context(V)
        result = HANDLERS[command](job, V, ctx, args)
        code, reason = EXIT_OK, None
        if command == "verify" and not result["all_pass"]:
            code, reason = EXIT_VALIDATION, "invariant failure"
        if command == "zeta" and result.get("counts_match") is False:
            code, reason = EXIT_VALIDATION, "counts mismatch"
    except PrecisionError as e:
        result, code, reason = {"detail": str(e)}, EXIT_PRECISION, "precision floor"
    except EnumerationCeilingError as e:
        result, code, reason = {"detail": str(e)}, EXIT_VALIDATION, "enumeration ceiling"
    except (ValidationError, FieldError, ZetaRecoveryError) as e:
        result, code, reason = {"detail": str(e)}, EXIT_VALIDATION, "validation"
    return Report(command, echo, code, _jsonable(result), reason,
                  {"seconds": round(time.perf_counter() - t0, 3)})


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dwork-bv", description=__doc__.splitlines()[0])
    ap.add_argument("--input", required=True, help="JSON job file")
    ap.add_argument("--command", choices=COMMANDS, help="overrides the job's command")
    ap.add_argument("--precision", type=int, help="target p-adic precision N")
    ap.add_argument("--degree-bound", type=int, help="truncation degree D")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for point counting")
    ap.add_argument("--ceiling", type=int, help="enumeration ceiling (points)")
    ap.add_argument("--json-out", help="write the report here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        with open(args.input) as fh:
            job = JobSpec.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        rep = Report(args.command or "unknown", {}, EXIT_VALIDATION, {"detail": str(e)}, "validation")
    else:
        if args.precision is not None:
            job.overrides["N"] = args.precision
        if args.degree_bound is not None:
            job.overrides["D"] = args.degree_bound
        if args.ceiling is not None:
            job.overrides["ceiling"] = args.ceiling
        args.ceiling = job.overrides.get("ceiling", DEFAULT_CEILING)
        job.command = args.command or job.command
        rep = run(job.command, job, args)
    text = rep.dumps()
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return rep.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
