"""Command-line front end.

    duodiv kl --p exponential:lambda=1 --q laplacian:lambda=1 --oracle
    duodiv bhat --p halfnormal:sigma=1 --q normal:m=0,s=1 --alpha 0.5
    duodiv bregman --generator quadratic:a=2 --generator2 quadratic --theta 1 --theta-prime 1
    duodiv centroid --generator exp --side left --point 0 --point 0.693
    duodiv figure --kind surface --a 0.5

Exit codes: 0 success, 2 usage error, 3 parameter/domain/nesting/dominance
error, 4 numerical failure, 1 when ``verify`` finds a mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import families as fam
from . import figures, oracle
from .centroids import CentroidProblem, Side, centroid
from .divergences import (
    DivergenceValue,
    bregman,
    duo_bregman,
    duo_jensen,
    jensen,
)
from .errors import (
    AlphaError,
    DegenerateError,
    DomainError,
    DominanceError,
    DuoDivError,
    FamilyMismatchError,
    NestingError,
    ParamError,
    SupportError,
    UnsupportedPairError,
)
from .generators import ConvexGenerator, exponential_generator, monomial, neg_log, quadratic
from .verify import run_verify

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3, 4
COMMANDS = ("kl", "bhat", "jensen", "bregman", "centroid", "entropy", "verify", "figure")

# CLI family names -> catalog ids and the order their parameters are printed in.
SPEC_FAMILIES = {
    "poisson": ("poisson", ("lambda",)),
    "geometric": ("geometric", ("p",)),
    "exponential": ("exponential", ("lambda",)),
    "laplacian": ("laplacian", ("lambda",)),
    "halfnormal": ("half_normal", ("sigma",)),
    "normal": ("normal", ("m", "s")),
    "truncnormal": ("trunc_normal", ("m", "s", "a", "b")),
}

_NUMBER = re.compile(r"^[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)$")


class SpecError(ValueError):
    """A family or generator spec string does not follow the grammar."""


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Spec:
    name: str
    params: tuple[tuple[str, float], ...] = ()

    def as_dict(self) -> dict[str, float]:
        return dict(self.params)


def _parse_number(text: str) -> float:
    text = text.strip()
    if not _NUMBER.match(text):
        raise SpecError(f"not a decimal number: {text!r}")
    return float(text)


def parse_spec(text: str) -> Spec:
    """``name`` or ``name:key=value,key=value``; values are decimals or +-inf."""
    name, sep, rest = text.strip().partition(":")
    if not re.fullmatch(r"[a-z][a-z0-9_]*", name):
        raise SpecError(f"bad name in spec {text!r}")
    params = []
    if sep:
        if not rest:
            raise SpecError(f"empty parameter list in {text!r}")
        seen = set()
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or not re.fullmatch(r"[a-z][a-z0-9_]*", key):
                raise SpecError(f"bad parameter {item!r} in {text!r}")
            if key in seen:
                raise SpecError(f"repeated parameter {key!r}")
            seen.add(key)
            params.append((key, _parse_number(val)))
    return Spec(name, tuple(params))


def _format_number(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def format_spec(spec: Spec) -> str:
    if not spec.params:
        return spec.name
    body = ",".join(f"{k}={_format_number(v)}" for k, v in spec.params)
    return f"{spec.name}:{body}"


def member_from_spec(spec: Spec) -> fam.ExpFamilyMember:
    if spec.name not in SPEC_FAMILIES:
        raise SpecError(f"unknown family {spec.name!r}; expected one of {sorted(SPEC_FAMILIES)}")
    family_id, names = SPEC_FAMILIES[spec.name]
    params = spec.as_dict()
    if set(params) != set(names):
        raise SpecError(f"{spec.name} takes parameters {','.join(names)}")
    return fam.make_member(family_id, **params)


def generator_from_spec(spec: Spec) -> ConvexGenerator:
    """Generators by name: quadratic[:a=], monomial:power=[,lower=,upper=],
    neglog[:scale=,shift=], exp, or a family log-normalizer (poisson,
    geometric, exponential, laplacian, halfnormal, normal, truncnormal:a=,b=)."""
    p = spec.as_dict()

    def take(*allowed):
        extra = set(p) - set(allowed)
        if extra:
            raise SpecError(f"{spec.name} does not take {sorted(extra)}")
        return p

    if spec.name == "quadratic":
        return quadratic(take("a").get("a", 1.0))
    if spec.name == "monomial":
        q = take("power", "lower", "upper")
        if "power" not in q:
            raise SpecError("monomial needs power=")
        return monomial(q["power"], q.get("lower", -math.inf), q.get("upper", math.inf))
    if spec.name == "neglog":
        q = take("scale", "shift")
        return neg_log(q.get("scale", 1.0), q.get("shift", 0.0))
    if spec.name == "exp":
        take()
        return exponential_generator()
    if spec.name == "truncnormal":
        q = take("a", "b")
        return fam.generator_for("trunc_normal", (q.get("a", -math.inf), q.get("b", math.inf)))
    if spec.name in SPEC_FAMILIES:
        take()
        return fam.generator_for(SPEC_FAMILIES[spec.name][0])
    raise SpecError(f"unknown generator {spec.name!r}")


def parse_vector(text: str) -> np.ndarray:
    return np.array([_parse_number(t) for t in text.split(",")])


@dataclass
class Request:
    command: str
    p: Optional[str] = None
    q: Optional[str] = None
    alpha: Optional[float] = None
    side: Optional[str] = None
    oracle: bool = False
    output: str = "json"
    generator: Optional[str] = None
    generator2: Optional[str] = None
    theta: Optional[str] = None
    theta_prime: Optional[str] = None
    points: list = field(default_factory=list)
    kind: Optional[str] = None
    a: Optional[float] = None
    out: Optional[str] = None
    allow_negative: bool = False

    def validate(self) -> None:
        need = {
            "kl": ("p", "q"),
            "bhat": ("p", "q", "alpha"),
            "jensen": ("generator", "theta", "theta_prime", "alpha"),
            "bregman": ("generator", "theta", "theta_prime"),
            "centroid": ("generator", "side", "points"),
            "entropy": ("p",),
            "verify": (),
            "figure": ("kind",),
        }[self.command]
        missing = [n for n in need if getattr(self, n) in (None, [])]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            raise UsageError(f"{self.command} requires {flags}")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise AlphaError(f"alpha={self.alpha} must lie in (0, 1)")


# -- command handlers ------------------------------------------------------


def _record(req: Request, inputs: dict, value: DivergenceValue, cfg, oracle_value=None) -> dict:
    out = {
        "command": req.command,
        "inputs": inputs,
        "method": value.method.value,
        "abs_error_estimate": value.abs_error_estimate,
        "infinite": value.infinite,
    }
    if not value.infinite:
        out["value"] = value.value
    if oracle_value is not None:
        out["oracle_value"] = None if oracle_value.infinite else oracle_value.value
        out["abs_error_estimate"] = value.abs_error_estimate + oracle_value.abs_error_estimate
    return out


def _cmd_kl(req, cfg):
    p, q = member_from_spec(parse_spec(req.p)), member_from_spec(parse_spec(req.q))
    inputs = {"p": format_spec(parse_spec(req.p)), "q": format_spec(parse_spec(req.q))}
    closed = fam.kl_divergence(p, q)
    check = oracle.kl_numeric(p, q, cfg) if req.oracle else None
    return _record(req, inputs, closed, cfg, check)


def _cmd_bhat(req, cfg):
    p, q = member_from_spec(parse_spec(req.p)), member_from_spec(parse_spec(req.q))
    inputs = {"p": format_spec(parse_spec(req.p)), "q": format_spec(parse_spec(req.q)), "alpha": req.alpha}
    closed = fam.bhattacharyya(p, q, req.alpha)
    check = oracle.bhattacharyya_numeric(p, q, req.alpha, cfg) if req.oracle else None
    return _record(req, inputs, closed, cfg, check)


def _cmd_entropy(req, cfg):
    p = member_from_spec(parse_spec(req.p))
    value, err = fam.entropy(p)
    closed = DivergenceValue(value, abs_error_estimate=err)
    check = None
    if req.oracle:
        est = oracle.entropy_numeric(p, cfg)
        check = DivergenceValue(est.value, abs_error_estimate=est.abs_error)
    return _record(req, {"p": format_spec(parse_spec(req.p))}, closed, cfg, check)


def _generators(req):
    F1 = generator_from_spec(parse_spec(req.generator))
    F2 = generator_from_spec(parse_spec(req.generator2)) if req.generator2 else None
    inputs = {"generator": req.generator}
    if req.generator2:
        inputs["generator2"] = req.generator2
    return F1, F2, inputs


def _cmd_bregman(req, cfg):
    F1, F2, inputs = _generators(req)
    t, tp = parse_vector(req.theta), parse_vector(req.theta_prime)
    inputs.update(theta=t.tolist(), theta_prime=tp.tolist())
    if F2 is None:
        value = bregman(F1, t, tp)
    else:
        value = duo_bregman(F1, F2, t, tp, enforce_dominance=not req.allow_negative)
    return _record(req, inputs, value, cfg)


def _cmd_jensen(req, cfg):
    F1, F2, inputs = _generators(req)
    t, tp = parse_vector(req.theta), parse_vector(req.theta_prime)
    inputs.update(theta=t.tolist(), theta_prime=tp.tolist(), alpha=req.alpha)
    if F2 is None:
        value = jensen(F1, t, tp, req.alpha)
    else:
        value = duo_jensen(F1, F2, t, tp, req.alpha, enforce_dominance=not req.allow_negative)
    return _record(req, inputs, value, cfg)


def _cmd_centroid(req, cfg):
    F1, F2, inputs = _generators(req)
    points = [parse_vector(p) for p in req.points]
    prob = CentroidProblem(points, F1, F2, Side(req.side))
    c = centroid(prob)
    inputs.update(side=req.side, points=[p.tolist() for p in points])
    return {
        "command": req.command,
        "inputs": inputs,
        "value": c.tolist(),
        "method": "closed_form",
        "abs_error_estimate": 0.0,
        "infinite": False,
    }


def _cmd_verify(req, cfg):
    results, ok = run_verify(cfg)
    return {
        "command": "verify",
        "inputs": {},
        "all_ok": ok,
        "cases": [r.as_dict() for r in results],
    }


def _figure_rows(req):
    if req.kind == "surface":
        a = 0.5 if req.a is None else req.a
        return figures.duo_euclid_surface(a), figures.SURFACE_COLUMNS
    if req.kind == "conjugate":
        if req.a is None:
            return figures.square_quartic_curves(), figures.CURVE_COLUMNS
        return figures.scaled_quadratic_curves(req.a), figures.CURVE_COLUMNS
    raise UsageError(f"unknown figure kind {req.kind!r}; use surface or conjugate")


def _cmd_figure(req, cfg):
    rows, columns = _figure_rows(req)
    text = figures.write_csv(rows, req.out, columns)
    return {"command": "figure", "inputs": {"kind": req.kind, "a": req.a}, "rows": len(rows),
            "csv": None if req.out else text, "path": req.out}


HANDLERS = {
    "kl": _cmd_kl,
    "bhat": _cmd_bhat,
    "entropy": _cmd_entropy,
    "bregman": _cmd_bregman,
    "jensen": _cmd_jensen,
    "centroid": _cmd_centroid,
    "verify": _cmd_verify,
    "figure": _cmd_figure,
}

DOMAIN_ERRORS = (
    ParamError,
    DomainError,
    NestingError,
    DominanceError,
    AlphaError,
    SupportError,
    FamilyMismatchError,
    UnsupportedPairError,
    DegenerateError,
)


def run(req: Request, cfg: Optional[oracle.OracleConfig] = None) -> tuple[int, dict]:
    """Execute a request; returns the exit code and the JSON-ready payload."""
    try:
        cfg = cfg or oracle.OracleConfig.from_env()
    except (ValueError, ParamError) as exc:
        return EXIT_USAGE, _error("UsageError", f"bad {oracle.TOL_ENV_VAR}: {exc}")
    try:
        req.validate()
        payload = HANDLERS[req.command](req, cfg)
    except (SpecError, UsageError) as exc:
        return EXIT_USAGE, _error(type(exc).__name__, str(exc))
    except DOMAIN_ERRORS as exc:
        return EXIT_DOMAIN, _error(type(exc).__name__, str(exc))
    except DuoDivError as exc:
        return EXIT_NUMERIC, _error(type(exc).__name__, str(exc))
    payload["version"] = __version__
    payload["oracle_config"] = cfg.as_dict()
    if req.command == "verify" and not payload["all_ok"]:
        return EXIT_MISMATCH, payload
    return EXIT_OK, payload


def _error(kind: str, message: str) -> dict:
    return {"error": kind, "message": message, "version": __version__}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duodiv", description="Duo divergences and exponential-family KLDs.")
    parser.add_argument("--version", action="version", version=f"duodiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", choices=("json", "csv"), default="json")
        sp.add_argument("--oracle", action="store_true", help="also compute the numerical oracle value")

    def pair(sp):
        sp.add_argument("--p", required=True, help="family spec, e.g. poisson:lambda=1")
        sp.add_argument("--q", required=True, help="family spec, e.g. geometric:p=0.5")

    def gens(sp):
        sp.add_argument("--generator", required=True, help="e.g. quadratic:a=2, exp, neglog, poisson")
        sp.add_argument("--generator2", help="second generator for the duo form")
        sp.add_argument("--allow-negative", action="store_true", help="skip the dominance guard")

    sp = sub.add_parser("kl", help="Kullback-Leibler divergence between catalog members")
    pair(sp), common(sp)
    sp = sub.add_parser("bhat", help="skewed Bhattacharyya distance")
    pair(sp), common(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp = sub.add_parser("entropy", help="entropy of a catalog member")
    sp.add_argument("--p", required=True)
    common(sp)
    sp = sub.add_parser("bregman", help="Bregman or duo Bregman divergence")
    gens(sp), common(sp)
    sp.add_argument("--theta", required=True, help="comma-separated vector")
    sp.add_argument("--theta-prime", required=True)
    sp = sub.add_parser("jensen", help="skewed Jensen or duo Jensen divergence")
    gens(sp), common(sp)
    sp.add_argument("--theta", required=True)
    sp.add_argument("--theta-prime", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp = sub.add_parser("centroid", help="sided duo Bregman centroid")
    gens(sp), common(sp)
    sp.add_argument("--side", choices=("left", "right"), required=True)
    sp.add_argument("--point", dest="points", action="append", required=True, help="repeat per point")
    sp = sub.add_parser("verify", help="closed-form versus oracle regression suite")
    common(sp)
    sp = sub.add_parser("figure", help="CSV plot data")
    sp.add_argument("--kind", choices=("surface", "conjugate"), required=True)
    sp.add_argument("--a", type=float, help="quadratic scale a (surface: default 0.5)")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.add_argument("--output", choices=("json", "csv"), default="csv")
    return parser


def _request_from_args(ns: argparse.Namespace) -> Request:
    kw = {k: v for k, v in vars(ns).items() if k in Request.__dataclass_fields__ and v is not None}
    return Request(**kw)


def _flatten(payload: dict) -> dict:
    row = {f"input_{k}": json.dumps(v) if isinstance(v, (list, dict)) else v
           for k, v in payload.get("inputs", {}).items()}
    for key in ("value", "method", "oracle_value", "abs_error_estimate", "infinite", "version"):
        if key in payload:
            v = payload[key]
            row[key] = json.dumps(v) if isinstance(v, list) else v
    return row


def _emit(req: Request, code: int, payload: dict, stdout, stderr) -> None:
    if "error" in payload:
        print(json.dumps(payload), file=stderr)
        return
    if req.command == "figure":
        if req.output == "csv" and payload["csv"] is not None:
            stdout.write(payload["csv"])
        else:
            print(json.dumps({k: v for k, v in payload.items() if k != "csv"}, indent=2), file=stdout)
        return
    if req.output == "csv":
        if req.command == "verify":
            rows = payload["cases"]
        else:
            rows = [_flatten(payload)]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        stdout.write(buf.getvalue())
        return
    print(json.dumps(payload, indent=2), file=stdout)


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    req = _request_from_args(ns)
    code, payload = run(req)
    try:
        _emit(req, code, payload, stdout, stderr)
    except BrokenPipeError:
        # Downstream closed the pipe (e.g. `| head`); silence the exit flush.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return code


if __name__ == "__main__":
    sys.exit(main())
