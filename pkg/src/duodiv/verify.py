"""Deterministic closed-form versus oracle regression cases."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

from . import families as fam
from . import oracle
from .divergences import DivergenceValue

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class CaseResult:
    name: str
    closed: Optional[float]
    oracle: Optional[float]
    abs_error_estimate: float
    infinite: bool
    ok: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _m(fid, **kw):
    return fam.make_member(fid, **kw)


def _cases() -> list[tuple[str, Callable, Callable]]:
    lam = "lambda"
    kl_pairs = [
        ("kl geometric(0.5) || geometric(0.25)", _m("geometric", p=0.5), _m("geometric", p=0.25)),
        ("kl poisson(1) || geometric(0.5)", _m("poisson", **{lam: 1.0}), _m("geometric", p=0.5)),
        ("kl poisson(3.5) || geometric(0.2)", _m("poisson", **{lam: 3.5}), _m("geometric", p=0.2)),
        ("kl poisson(2) || poisson(5)", _m("poisson", **{lam: 2.0}), _m("poisson", **{lam: 5.0})),
        ("kl exponential(1) || laplacian(1)", _m("exponential", **{lam: 1.0}), _m("laplacian", **{lam: 1.0})),
        ("kl exponential(2) || laplacian(1)", _m("exponential", **{lam: 2.0}), _m("laplacian", **{lam: 1.0})),
        ("kl laplacian(1) || exponential(1)", _m("laplacian", **{lam: 1.0}), _m("exponential", **{lam: 1.0})),
        ("kl halfnormal(1) || normal(0,1)", _m("half_normal", sigma=1.0), _m("normal", m=0.0, s=1.0)),
        ("kl halfnormal(0.7) || normal(0,1.6)", _m("half_normal", sigma=0.7), _m("normal", m=0.0, s=1.6)),
        ("kl normal(0,1) || normal(1,2)", _m("normal", m=0.0, s=1.0), _m("normal", m=1.0, s=2.0)),
        (
            "kl truncnormal(-0.2,0.7,0,1.5) || truncnormal(0.3,1.2,-1,2)",
            _m("trunc_normal", m=-0.2, s=0.7, a=0.0, b=1.5),
            _m("trunc_normal", m=0.3, s=1.2, a=-1.0, b=2.0),
        ),
        (
            "kl truncnormal(0,1,0,inf) || normal(0.5,1.5)",
            _m("trunc_normal", m=0.0, s=1.0, a=0.0, b=math.inf),
            _m("normal", m=0.5, s=1.5),
        ),
    ]
    cases = []
    for name, p, q in kl_pairs:
        cases.append((name, lambda p=p, q=q: fam.kl_divergence(p, q), lambda cfg, p=p, q=q: oracle.kl_numeric(p, q, cfg)))
    bhat_pairs = [
        ("bhat normal(0,1) : normal(1,1)", _m("normal", m=0.0, s=1.0), _m("normal", m=1.0, s=1.0), 0.5),
        ("bhat halfnormal(1) : normal(0,1)", _m("half_normal", sigma=1.0), _m("normal", m=0.0, s=1.0), 0.5),
        ("bhat exponential(1) : laplacian(2)", _m("exponential", **{lam: 1.0}), _m("laplacian", **{lam: 2.0}), 0.25),
        ("bhat geometric(0.3) : geometric(0.6)", _m("geometric", p=0.3), _m("geometric", p=0.6), 0.75),
    ]
    for name, p, q, a in bhat_pairs:
        cases.append((
            f"{name} alpha={a:g}",
            lambda p=p, q=q, a=a: fam.bhattacharyya(p, q, a),
            lambda cfg, p=p, q=q, a=a: oracle.bhattacharyya_numeric(p, q, a, cfg),
        ))
    for name, p in (
        ("entropy truncnormal(0,1,0,inf)", _m("trunc_normal", m=0.0, s=1.0, a=0.0, b=math.inf)),
        ("entropy normal(0,1)", _m("normal", m=0.0, s=1.0)),
    ):
        cases.append((
            name,
            lambda p=p: _as_value(fam.entropy(p)),
            lambda cfg, p=p: _as_value(oracle.entropy_numeric(p, cfg)),
        ))
    return cases


def _as_value(est) -> DivergenceValue:
    value, err = est
    return DivergenceValue(float(value), abs_error_estimate=float(err))


def run_verify(cfg: Optional[oracle.OracleConfig] = None, tol: float = DEFAULT_TOL) -> tuple[list[CaseResult], bool]:
    """Run every case; returns the results and whether all of them agree."""
    cfg = cfg or oracle.OracleConfig.from_env()
    results = []
    for name, closed_fn, oracle_fn in _cases():
        c, o = closed_fn(), oracle_fn(cfg)
        err = c.abs_error_estimate + o.abs_error_estimate
        if c.infinite or o.infinite:
            ok = c.infinite and o.infinite
            results.append(CaseResult(name, None if c.infinite else c.value,
                                      None if o.infinite else o.value, err, c.infinite, ok))
            continue
        ok = abs(c.value - o.value) <= tol + err
        results.append(CaseResult(name, c.value, o.value, err, False, ok))
    return results, all(r.ok for r in results)
