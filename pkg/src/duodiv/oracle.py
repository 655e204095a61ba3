"""Independent numerical ground truth.

Everything here works from pointwise log-densities: adaptive quadrature for
continuous supports, ratio-bounded series for the integer lattice, and
central finite differences for gradients.  Nothing in this module calls the
closed-form divergence code, and :func:`reference_density` builds densities
from textbook formulas rather than from the catalog's log-normalizers.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, ndtr

from .divergences import DivergenceValue, Method
from .errors import AlphaError, DomainError, ParamError, ToleranceError
from .support import NATURALS, Interval, Lattice

log = logging.getLogger(__name__)

TOL_ENV_VAR = "DUODIV_ORACLE_TOL"
MAX_SERIES_TERMS = 1_000_000


@dataclass(frozen=True)
class OracleConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    series_tail_tol: float = 1e-14
    fd_step: float = 1e-6
    strict: bool = False

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "series_tail_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ParamError(f"{name} must be positive")
        if self.max_subdivisions < 10:
            raise ParamError("max_subdivisions must be at least 10")

    @classmethod
    def from_env(cls, **overrides) -> OracleConfig:
        """Default config with ``abs_tol`` taken from ``DUODIV_ORACLE_TOL`` if set."""
        raw = os.environ.get(TOL_ENV_VAR)
        if raw is not None and "abs_tol" not in overrides:
            overrides["abs_tol"] = float(raw)
        return cls(**overrides)

    def as_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_subdivisions": self.max_subdivisions,
            "series_tail_tol": self.series_tail_tol,
            "fd_step": self.fd_step,
        }


DEFAULT_CONFIG = OracleConfig()


@dataclass(frozen=True)
class Density:
    """A pointwise log-density with its support and quadrature split points."""

    logpdf: Callable[[float], float]
    support: Union[Interval, Lattice]
    breakpoints: tuple = field(default=())


class Estimate(NamedTuple):
    value: float
    abs_error: float


# -- reference densities ---------------------------------------------------


def reference_density(family_id: str, params) -> Density:
    """Textbook density for a catalog family, from its source parameters."""
    params = {k: float(v) for k, v in params.items()}
    if family_id == "poisson":
        lam = params["lambda"]
        log_lam = math.log(lam)
        return Density(lambda x: x * log_lam - lam - float(gammaln(x + 1.0)), NATURALS)
    if family_id == "geometric":
        p = params["p"]
        return Density(lambda x: x * math.log1p(-p) + math.log(p), NATURALS)
    if family_id == "exponential":
        lam = params["lambda"]
        return Density(lambda x: math.log(lam) - lam * x, Interval(0.0, math.inf))
    if family_id == "laplacian":
        lam = params["lambda"]
        return Density(lambda x: math.log(lam / 2) - lam * abs(x), Interval(), (0.0,))
    if family_id == "half_normal":
        sigma = params["sigma"]
        c = 0.5 * math.log(2 / math.pi) - math.log(sigma)
        return Density(lambda x: c - x * x / (2 * sigma**2), Interval(0.0, math.inf), (sigma,))
    if family_id in ("normal", "trunc_normal"):
        m, s = params["m"], params["s"]
        a, b = params.get("a", -math.inf), params.get("b", math.inf)
        mass = float(ndtr((b - m) / s) - ndtr((a - m) / s))
        c = -math.log(s * math.sqrt(2 * math.pi) * mass)
        inside = tuple(x for x in (m - s, m, m + s) if a < x < b)
        return Density(lambda x: c - (x - m) ** 2 / (2 * s * s), Interval(a, b), inside)
    raise ParamError(f"unknown family {family_id!r}")


def _as_density(p) -> Density:
    if isinstance(p, Density):
        return p
    return Density(p.logpdf, p.support, tuple(getattr(p, "breakpoints", ())))


# -- quadrature and series -------------------------------------------------


def _pieces(interval: Interval, breakpoints) -> list[tuple[float, float]]:
    lo, hi = interval.lower, interval.upper
    inner = sorted({float(b) for b in breakpoints if lo < b < hi})
    if not inner and math.isinf(lo) and math.isinf(hi):
        inner = [0.0]
    edges = [lo, *inner, hi]
    return list(zip(edges[:-1], edges[1:]))


def _quad_piece(fun, u, v, cfg):
    if math.isfinite(u) and math.isfinite(v):
        g, lo, hi = fun, u, v
    else:
        # x = c +- t / (1 - t) maps [0, 1) onto a half-line.
        c, sign = (u, 1.0) if math.isfinite(u) else (v, -1.0)
        if math.isinf(u) and math.isinf(v):
            raise DomainError("a piece must have at least one finite end")

        def g(t):
            if t >= 1.0:
                return 0.0
            w = 1.0 - t
            val = fun(c + sign * t / w)
            return val / (w * w) if val != 0.0 else 0.0

        lo, hi = 0.0, 1.0
    res = quad(g, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions, full_output=1)
    return res[0], res[1], len(res) < 4


def _integrate(fun, interval: Interval, breakpoints, cfg: OracleConfig) -> Estimate:
    values, errors, ok = [], [], True
    for u, v in _pieces(interval, breakpoints):
        val, err, piece_ok = _quad_piece(fun, u, v, cfg)
        values.append(val)
        errors.append(err)
        ok = ok and piece_ok
    total = math.fsum(values)
    err = math.fsum(errors)
    _check_tolerance(total, err, ok, cfg)
    return Estimate(total, err)


def _check_tolerance(value, err, ok, cfg):
    target = max(cfg.abs_tol, cfg.rel_tol * abs(value))
    if ok or err <= target:
        return
    message = f"quadrature error estimate {err:.3g} exceeds tolerance {target:.3g}"
    if cfg.strict:
        raise ToleranceError(message, Estimate(value, err))
    log.warning(message)


def _series(log_weight, factor, start: int, cfg: OracleConfig) -> Estimate:
    """Sum ``exp(log_weight(k)) * factor(k)`` over ``k >= start``.

    Stops once the envelope ``e_k = exp(log_weight(k)) * max(1, |factor(k)|)``
    has ratio ``r = e_k / e_{k-1} < 1`` and ``e_k r / (1 - r)`` is below the
    tail tolerance; this bounds the tail when envelope ratios are eventually
    nonincreasing, which holds for Poisson weights (ratio ``lam/(k+1)``) and
    geometric weights (constant ratio) against factors of polynomial-log
    growth.
    """
    terms = []
    prev_log_env = None
    for k in range(start, start + MAX_SERIES_TERMS):
        lw = log_weight(k)
        if lw == -math.inf:
            f = 0.0
            log_env = -math.inf
        else:
            f = factor(k)
            terms.append(math.exp(lw) * f)
            log_env = lw + math.log(max(1.0, abs(f)))
        if prev_log_env is not None and k - start >= 2:
            if log_env == -math.inf and prev_log_env == -math.inf:
                return Estimate(math.fsum(terms), 0.0)
            log_r = log_env - prev_log_env
            if log_r < 0.0:
                r = math.exp(log_r)
                log_tail = log_env + math.log(r) - math.log1p(-r)
                if log_tail < math.log(cfg.series_tail_tol):
                    return Estimate(math.fsum(terms), math.exp(log_tail))
        prev_log_env = log_env
    result = Estimate(math.fsum(terms), math.inf)
    if cfg.strict:
        raise ToleranceError("series tail could not be certified", result)
    log.warning("series tail could not be certified after %d terms", MAX_SERIES_TERMS)
    return result


def _weighted_mean(p: Density, g, cfg: OracleConfig) -> Estimate:
    if p.support.discrete:
        return _series(p.logpdf, g, p.support.lower, cfg)

    def integrand(x):
        lp = p.logpdf(x)
        if lp == -math.inf:
            return 0.0
        w = math.exp(lp)
        return w * g(x) if w != 0.0 else 0.0

    return _integrate(integrand, p.support, p.breakpoints, cfg)


class _AbsoluteContinuityViolation(Exception):
    pass


def kl_numeric(p, q, cfg: OracleConfig = DEFAULT_CONFIG) -> DivergenceValue:
    """``int p log(p / q)`` computed directly from the two densities."""
    p, q = _as_density(p), _as_density(q)
    if not p.support.issubset(q.support):
        return DivergenceValue.infinity(Method.ORACLE)

    def log_ratio(x):
        lq = q.logpdf(x)
        if lq == -math.inf:
            raise _AbsoluteContinuityViolation
        return p.logpdf(x) - lq

    merged = Density(p.logpdf, p.support, tuple(p.breakpoints) + tuple(q.breakpoints))
    try:
        est = _weighted_mean(merged, log_ratio, cfg)
    except _AbsoluteContinuityViolation:
        return DivergenceValue.infinity(Method.ORACLE)
    return DivergenceValue.clamped(est.value, Method.ORACLE, est.abs_error)


def bhattacharyya_numeric(p, q, alpha: float, cfg: OracleConfig = DEFAULT_CONFIG) -> DivergenceValue:
    """``-log int p^alpha q^(1-alpha)`` over the common support."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaError(f"alpha={alpha} must lie in (0, 1)")
    p, q = _as_density(p), _as_density(q)
    if p.support.discrete != q.support.discrete:
        raise DomainError("cannot mix counting and Lebesgue supports")
    common = p.support.intersect(q.support)
    if common is None:
        return DivergenceValue.infinity(Method.ORACLE)

    def log_weight(x):
        lp, lq = p.logpdf(x), q.logpdf(x)
        if lp == -math.inf or lq == -math.inf:
            return -math.inf
        return alpha * lp + (1.0 - alpha) * lq

    if common.discrete:
        est = _series(log_weight, lambda k: 1.0, common.lower, cfg)
    else:
        points = tuple(sorted(set(p.breakpoints) | set(q.breakpoints)))

        def integrand(x):
            lw = log_weight(x)
            return 0.0 if lw == -math.inf else math.exp(lw)

        est = _integrate(integrand, common, points, cfg)
    if not est.value > 0:
        return DivergenceValue.infinity(Method.ORACLE)
    return DivergenceValue.clamped(-math.log(est.value), Method.ORACLE, est.abs_error / est.value)


def expectation_numeric(p, g: Callable[[float], float], cfg: OracleConfig = DEFAULT_CONFIG,
                        full_output: bool = False):
    """``E_p[g(x)]``; with ``full_output`` also the absolute error estimate."""
    est = _weighted_mean(_as_density(p), g, cfg)
    return est if full_output else est.value


def entropy_numeric(p, cfg: OracleConfig = DEFAULT_CONFIG) -> Estimate:
    """``-int p log p``."""
    p = _as_density(p)
    est = _weighted_mean(p, lambda x: -p.logpdf(x), cfg)
    return est


def finite_diff_grad(f: Callable, theta, cfg: OracleConfig = DEFAULT_CONFIG, domain=None):
    """Central differences with one Richardson step.

    Returns ``(gradient, error)`` where ``error`` is the per-coordinate gap
    between the extrapolated and the finer plain estimate.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    grad = np.empty_like(theta)
    err = np.empty_like(theta)
    for i in range(theta.size):
        h = cfg.fd_step * max(1.0, abs(theta[i]))
        e = np.zeros_like(theta)
        e[i] = 1.0
        if domain is not None:
            for probe in (theta - 2 * h * e, theta + 2 * h * e):
                if not domain.contains(probe):
                    raise DomainError(f"{theta} is within 2*fd_step of the domain boundary")

        def central(step):
            return (float(f(theta + step * e)) - float(f(theta - step * e))) / (2 * step)

        coarse, fine = central(h), central(h / 2)
        grad[i] = (4 * fine - coarse) / 3
        err[i] = abs(grad[i] - fine)
    return grad, err


def erf_reference(x: float) -> float:
    """``erf`` from direct quadrature of its defining integral."""
    if x == 0.0:
        return 0.0
    val, _ = quad(lambda t: math.exp(-t * t), 0.0, abs(x), epsabs=1e-15, epsrel=1e-13, limit=200)
    return math.copysign(2.0 / math.sqrt(math.pi) * val, x)
