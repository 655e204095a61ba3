"""Catalog of exponential families in canonical form and the KLD /
Bhattacharyya formulas between their members.

Members are written ``exp(<theta, t(x)> - F(theta) + k(x))`` against counting
or Lebesgue measure.  Gaussian-type families (normal, half-normal, truncated
normal) all share ``t(x) = (x, x^2)`` and differ only by their window, so
any two with nested windows form a nested pair.  The exponential and
Laplacian families share ``t(x) = -|x|`` with ``theta = lambda``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import gammaln

from . import truncnorm
from .divergences import (
    DivergenceValue,
    bregman,
    dual_duo_bregman,
    duo_bregman,
    duo_fenchel_young,
    duo_jensen,
    jensen,
)
from .errors import (
    FamilyMismatchError,
    NestingError,
    ParamError,
    SupportError,
    UnsupportedPairError,
)
from .generators import Box, ConvexGenerator, as_vector, exponential_generator, neg_log
from .support import NATURALS, POSITIVE_HALF_LINE, REAL_LINE, Interval, Lattice

FAMILIES = (
    "poisson",
    "geometric",
    "exponential",
    "laplacian",
    "half_normal",
    "normal",
    "trunc_normal",
)

# -- log-normalizers -------------------------------------------------------

POISSON_F = replace(exponential_generator(), name="poisson")


def _geometric_generator() -> ConvexGenerator:
    def func(t):
        return -math.log(-math.expm1(float(t[0])))

    def grad(t):
        return np.array([1.0 / math.expm1(-float(t[0]))])

    def hess(t):
        e = math.exp(float(t[0]))
        return np.array([[e / (1.0 - e) ** 2]])

    def conj(e):
        x = float(e[0])
        return x * math.log(x) - (1.0 + x) * math.log1p(x)

    return ConvexGenerator(
        name="geometric",
        domain=Box.interval(-math.inf, 0.0),
        func=func,
        grad_fn=grad,
        hess_fn=hess,
        conj=conj,
        conj_grad=lambda e: np.array([math.log(float(e[0]) / (1.0 + float(e[0])))]),
        grad_range=Box.interval(0.0, math.inf),
    )


GEOMETRIC_F = _geometric_generator()
EXPONENTIAL_F = replace(neg_log(), name="exponential")
LAPLACIAN_F = replace(neg_log(shift=math.log(2.0)), name="laplacian")
# Scale families in theta = 1 / sigma^2 with t(x) = -x^2 / 2.
HALF_NORMAL_SCALE_F = replace(
    neg_log(scale=0.5, shift=0.5 * math.log(math.pi / 2)), name="half_normal_scale"
)
NORMAL_SCALE_F = replace(neg_log(scale=0.5, shift=0.5 * math.log(2 * math.pi)), name="normal_scale")


# -- members ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExpFamilyMember:
    """One density of a catalog family, in canonical decomposition."""

    family_id: str
    source_params: Mapping[str, float]
    theta: np.ndarray
    support: Interval | Lattice
    base_measure: str
    log_normalizer: ConvexGenerator
    sufficient_stat: Callable[[float], np.ndarray]
    k_term: Callable[[float], float]
    nest_key: Optional[str] = None
    breakpoints: tuple = field(default=())

    @property
    def eta(self) -> np.ndarray:
        return self.log_normalizer.grad(self.theta)

    def logpdf(self, x: float) -> float:
        if not self.support.contains(x):
            return -math.inf
        t = as_vector(self.sufficient_stat(x))
        return float(self.theta @ t) - self.log_normalizer.func(self.theta) + self.k_term(x)

    def density(self, x: float, strict: bool = False) -> float:
        if not self.support.contains(x):
            if strict or self.support.discrete:
                raise SupportError(f"{x} outside the support of {self.family_id}")
            return 0.0
        return math.exp(self.logpdf(x))


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ParamError(f"{name} must be positive, got {value}")
    return float(value)


def _zero(x):
    return 0.0


def _neg_log_factorial(x):
    return -float(gammaln(x + 1.0))


def _gauss_stat(x):
    return np.array([x, x * x])


def _require(params: Mapping[str, float], *names):
    missing = [n for n in names if n not in params]
    extra = [n for n in params if n not in names]
    if missing or extra:
        raise ParamError(f"expected parameters {names}, got {tuple(params)}")
    return [float(params[n]) for n in names]


def to_natural(family_id: str, source_params: Mapping[str, float]) -> np.ndarray:
    """Natural parameter of a catalog member given its source parameters."""
    if family_id == "poisson":
        (lam,) = _require(source_params, "lambda")
        return np.array([math.log(_positive("lambda", lam))])
    if family_id == "geometric":
        (p,) = _require(source_params, "p")
        if not 0 < p < 1:
            raise ParamError(f"p must lie in (0, 1), got {p}")
        return np.array([math.log1p(-p)])
    if family_id in ("exponential", "laplacian"):
        (lam,) = _require(source_params, "lambda")
        return np.array([_positive("lambda", lam)])
    if family_id == "half_normal":
        (sigma,) = _require(source_params, "sigma")
        return np.array([0.0, -0.5 / _positive("sigma", sigma) ** 2])
    if family_id == "normal":
        m, s = _require(source_params, "m", "s")
        return truncnorm.TruncNormalParams(m, _positive("s", s)).natural
    if family_id == "trunc_normal":
        return _trunc_params(source_params).natural
    raise ParamError(f"unknown family {family_id!r}")


def _trunc_params(source_params) -> truncnorm.TruncNormalParams:
    m, s, a, b = _require(source_params, "m", "s", "a", "b")
    return truncnorm.TruncNormalParams(m, _positive("s", s), a, b)


def from_natural(family_id: str, theta, window=None) -> dict[str, float]:
    """Inverse of :func:`to_natural`."""
    theta = as_vector(theta)
    if family_id == "poisson":
        return {"lambda": math.exp(theta[0])}
    if family_id == "geometric":
        return {"p": -math.expm1(theta[0])}
    if family_id in ("exponential", "laplacian"):
        return {"lambda": float(theta[0])}
    if family_id == "half_normal":
        if theta[0] != 0.0:
            raise ParamError("half-normal members have a zero first natural coordinate")
        return {"sigma": math.sqrt(-0.5 / theta[1])}
    if family_id in ("normal", "trunc_normal"):
        a, b = window if window is not None else (-math.inf, math.inf)
        p = truncnorm.TruncNormalParams.from_natural(theta, a, b)
        if family_id == "normal":
            return {"m": p.m, "s": p.s}
        return {"m": p.m, "s": p.s, "a": p.a, "b": p.b}
    raise ParamError(f"unknown family {family_id!r}")


def generator_for(family_id: str, window=None) -> ConvexGenerator:
    if family_id == "poisson":
        return POISSON_F
    if family_id == "geometric":
        return GEOMETRIC_F
    if family_id == "exponential":
        return EXPONENTIAL_F
    if family_id == "laplacian":
        return LAPLACIAN_F
    if family_id == "half_normal":
        return truncnorm.log_normalizer(0.0, math.inf)
    if family_id == "normal":
        return truncnorm.log_normalizer()
    if family_id == "trunc_normal":
        if window is None:
            raise ParamError("truncated normal needs a window (a, b)")
        return truncnorm.log_normalizer(*window)
    raise ParamError(f"unknown family {family_id!r}")


def make_member(family_id: str, **source_params: float) -> ExpFamilyMember:
    """Build a catalog member, e.g. ``make_member("poisson", **{"lambda": 2})``."""
    theta = to_natural(family_id, source_params)
    params = MappingProxyType(dict(source_params))
    if family_id == "poisson":
        return ExpFamilyMember(
            family_id, params, theta, NATURALS, "counting", POISSON_F,
            lambda x: np.array([x]), _neg_log_factorial,
        )
    if family_id == "geometric":
        return ExpFamilyMember(
            family_id, params, theta, NATURALS, "counting", GEOMETRIC_F,
            lambda x: np.array([x]), _zero,
        )
    if family_id == "exponential":
        return ExpFamilyMember(
            family_id, params, theta, POSITIVE_HALF_LINE, "lebesgue", EXPONENTIAL_F,
            lambda x: np.array([-abs(x)]), _zero, nest_key="laplace",
        )
    if family_id == "laplacian":
        return ExpFamilyMember(
            family_id, params, theta, REAL_LINE, "lebesgue", LAPLACIAN_F,
            lambda x: np.array([-abs(x)]), _zero, nest_key="laplace", breakpoints=(0.0,),
        )
    if family_id == "half_normal":
        return ExpFamilyMember(
            family_id, params, theta, POSITIVE_HALF_LINE, "lebesgue",
            generator_for("half_normal"), _gauss_stat, _zero, nest_key="gaussian",
        )
    if family_id == "normal":
        return ExpFamilyMember(
            family_id, params, theta, REAL_LINE, "lebesgue", generator_for("normal"),
            _gauss_stat, _zero, nest_key="gaussian", breakpoints=(float(params["m"]),),
        )
    if family_id == "trunc_normal":
        tp = _trunc_params(params)
        inside = tuple(x for x in (tp.m,) if tp.a < x < tp.b)
        return ExpFamilyMember(
            family_id, params, theta, Interval(tp.a, tp.b), "lebesgue",
            generator_for("trunc_normal", tp.window), _gauss_stat, _zero,
            nest_key="gaussian", breakpoints=inside,
        )
    raise ParamError(f"unknown family {family_id!r}")


def to_moment(member: ExpFamilyMember) -> np.ndarray:
    return member.eta


def from_moment(family_id: str, eta, window=None) -> np.ndarray:
    """Natural parameter with the given moment parameter (``grad F*(eta)``)."""
    F = generator_for(family_id, window)
    return as_vector(F.conjugate().grad(eta))


def trunc_params_of(member: ExpFamilyMember) -> truncnorm.TruncNormalParams:
    """The truncated-normal view of a Gaussian-type member."""
    if member.nest_key != "gaussian":
        raise FamilyMismatchError(f"{member.family_id} is not Gaussian-type")
    return truncnorm.TruncNormalParams.from_natural(
        member.theta, member.support.lower, member.support.upper
    )


# -- Poisson auxiliary expectation -----------------------------------------


def expected_log_factorial(lam: float, tail_tol: float = 1e-14) -> tuple[float, float]:
    """``E[log x!]`` for ``x ~ Poisson(lam)`` and a bound on the dropped tail.

    Term ratios are ``lam/(k+1) * (1 + log(k+1) / log k!)``, nonincreasing for
    ``k >= 2``, so once the ratio ``r`` at ``K`` is below one the tail is at
    most ``term_K * r / (1 - r)``.
    """
    lam = _positive("lambda", lam)
    log_lam = math.log(lam)
    terms = []
    k = 2
    while True:
        lf = float(gammaln(k + 1.0))
        term = math.exp(-lam + k * log_lam - lf + math.log(lf))
        terms.append(term)
        r = lam / (k + 1) * (1.0 + math.log(k + 1) / lf)
        if r < 1.0:
            bound = term * r / (1.0 - r)
            if bound < tail_tol:
                return math.fsum(terms), bound
        k += 1


# -- divergences between members -------------------------------------------


def _same_support(p: ExpFamilyMember, q: ExpFamilyMember) -> bool:
    return p.support == q.support


def kl_same_family(p1: ExpFamilyMember, p2: ExpFamilyMember) -> DivergenceValue:
    """``KL(p1 : p2) = B_F(theta2 : theta1)``, cross-checked on the dual side."""
    if p1.family_id != p2.family_id or not _same_support(p1, p2):
        raise FamilyMismatchError(f"{p1.family_id} vs {p2.family_id} are not one family")
    F = p1.log_normalizer
    primal = bregman(F, p2.theta, p1.theta)
    if F.conj is None:
        return primal
    dual = bregman(F.conjugate(), p1.eta, p2.eta)
    return replace(
        primal,
        abs_error_estimate=primal.abs_error_estimate + abs(primal.value - dual.value),
    )


def kl_nested(p: ExpFamilyMember, q: ExpFamilyMember) -> DivergenceValue:
    """KLD from a truncated member ``p`` to a member ``q`` of the larger family.

    Equals ``B_{Fq,Fp}(theta_q : theta_p)``.  The reverse direction (``q``
    with strictly larger support) is infinite.
    """
    if p.nest_key is None or p.nest_key != q.nest_key:
        raise NestingError(f"{p.family_id} and {q.family_id} are not nested families")
    if p.support.issubset(q.support):
        return duo_bregman(q.log_normalizer, p.log_normalizer, q.theta, p.theta)
    if q.support.issubset(p.support):
        return DivergenceValue.infinity()
    raise NestingError("supports overlap without being nested")


def kl_nested_forms(p: ExpFamilyMember, q: ExpFamilyMember) -> dict[str, float]:
    """The four equal expressions of the nested KLD, for cross-checking.

    With ``F1 = F_p`` (smaller support) and ``F2 = F_q``: a duo
    Fenchel-Young divergence on either side, the primal duo Bregman
    divergence, and the dual duo Bregman divergence on moment parameters.
    """
    if p.nest_key is None or p.nest_key != q.nest_key or not p.support.issubset(q.support):
        raise NestingError(f"{p.family_id} is not nested inside {q.family_id}")
    F1, F2 = p.log_normalizer, q.log_normalizer
    t1, t2 = p.theta, q.theta
    e1, e2 = p.eta, q.eta
    return {
        "Y_F2_F1*(theta2:eta1)": duo_fenchel_young(F2, F1.conjugate(), t2, e1).value,
        "B_F2_F1(theta2:theta1)": duo_bregman(F2, F1, t2, t1).value,
        "B_F1*_F2*(eta1:eta2)": dual_duo_bregman(F2, F1, e1, e2).value,
        "Y_F1*_F2(eta1:theta2)": duo_fenchel_young(F1.conjugate(), F2, e1, t2).value,
    }


@dataclass(frozen=True)
class CrossPair:
    """Expectation hooks for one registered (P, Q) family combination.

    ``expect_tq(p)`` returns ``E_P[t_Q(x)]``; ``expect_kdiff(p)`` returns
    ``(E_P[k_P - k_Q], error bound)``.
    """

    expect_tq: Callable[[ExpFamilyMember], np.ndarray]
    expect_kdiff: Callable[[ExpFamilyMember], tuple[float, float]]


def _poisson_geometric_kdiff(p):
    value, tail = expected_log_factorial(p.source_params["lambda"])
    return -value, tail


CROSS_PAIRS: dict[tuple[str, str], CrossPair] = {
    ("poisson", "geometric"): CrossPair(
        expect_tq=lambda p: p.eta,
        expect_kdiff=_poisson_geometric_kdiff,
    ),
}

_SAME_FAMILY = CrossPair(expect_tq=lambda p: p.eta, expect_kdiff=lambda p: (0.0, 0.0))


def kl_cross_family(p: ExpFamilyMember, q: ExpFamilyMember) -> DivergenceValue:
    """``F_Q(theta') + F_P*(eta) - <theta', E_P[t_Q]> + E_P[k_P - k_Q]``.

    Works for registered family pairs and same-family pairs; nested pairs are
    delegated to :func:`kl_nested`.  A support of ``p`` not inside that of
    ``q`` gives the infinite sentinel.
    """
    if p.base_measure != q.base_measure:
        raise UnsupportedPairError("members use different base measures")
    if not p.support.issubset(q.support):
        return DivergenceValue.infinity()
    if p.family_id == q.family_id and _same_support(p, q):
        hooks = _SAME_FAMILY
    elif p.nest_key is not None and p.nest_key == q.nest_key:
        return kl_nested(p, q)
    else:
        hooks = CROSS_PAIRS.get((p.family_id, q.family_id))
        if hooks is None:
            raise UnsupportedPairError(f"no KLD formula for ({p.family_id}, {q.family_id})")
    eta = p.eta
    # Fenchel-Young equality: F_P*(eta) = <theta, eta> - F_P(theta).
    conj_p = float(p.theta @ eta) - p.log_normalizer.func(p.theta)
    kdiff, err = hooks.expect_kdiff(p)
    raw = (
        q.log_normalizer.func(q.theta)
        + conj_p
        - float(q.theta @ as_vector(hooks.expect_tq(p)))
        + kdiff
    )
    return DivergenceValue.clamped(raw, error=err)


def kl_divergence(p: ExpFamilyMember, q: ExpFamilyMember) -> DivergenceValue:
    """KLD between any two catalog members the library has a formula for."""
    if p.family_id == q.family_id and _same_support(p, q):
        return kl_same_family(p, q)
    return kl_cross_family(p, q)


def bhattacharyya(p: ExpFamilyMember, q: ExpFamilyMember, alpha: float) -> DivergenceValue:
    """Skewed Bhattacharyya distance ``-log int p^alpha q^(1-alpha)``.

    Same family: skewed Jensen divergence.  ``p`` truncated inside ``q``:
    duo Jensen divergence ``J_{Fp,Fq,alpha}``.  The reverse nesting uses
    ``D_alpha[p:q] = D_{1-alpha}[q:p]``.
    """
    if p.family_id == q.family_id and _same_support(p, q):
        return jensen(p.log_normalizer, p.theta, q.theta, alpha)
    if p.nest_key is None or p.nest_key != q.nest_key:
        raise UnsupportedPairError(f"no Bhattacharyya formula for ({p.family_id}, {q.family_id})")
    if p.support.issubset(q.support):
        return duo_jensen(p.log_normalizer, q.log_normalizer, p.theta, q.theta, alpha)
    if q.support.issubset(p.support):
        return duo_jensen(q.log_normalizer, p.log_normalizer, q.theta, p.theta, 1.0 - float(alpha))
    raise NestingError("supports overlap without being nested")


def entropy(member: ExpFamilyMember) -> tuple[float, float]:
    """Shannon/differential entropy ``F(theta) - <theta, eta> - E[k(x)]`` and
    an error bound (nonzero only for the Poisson series)."""
    if member.nest_key == "gaussian":
        return float(truncnorm.trunc_entropy(trunc_params_of(member))), 0.0
    F = member.log_normalizer
    base = F.func(member.theta) - float(member.theta @ member.eta)
    if member.family_id == "poisson":
        value, tail = expected_log_factorial(member.source_params["lambda"])
        return float(base + value), tail
    return float(base), 0.0
