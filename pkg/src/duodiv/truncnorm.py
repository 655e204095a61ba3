"""Univariate truncated normal distributions as a family of nested
exponential families, one per truncation window ``(a, b)``.

Natural parameter ``theta = (m / s^2, -1 / (2 s^2))`` with sufficient
statistic ``t(x) = (x, x^2)``.  Infinite bounds are handled exactly through
the limits ``phi(+-inf) = 0`` and ``x phi(x) -> 0``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .divergences import DivergenceValue, duo_bregman
from .errors import DegenerateError, DomainError, ParamError
from .generators import Box, ConvexGenerator, as_vector

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
SQRT_2PI = math.sqrt(2 * math.pi)


def erf(x: float) -> float:
    """Error function ``(2/sqrt(pi)) int_0^x exp(-t^2) dt``."""
    return math.erf(x)


def std_pdf(x: float) -> float:
    if math.isinf(x):
        return 0.0
    return math.exp(-0.5 * x * x - LOG_SQRT_2PI)


def std_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def log_mass(alpha: float, beta: float) -> float:
    """``log(Phi(beta) - Phi(alpha))`` without cancellation in either tail."""
    if not alpha < beta:
        raise DegenerateError(f"empty standardized window ({alpha}, {beta})")
    if alpha < 0.0 < beta:
        # Opposite signs: erf terms do not cancel.
        out = math.log(0.5 * (math.erf(beta / math.sqrt(2)) - math.erf(alpha / math.sqrt(2))))
    else:
        if alpha >= 0.0:
            alpha, beta = -beta, -alpha
        hi, lo = float(log_ndtr(beta)), float(log_ndtr(alpha))
        out = hi + math.log1p(-math.exp(lo - hi)) if lo > -math.inf else hi
    if not math.isfinite(out):
        raise DegenerateError(f"window ({alpha}, {beta}) carries no representable mass")
    return out


def _pdf_ratio(x: float, logm: float) -> float:
    """``phi(x) / (Phi(beta) - Phi(alpha))``."""
    if math.isinf(x):
        return 0.0
    return math.exp(-0.5 * x * x - LOG_SQRT_2PI - logm)


@dataclass(frozen=True)
class TruncNormalParams:
    """Location ``m`` and scale ``s`` of the parent normal, window ``(a, b)``."""

    m: float
    s: float
    a: float = -math.inf
    b: float = math.inf

    def __post_init__(self):
        if not math.isfinite(self.m):
            raise ParamError("location m must be finite")
        if not (math.isfinite(self.s) and self.s > 0):
            raise ParamError("scale s must be positive")
        if not self.a < self.b or math.isnan(self.a) or math.isnan(self.b):
            raise ParamError(f"need a < b, got ({self.a}, {self.b})")

    @property
    def alpha(self) -> float:
        return (self.a - self.m) / self.s

    @property
    def beta(self) -> float:
        return (self.b - self.m) / self.s

    @property
    def window(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def natural(self) -> np.ndarray:
        return np.array([self.m / self.s**2, -0.5 / self.s**2])

    @classmethod
    def from_natural(cls, theta, a: float = -math.inf, b: float = math.inf) -> TruncNormalParams:
        t1, t2 = as_vector(theta)
        if not t2 < 0:
            raise DomainError("second natural coordinate must be negative")
        var = -0.5 / t2
        return cls(t1 * var, math.sqrt(var), a, b)


def _standard_window(theta: np.ndarray, a: float, b: float):
    t1, t2 = float(theta[0]), float(theta[1])
    var = -0.5 / t2
    m, s = t1 * var, math.sqrt(var)
    return m, s, (a - m) / s, (b - m) / s


def partition(p: TruncNormalParams) -> float:
    """``sqrt(2 pi) s (Phi(beta) - Phi(alpha))``."""
    return SQRT_2PI * p.s * math.exp(log_mass(p.alpha, p.beta))


def _ratios(alpha: float, beta: float):
    logm = log_mass(alpha, beta)
    ra, rb = _pdf_ratio(alpha, logm), _pdf_ratio(beta, logm)
    dphi = rb - ra
    xa = 0.0 if math.isinf(alpha) else alpha * ra
    xb = 0.0 if math.isinf(beta) else beta * rb
    return logm, ra, rb, dphi, xb - xa


def trunc_moments(p: TruncNormalParams) -> tuple[float, float]:
    """Mean and variance of the truncated normal."""
    mean, v2, _, _ = _central_moments(p.m, p.s, p.a, p.b, order=2)
    return mean, v2


def moment_parameter(p: TruncNormalParams) -> np.ndarray:
    """``eta = (E[x], E[x^2])``."""
    mean, var = trunc_moments(p)
    return np.array([mean, var + mean * mean])


def _standard_raw_moments(alpha: float, beta: float, order: int) -> list[float]:
    """``E[Z^k]`` for the standard normal truncated to ``(alpha, beta)``.

    Uses ``M_k = (k-1) M_{k-2} - (beta^{k-1} phi(beta) - alpha^{k-1} phi(alpha)) / D``.
    """
    logm = log_mass(alpha, beta)
    ra, rb = _pdf_ratio(alpha, logm), _pdf_ratio(beta, logm)

    def edge(x, r, k):
        return 0.0 if math.isinf(x) else x ** (k - 1) * r

    moments = [1.0, -(rb - ra)]
    for k in range(2, order + 1):
        moments.append((k - 1) * moments[k - 2] - (edge(beta, rb, k) - edge(alpha, ra, k)))
    return moments


TAIL = 5.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _edge_moments(c: float, w: float) -> tuple[float, float, float, float]:
    """Mean and central moments 2..4 of ``v`` with density ``exp(-c v - v^2/2)`` on ``(0, w)``.

    Every term is positive, so nothing cancels however large ``c`` is.
    """
    reach = 80.0 / (c + math.sqrt(c * c + 160.0))  # c v + v^2/2 = 40
    hi = min(w, reach)
    v = 0.5 * hi * (_GL_NODES + 1.0)
    wt = _GL_WEIGHTS * np.exp(-c * v - 0.5 * v * v)
    wt /= wt.sum()
    ev = float(wt @ v)
    d = v - ev
    d2 = d * d
    return ev, float(wt @ d2), float(wt @ (d2 * d)), float(wt @ (d2 * d2))


def _central_moments(m: float, s: float, a: float, b: float, order: int = 4):
    """Mean of ``x`` and its central moments of order 2..4 (``None`` above ``order``)."""
    alpha, beta = (a - m) / s, (b - m) / s
    if beta <= -TAIL or alpha >= TAIL:
        # Far tail: measure from the near edge, where the density peaks.
        if beta <= -TAIL:
            edge, sign, c = b, -1.0, -beta
        else:
            edge, sign, c = a, 1.0, alpha
        ev, c2, c3, c4 = _edge_moments(c, beta - alpha)
        f = sign * s
        return edge + f * ev, f * f * c2, f**3 * c3, f**4 * c4
    if order <= 2:
        _, _, _, dphi, xphi = _ratios(alpha, beta)
        return m - s * dphi, s * s * (1.0 - xphi - dphi * dphi), None, None
    z = _standard_raw_moments(alpha, beta, 4)
    # Central moments about the truncated mean keep the cancellation small.
    mu_z = z[1]
    c2 = z[2] - mu_z**2
    c3 = z[3] - 3 * mu_z * z[2] + 2 * mu_z**3
    c4 = z[4] - 4 * mu_z * z[3] + 6 * mu_z**2 * z[2] - 3 * mu_z**4
    return m + s * mu_z, s**2 * c2, s**3 * c3, s**4 * c4


def _sufficient_covariance(theta: np.ndarray, a: float, b: float) -> np.ndarray:
    m, s, _, _ = _standard_window(theta, a, b)
    mu, v2, v3, v4 = _central_moments(m, s, a, b)
    # With y = x - mu: x^2 = y^2 + 2 mu y + mu^2.
    cov_x_x2 = v3 + 2 * mu * v2
    var_x2 = v4 - v2**2 + 4 * mu * v3 + 4 * mu**2 * v2
    return np.array([[v2, cov_x_x2], [cov_x_x2, var_x2]])


def _moment_matched_seed(eta: np.ndarray) -> np.ndarray:
    var = eta[1] - eta[0] ** 2
    if not var > 0:
        return np.array([0.0, -0.5])
    return np.array([eta[0] / var, -0.5 / var])


@functools.lru_cache(maxsize=512)
def log_normalizer(a: float = -math.inf, b: float = math.inf) -> ConvexGenerator:
    """``F_{a,b}(theta) = -theta_1^2 / (4 theta_2) + log Z_{a,b}(theta)``.

    The full line gets its closed-form conjugate (negative normal entropy);
    truncated windows are conjugated numerically.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ParamError(f"need a < b, got ({a}, {b})")
    full = math.isinf(a) and math.isinf(b)

    def func(theta):
        m, s, alpha, beta = _standard_window(theta, a, b)
        return 0.5 * m * m / (s * s) + LOG_SQRT_2PI + math.log(s) + log_mass(alpha, beta)

    def grad(theta):
        m, s, alpha, beta = _standard_window(theta, a, b)
        return moment_parameter(TruncNormalParams(m, s, a, b))

    def hess(theta):
        return _sufficient_covariance(theta, a, b)

    def in_moment_range(eta):
        e1, e2 = float(eta[0]), float(eta[1])
        if not (a < e1 < b and e2 > e1 * e1):
            return False
        if math.isfinite(a) and math.isfinite(b):
            return e2 < (a + b) * e1 - a * b
        return True

    conj = conj_grad = None
    if full:

        def conj(eta):
            var = float(eta[1] - eta[0] ** 2)
            return -0.5 * math.log(2 * math.pi * math.e * var)

        def conj_grad(eta):
            var = float(eta[1] - eta[0] ** 2)
            return np.array([eta[0] / var, -0.5 / var])

    return ConvexGenerator(
        name=f"truncnormal({a:g},{b:g})",
        domain=Box([-math.inf, -math.inf], [math.inf, 0.0]),
        func=func,
        grad_fn=grad,
        hess_fn=hess,
        conj=conj,
        conj_grad=conj_grad,
        range_check=in_moment_range,
        separable=False,
        inverse_seed=_moment_matched_seed,
    )


def log_normalizer_source(p: TruncNormalParams) -> float:
    """The log-normalizer written in source parameters ``(m, s)``."""
    return (
        p.m**2 / (2 * p.s**2)
        + 0.5 * math.log(2 * math.pi * p.s**2)
        + log_mass(p.alpha, p.beta)
    )


def is_nested(inner: TruncNormalParams, outer: TruncNormalParams) -> bool:
    return outer.a <= inner.a and inner.b <= outer.b


def kl_trunc_normal(p1: TruncNormalParams, p2: TruncNormalParams) -> DivergenceValue:
    """KLD between truncated normals with ``(a1, b1)`` inside ``(a2, b2)``.

    Evaluated as the duo Bregman divergence ``B_{F2,F1}(theta2 : theta1)``;
    a window not contained in the second one gives the infinite sentinel.
    """
    if not is_nested(p1, p2):
        return DivergenceValue.infinity()
    F1, F2 = log_normalizer(p1.a, p1.b), log_normalizer(p2.a, p2.b)
    return duo_bregman(F2, F1, p2.natural, p1.natural)


def kl_trunc_normal_expanded(p1: TruncNormalParams, p2: TruncNormalParams) -> float:
    """Regression reference: the same KLD expanded in source parameters.

    The location terms are ``m^2 / (2 s^2)``, as the source-form
    log-normalizer requires.
    """
    if not is_nested(p1, p2):
        return math.inf
    e1, e2 = moment_parameter(p1)
    log_z_ratio = math.log(partition(p2)) - math.log(partition(p1))
    return (
        p2.m**2 / (2 * p2.s**2)
        - p1.m**2 / (2 * p1.s**2)
        + log_z_ratio
        - (p2.m / p2.s**2 - p1.m / p1.s**2) * e1
        - (1 / (2 * p1.s**2) - 1 / (2 * p2.s**2)) * e2
    )


def kl_normal(m1: float, s1: float, m2: float, s2: float) -> float:
    """Closed-form KLD between two untruncated normals."""
    return 0.5 * (math.log(s2**2 / s1**2) + s1**2 / s2**2 + (m2 - m1) ** 2 / s2**2 - 1.0)


def trunc_entropy(p: TruncNormalParams) -> float:
    """Differential entropy of the truncated normal."""
    logm, ra, rb, _, _ = _ratios(p.alpha, p.beta)
    xa = 0.0 if math.isinf(p.alpha) else p.alpha * ra
    xb = 0.0 if math.isinf(p.beta) else p.beta * rb
    return 0.5 * math.log(2 * math.pi * math.e) + math.log(p.s) + logm + 0.5 * (xa - xb)
