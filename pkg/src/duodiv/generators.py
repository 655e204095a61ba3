"""Strictly convex generators, their Legendre conjugates, and dominance.

A :class:`ConvexGenerator` bundles a function ``F`` with its gradient on a
box domain (a product of open intervals).  Conjugates are either supplied in
closed form or computed by safeguarded Newton iteration on ``grad F(t) = eta``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .errors import ConvergenceError, DomainError

MAX_ITER = 200
SOLVER_TOL = 1e-10
DOMINANCE_TOL = 1e-12
DEFAULT_CLIP = 10.0
# Iterates beyond this size toward an infinite end count as unattainable targets.
ESCAPE = 1e50


def as_vector(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class Box:
    """Product of open intervals ``(lower[i], upper[i])``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = as_vector(self.lower), as_vector(self.upper)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise DomainError(f"invalid box bounds {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def real(cls, dim: int = 1) -> Box:
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))

    @classmethod
    def interval(cls, lower: float, upper: float) -> Box:
        return cls([lower], [upper])

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = as_vector(x)
        return x.shape == self.lower.shape and bool(
            np.all(x > self.lower) and np.all(x < self.upper)
        )

    def intersect(self, other: Box) -> Optional[Box]:
        if other.dim != self.dim:
            raise DomainError("dimension mismatch between domains")
        lo = np.maximum(self.lower, other.lower)
        hi = np.minimum(self.upper, other.upper)
        if np.any(lo >= hi):
            return None
        return Box(lo, hi)

    def clipped(self, bound: float) -> tuple[np.ndarray, np.ndarray]:
        """Finite bounds obtained by intersecting with ``[-bound, bound]^D``."""
        lo = np.maximum(self.lower, -bound)
        hi = np.minimum(self.upper, bound)
        if np.any(lo >= hi):
            raise DomainError("domain does not meet the clipping box")
        return lo, hi

    def seed(self) -> np.ndarray:
        """Midpoint of bounded coordinates, 0 on the real line, and one unit
        inside the finite end of half-lines."""
        out = np.zeros(self.dim)
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                out[i] = 0.5 * (lo + hi)
            elif np.isfinite(lo):
                out[i] = max(lo + 1.0, 0.0) if lo < 0 else lo + 1.0
            elif np.isfinite(hi):
                out[i] = min(hi - 1.0, 0.0) if hi > 0 else hi - 1.0
        return out


@dataclass(frozen=True, eq=False)
class ConvexGenerator:
    """A strictly convex, differentiable function on a box domain.

    ``conj`` / ``conj_grad`` hold the closed-form Legendre conjugate and its
    gradient when known; without them conjugation is numeric.  ``grad_range``
    is the box of attainable gradients; ``domain_check`` and ``range_check``
    are optional extra membership tests for regions that are not boxes.
    """

    name: str
    domain: Box
    func: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    hess_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    conj: Optional[Callable[[np.ndarray], float]] = None
    conj_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grad_range: Optional[Box] = None
    domain_check: Optional[Callable[[np.ndarray], bool]] = None
    range_check: Optional[Callable[[np.ndarray], bool]] = None
    separable: bool = True
    inverse_seed: Optional[Callable[[np.ndarray], np.ndarray]] = None
    biconjugate: Optional["ConvexGenerator"] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def conjugate_mode(self) -> str:
        return "closed-form" if self.conj is not None else "numeric"

    def contains(self, theta) -> bool:
        theta = as_vector(theta)
        if not self.domain.contains(theta):
            return False
        return self.domain_check is None or bool(self.domain_check(theta))

    def _checked(self, theta) -> np.ndarray:
        theta = as_vector(theta)
        if not self.contains(theta):
            raise DomainError(f"{theta} outside the domain of {self.name}")
        return theta

    def __call__(self, theta) -> float:
        return float(self.func(self._checked(theta)))

    def grad(self, theta) -> np.ndarray:
        return as_vector(self.grad_fn(self._checked(theta)))

    def hess(self, theta) -> np.ndarray:
        theta = self._checked(theta)
        if self.hess_fn is not None:
            return np.atleast_2d(np.asarray(self.hess_fn(theta), dtype=float))
        return _fd_jacobian(self.grad_fn, theta)

    def numeric(self) -> ConvexGenerator:
        """Copy of this generator that forgets its closed-form conjugate."""
        return replace(self, conj=None, conj_grad=None, biconjugate=None)

    @functools.cached_property
    def _dual(self) -> ConvexGenerator:
        if self.biconjugate is not None:
            return self.biconjugate
        if self.conj is not None:
            func = self.conj
        else:
            func = functools.partial(_numeric_conjugate_value, self)
        if self.conj_grad is not None:
            grad_fn = self.conj_grad
        else:
            grad_fn = functools.partial(gradient_inverse, self)
        hess_fn = None
        if self.hess_fn is not None:
            hess_fn = lambda eta: np.linalg.inv(self.hess(grad_fn(eta)))
        return ConvexGenerator(
            name=f"{self.name}*",
            domain=self.grad_range or Box.real(self.dim),
            func=func,
            grad_fn=grad_fn,
            hess_fn=hess_fn,
            conj=self.func,
            conj_grad=self.grad_fn,
            grad_range=self.domain,
            domain_check=self.range_check,
            range_check=self.domain_check,
            separable=self.separable,
            biconjugate=self,
        )

    def conjugate(self) -> ConvexGenerator:
        """The Legendre conjugate as a generator on the gradient range."""
        return self._dual


@dataclass(frozen=True)
class ConjugatePair:
    primal: ConvexGenerator
    dual: ConvexGenerator

    @classmethod
    def of(cls, generator: ConvexGenerator) -> ConjugatePair:
        return cls(generator, generator.conjugate())


def _fd_jacobian(grad_fn, theta: np.ndarray) -> np.ndarray:
    d = theta.size
    out = np.empty((d, d))
    for i in range(d):
        h = 1e-5 * max(1.0, abs(theta[i]))
        e = np.zeros(d)
        e[i] = h
        out[:, i] = (as_vector(grad_fn(theta + e)) - as_vector(grad_fn(theta - e))) / (2 * h)
    return 0.5 * (out + out.T)


def _check_dual_point(F: ConvexGenerator, eta: np.ndarray) -> None:
    if eta.shape != (F.dim,) or not np.all(np.isfinite(eta)):
        raise DomainError(f"invalid dual point {eta} for {F.name}")
    if F.grad_range is not None and not F.grad_range.contains(eta):
        raise DomainError(f"{eta} outside the gradient range of {F.name}")
    if F.range_check is not None and not F.range_check(eta):
        raise DomainError(f"{eta} outside the gradient range of {F.name}")


def _solve_monotone(g, dg, target, lo, hi, seed, tol, max_iter):
    """Solve ``g(x) = target`` for increasing ``g`` on ``(lo, hi)``.

    Newton steps that leave the current bracket fall back to bisection, or to
    geometric expansion toward an infinite end.
    """
    L, U = lo, hi
    x = seed
    scale = max(1.0, abs(target))
    eps = np.finfo(float).eps
    blocked = False
    for _ in range(max_iter):
        if abs(x) > ESCAPE and (math.isinf(L) or math.isinf(U)):
            break
        r = g(x) - target
        if math.isnan(r):
            r = math.inf
        if abs(r) <= tol * scale:
            d = dg(x)
            if d > 0 and math.isfinite(d):
                polished = x - r / d
                if L < polished < U and abs(g(polished) - target) < abs(r):
                    return polished
            return x
        if r > 0:
            U = x
        else:
            L = x
        if math.isfinite(L) and math.isfinite(U) and U - L <= 4 * eps * max(1.0, abs(L), abs(U)):
            if L == lo or U == hi:
                blocked = True
                break
            return 0.5 * (L + U)
        d = dg(x) if math.isfinite(r) else math.nan
        x_new = x - r / d if d > 0 and math.isfinite(d) else math.nan
        if not L < x_new < U:
            if math.isfinite(L) and math.isfinite(U):
                x_new = 0.5 * (L + U)
            elif math.isfinite(L):
                x_new = L + max(1.0, 2.0 * abs(L))
            else:
                x_new = U - max(1.0, 2.0 * abs(U))
        x = x_new
    # Collapsed onto a domain bound, or ran off toward an infinite end: the
    # target is not attained.  Anything else is a plain budget overrun.
    escaped = (math.isinf(L) or math.isinf(U)) and abs(x) > ESCAPE
    if blocked or escaped:
        raise DomainError(f"target {target} is outside the gradient range")
    raise ConvergenceError(f"monotone solve for {target} did not converge in {max_iter} steps")


def gradient_inverse(
    F: ConvexGenerator, eta, *, tol: float = SOLVER_TOL, max_iter: int = MAX_ITER
) -> np.ndarray:
    """Return ``theta`` with ``grad F(theta) = eta`` (that is, ``grad F*(eta)``)."""
    eta = as_vector(eta)
    _check_dual_point(F, eta)
    seed = F.inverse_seed(eta) if F.inverse_seed is not None else F.domain.seed()
    seed = as_vector(seed)
    if not F.contains(seed):
        seed = F.domain.seed()
    if F.dim == 1 or F.separable:
        theta = seed.copy()
        for i in range(F.dim):

            def g(t, i=i):
                z = theta.copy()
                z[i] = t
                return float(F.grad_fn(z)[i])

            def dg(t, i=i):
                z = theta.copy()
                z[i] = t
                if F.hess_fn is not None:
                    return float(np.atleast_2d(F.hess_fn(z))[i, i])
                h = 1e-6 * max(1.0, abs(t))
                lo, hi = F.domain.lower[i], F.domain.upper[i]
                if t - h <= lo or t + h >= hi:
                    return math.nan
                return (g(t + h) - g(t - h)) / (2 * h)

            theta[i] = _solve_monotone(
                g, dg, float(eta[i]), F.domain.lower[i], F.domain.upper[i],
                float(seed[i]), tol, max_iter,
            )
        return theta
    try:
        return _damped_newton(F, eta, seed, tol, max_iter)
    except _LineSearchFailure:
        return _trust_region(F, eta, seed, tol, max_iter)


class _LineSearchFailure(ConvergenceError):
    pass


def _trust_region(F, eta, theta, tol, max_iter):
    # Fallback when Newton steps stop being descent directions, typically
    # after the path wandered where the Hessian is poorly resolved.
    scale = max(1.0, float(np.max(np.abs(eta))))

    def objective(t):
        return float(F.func(t)) - float(eta @ t) if F.contains(t) else math.inf

    def jac(t):
        return as_vector(F.grad_fn(t)) - eta if F.contains(t) else np.full(F.dim, math.nan)

    res = optimize.minimize(
        objective, theta, jac=jac, hess=F.hess, method="trust-ncg",
        options={"gtol": 1e-3 * tol * scale, "maxiter": max_iter},
    )
    theta = res.x
    if not F.contains(theta):
        raise ConvergenceError("trust-region fallback left the domain")
    theta = _polish(F, eta, theta, jac(theta))
    if np.max(np.abs(jac(theta))) > tol * scale:
        raise ConvergenceError(f"Newton and trust-region solvers failed to reach {tol}")
    return theta


def _damped_newton(F, eta, theta, tol, max_iter):
    scale = max(1.0, float(np.max(np.abs(eta))))

    def objective(t):
        return float(F.func(t)) - float(eta @ t)

    r = as_vector(F.grad_fn(theta)) - eta
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol * scale:
            return _polish(F, eta, theta, r)
        H = F.hess(theta)
        try:
            step = np.linalg.solve(H, r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Hessian in Newton iteration") from exc
        phi = objective(theta)
        decrease = float(r @ step)
        t = 1.0
        blocked_by_domain = False
        while t > 1e-14:
            cand = theta - t * step
            if F.contains(cand):
                r_new = as_vector(F.grad_fn(cand)) - eta
                phi_new = objective(cand)
                if phi_new <= phi - 1e-4 * t * decrease or np.linalg.norm(r_new) < np.linalg.norm(r):
                    break
            else:
                blocked_by_domain = True
            t *= 0.5
        else:
            if blocked_by_domain:
                raise DomainError(f"{eta} appears outside the gradient range of {F.name}")
            raise _LineSearchFailure("line search failed in damped Newton iteration")
        theta, r = cand, r_new
    raise ConvergenceError(f"damped Newton did not reach {tol} in {max_iter} steps")


def _polish(F, eta, theta, r, steps: int = 3):
    # A small gradient residual can still hide a large error in theta when
    # the Hessian is ill-conditioned; full Newton steps fix that cheaply.
    for _ in range(steps):
        try:
            cand = theta - np.linalg.solve(F.hess(theta), r)
        except np.linalg.LinAlgError:
            break
        if not F.contains(cand):
            break
        r_new = as_vector(F.grad_fn(cand)) - eta
        if not np.linalg.norm(r_new) < np.linalg.norm(r):
            break
        theta, r = cand, r_new
    return theta


def _numeric_conjugate_value(F: ConvexGenerator, eta) -> float:
    eta = as_vector(eta)
    theta = gradient_inverse(F, eta)
    return float(eta @ theta) - float(F.func(theta))


def legendre_conjugate(F: ConvexGenerator, eta, method: str = "auto") -> float:
    """Evaluate ``F*(eta) = sup_theta <eta, theta> - F(theta)``.

    ``method`` is ``"auto"`` (closed form when available), ``"closed"`` or
    ``"numeric"``.
    """
    eta = as_vector(eta)
    _check_dual_point(F, eta)
    if method not in ("auto", "closed", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" and F.conj is None:
        raise ValueError(f"{F.name} has no closed-form conjugate")
    if F.conj is not None and method != "numeric":
        return float(F.conj(eta))
    return _numeric_conjugate_value(F, eta)


def check_dominance(
    F1: ConvexGenerator,
    F2: ConvexGenerator,
    sample_count: int = 1000,
    *,
    clip: float = DEFAULT_CLIP,
) -> bool:
    """True iff ``F1 >= F2`` on a Halton grid over the shared domain.

    Pairs of conjugates are compared through their primal functions, since
    conjugation reverses pointwise order.
    """
    return _check_dominance(F1, F2, int(sample_count), float(clip))


@functools.lru_cache(maxsize=4096)
def _check_dominance(F1, F2, sample_count, clip):
    if F1 is F2:
        return True
    if F1.biconjugate is not None and F2.biconjugate is not None:
        return _check_dominance(F2.biconjugate, F1.biconjugate, sample_count, clip)
    shared = F1.domain.intersect(F2.domain)
    if shared is None:
        raise DomainError(f"domains of {F1.name} and {F2.name} do not intersect")
    lo, hi = shared.clipped(clip)
    if shared.dim == 1:
        u = (np.arange(sample_count) + 0.5) / sample_count
        u = u[:, None]
    else:
        u = qmc.Halton(d=shared.dim, scramble=False).random(sample_count + 1)[1:]
    points = lo + u * (hi - lo)
    for p in points:
        if not (F1.contains(p) and F2.contains(p)):
            continue
        f1, f2 = float(F1.func(p)), float(F2.func(p))
        if f1 < f2 - DOMINANCE_TOL * max(1.0, abs(f1), abs(f2)):
            return False
    return True


# -- elementary generators -------------------------------------------------


def quadratic(a: float = 1.0, dim: int = 1) -> ConvexGenerator:
    """``(a/2) |theta|^2`` on the whole space."""
    if not a > 0:
        raise DomainError("quadratic generator needs a > 0")
    return ConvexGenerator(
        name=f"quadratic(a={a:g})",
        domain=Box.real(dim),
        func=lambda t: 0.5 * a * float(t @ t),
        grad_fn=lambda t: a * t,
        hess_fn=lambda t: a * np.eye(t.size),
        conj=lambda e: float(e @ e) / (2 * a),
        conj_grad=lambda e: e / a,
        grad_range=Box.real(dim),
    )


def monomial(power: float, lower: float = -math.inf, upper: float = math.inf) -> ConvexGenerator:
    """``theta ** power`` on ``(lower, upper)``.

    Even integer powers are allowed on any interval; other powers ``> 1``
    need ``lower >= 0``.
    """
    p = float(power)
    even = p.is_integer() and int(p) % 2 == 0
    if p <= 1 or not (even or lower >= 0):
        raise DomainError("monomial needs an even power or power > 1 on a nonnegative interval")
    q = p / (p - 1)

    def odd_pow(x, k):
        return math.copysign(abs(x) ** k, x)

    def grad_at(x):
        return p * odd_pow(x, p - 1)

    return ConvexGenerator(
        name=f"theta^{p:g}",
        domain=Box.interval(lower, upper),
        func=lambda t: abs(float(t[0])) ** p,
        grad_fn=lambda t: np.array([grad_at(float(t[0]))]),
        hess_fn=lambda t: np.array([[p * (p - 1) * abs(float(t[0])) ** (p - 2)]]),
        conj=lambda e: (p - 1) * abs(float(e[0]) / p) ** q,
        conj_grad=lambda e: np.array([odd_pow(float(e[0]) / p, 1 / (p - 1))]),
        grad_range=Box.interval(
            grad_at(lower) if math.isfinite(lower) else -math.inf,
            grad_at(upper) if math.isfinite(upper) else math.inf,
        ),
    )


def neg_log(scale: float = 1.0, shift: float = 0.0) -> ConvexGenerator:
    """``-scale * log(theta) + shift`` on the positive half-line."""

    def conj(e):
        theta = -scale / float(e[0])
        return -scale + scale * math.log(theta) - shift

    return ConvexGenerator(
        name=f"-{scale:g}log+{shift:g}",
        domain=Box.interval(0.0, math.inf),
        func=lambda t: -scale * math.log(float(t[0])) + shift,
        grad_fn=lambda t: np.array([-scale / float(t[0])]),
        hess_fn=lambda t: np.array([[scale / float(t[0]) ** 2]]),
        conj=conj,
        conj_grad=lambda e: np.array([-scale / float(e[0])]),
        grad_range=Box.interval(-math.inf, 0.0),
    )


def exponential_generator() -> ConvexGenerator:
    """``exp(theta)``: the Poisson log-normalizer."""

    def conj(e):
        x = float(e[0])
        return x * math.log(x) - x

    return ConvexGenerator(
        name="exp",
        domain=Box.real(1),
        func=lambda t: math.exp(float(t[0])),
        grad_fn=lambda t: np.exp(t),
        hess_fn=lambda t: np.diag(np.exp(t)),
        conj=conj,
        conj_grad=lambda e: np.log(e),
        grad_range=Box.interval(0.0, math.inf),
    )
