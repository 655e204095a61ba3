"""Bregman, Fenchel-Young and Jensen divergences and their two-generator
("duo") variants.

Every duo form has a dominance precondition between its generators.  It is
checked on entry and raises :class:`DominanceError` unless the caller passes
``enforce_dominance=False``, in which case the raw (possibly negative) value
is returned untouched.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AlphaError, DomainError, DominanceError
from .generators import ConvexGenerator, as_vector, check_dominance

NEGATIVE_SLACK = 1e-10


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence together with how it was obtained.

    An infinite divergence is flagged by ``infinite=True`` with ``value=None``
    so that no float infinity leaks into later arithmetic.
    """

    value: Optional[float]
    method: Method = Method.CLOSED_FORM
    abs_error_estimate: float = 0.0
    infinite: bool = False

    @classmethod
    def infinity(cls, method: Method = Method.CLOSED_FORM) -> DivergenceValue:
        return cls(None, method, 0.0, True)

    @classmethod
    def clamped(cls, raw: float, method: Method = Method.CLOSED_FORM, error: float = 0.0):
        """Clamp roundoff-sized negatives to zero, recording the clamp."""
        if -NEGATIVE_SLACK <= raw < 0.0:
            return cls(0.0, method, error + abs(raw))
        return cls(float(raw), method, error)

    def __float__(self) -> float:
        return math.inf if self.infinite else float(self.value)


def _in_domain(F: ConvexGenerator, *points) -> list[np.ndarray]:
    out = []
    for p in points:
        p = as_vector(p)
        if not F.contains(p):
            raise DomainError(f"{p} outside the domain of {F.name}")
        out.append(p)
    return out


def _require_dominance(F_big: ConvexGenerator, F_small: ConvexGenerator, enforce: bool):
    if enforce and not check_dominance(F_big, F_small):
        raise DominanceError(f"{F_big.name} does not dominate {F_small.name}")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise AlphaError(f"alpha={alpha} must lie in (0, 1)")
    return alpha


def _result(raw: float, enforce: bool) -> DivergenceValue:
    return DivergenceValue.clamped(raw) if enforce else DivergenceValue(float(raw))


def bregman(F: ConvexGenerator, theta1, theta2) -> DivergenceValue:
    """``F(t1) - F(t2) - <t1 - t2, grad F(t2)>``."""
    t1, t2 = _in_domain(F, theta1, theta2)
    raw = F.func(t1) - F.func(t2) - float((t1 - t2) @ as_vector(F.grad_fn(t2)))
    return DivergenceValue.clamped(raw)


def duo_bregman(
    F1: ConvexGenerator, F2: ConvexGenerator, theta, theta_p, *, enforce_dominance: bool = True
) -> DivergenceValue:
    """``F1(t) - F2(t') - <t - t', grad F2(t')>`` for ``F1 >= F2``."""
    _require_dominance(F1, F2, enforce_dominance)
    t, tp = _in_domain(F1, theta, theta_p)
    _in_domain(F2, t, tp)
    raw = F1.func(t) - F2.func(tp) - float((t - tp) @ as_vector(F2.grad_fn(tp)))
    return _result(raw, enforce_dominance)


def duo_fenchel_young(
    F1: ConvexGenerator, F2dual: ConvexGenerator, theta, eta_p, *, enforce_dominance: bool = True
) -> DivergenceValue:
    """``F1(t) + F2*(eta') - <t, eta'>`` where ``F2dual`` is ``F2*``."""
    if enforce_dominance:
        _require_dominance(F1, F2dual.conjugate(), True)
    (t,) = _in_domain(F1, theta)
    (ep,) = _in_domain(F2dual, eta_p)
    raw = F1.func(t) + F2dual.func(ep) - float(t @ ep)
    return _result(raw, enforce_dominance)


def dual_duo_bregman(
    F1: ConvexGenerator, F2: ConvexGenerator, eta_p, eta, *, enforce_dominance: bool = True
) -> DivergenceValue:
    """``F2*(eta') - F1*(eta) - <eta' - eta, grad F1*(eta)>``.

    Equals ``duo_bregman(F1, F2, t, t')`` when ``eta = grad F1(t)`` and
    ``eta' = grad F2(t')``.
    """
    _require_dominance(F1, F2, enforce_dominance)
    F1s, F2s = F1.conjugate(), F2.conjugate()
    (e,) = _in_domain(F1s, eta)
    (ep,) = _in_domain(F2s, eta_p)
    theta = as_vector(F1s.grad_fn(e))
    raw = F2s.func(ep) - F1s.func(e) - float((ep - e) @ theta)
    return _result(raw, enforce_dominance)


def jensen(F: ConvexGenerator, theta1, theta2, alpha: float) -> DivergenceValue:
    """Skewed Jensen divergence ``a F(t1) + (1-a) F(t2) - F(a t1 + (1-a) t2)``."""
    alpha = _check_alpha(alpha)
    t1, t2 = _in_domain(F, theta1, theta2)
    (mix,) = _in_domain(F, alpha * t1 + (1 - alpha) * t2)
    raw = alpha * F.func(t1) + (1 - alpha) * F.func(t2) - F.func(mix)
    return DivergenceValue.clamped(raw)


def duo_jensen(
    F1: ConvexGenerator,
    F2: ConvexGenerator,
    theta1,
    theta2,
    alpha: float,
    *,
    enforce_dominance: bool = True,
) -> DivergenceValue:
    """``a F1(t1) + (1-a) F2(t2) - F1(a t1 + (1-a) t2)``.

    Note the order: this one needs ``F2 >= F1``.
    """
    alpha = _check_alpha(alpha)
    _require_dominance(F2, F1, enforce_dominance)
    (t1,) = _in_domain(F1, theta1)
    (t2,) = _in_domain(F2, theta2)
    (mix,) = _in_domain(F1, alpha * t1 + (1 - alpha) * t2)
    raw = alpha * F1.func(t1) + (1 - alpha) * F2.func(t2) - F1.func(mix)
    return _result(raw, enforce_dominance)


def symmetrized_duo_bregman(
    F1: ConvexGenerator, F2: ConvexGenerator, theta1, theta2, *, enforce_dominance: bool = True
) -> DivergenceValue:
    """``B_{F1,F2}(t1:t2) + B_{F1,F2}(t2:t1)``."""
    forward = duo_bregman(F1, F2, theta1, theta2, enforce_dominance=enforce_dominance)
    backward = duo_bregman(F1, F2, theta2, theta1, enforce_dominance=enforce_dominance)
    return DivergenceValue(
        forward.value + backward.value,
        abs_error_estimate=forward.abs_error_estimate + backward.abs_error_estimate,
    )


def symmetrized_duo_bregman_expanded(F1: ConvexGenerator, F2: ConvexGenerator, theta1, theta2) -> float:
    """Gradient-gap plus generator-gap form of the symmetrized duo Bregman divergence."""
    t1, t2 = as_vector(theta1), as_vector(theta2)
    gap = F2.grad(t1) - F2.grad(t2)
    return float((t1 - t2) @ gap) + (F1(t1) - F2(t1) + F1(t2) - F2(t2))


def jeffreys_symmetrized_bregman(F: ConvexGenerator, theta1, theta2) -> DivergenceValue:
    """``<t2 - t1, grad F(t2) - grad F(t1)>``, the sum of both Bregman sides."""
    t1, t2 = _in_domain(F, theta1, theta2)
    raw = float((t2 - t1) @ (as_vector(F.grad_fn(t2)) - as_vector(F.grad_fn(t1))))
    return DivergenceValue.clamped(raw)


def itakura_saito(lam1: float, lam2: float) -> float:
    r = lam1 / lam2
    return r - math.log(r) - 1.0
