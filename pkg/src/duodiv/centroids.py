"""Sided centroids of a point set under a duo Bregman divergence.

The right centroid minimizes ``sum_i B_{F1,F2}(theta_i : c)`` and is the
center of mass whatever the pair.  The left centroid minimizes
``sum_i B_{F1,F2}(c : theta_i)``; setting its gradient to zero gives
``c = (grad F1)^{-1}(mean_i grad F2(theta_i))``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .divergences import duo_bregman
from .errors import DomainError, DominanceError, ParamError
from .generators import ConvexGenerator, as_vector, check_dominance, gradient_inverse


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, init=False)
class CentroidProblem:
    points: tuple
    F1: ConvexGenerator
    F2: ConvexGenerator
    side: Side = Side.RIGHT

    def __init__(self, points: Sequence, F1: ConvexGenerator, F2: Optional[ConvexGenerator] = None,
                 side: Side | str = Side.RIGHT, *, enforce_dominance: bool = True):
        F2 = F1 if F2 is None else F2
        pts = tuple(as_vector(p) for p in points)
        if not pts:
            raise ParamError("a centroid needs at least one point")
        if len({p.size for p in pts}) != 1 or pts[0].size != F1.dim:
            raise ParamError("points must all have the generator dimension")
        for p in pts:
            if not (F1.contains(p) and F2.contains(p)):
                raise DomainError(f"{p} outside the shared domain of {F1.name} and {F2.name}")
        if enforce_dominance and not check_dominance(F1, F2):
            raise DominanceError(f"{F1.name} does not dominate {F2.name}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "F1", F1)
        object.__setattr__(self, "F2", F2)
        object.__setattr__(self, "side", Side(side))

    @property
    def array(self) -> np.ndarray:
        return np.stack(self.points)


def right_centroid(prob: CentroidProblem) -> np.ndarray:
    return prob.array.mean(axis=0)


def left_centroid(prob: CentroidProblem) -> np.ndarray:
    """``(grad F1)^{-1}`` of the averaged ``grad F2``.

    Raises DomainError when the average gradient is not attained by F1; no
    projection is attempted.
    """
    eta_bar = np.mean([prob.F2.grad(p) for p in prob.points], axis=0)
    return gradient_inverse(prob.F1, eta_bar)


def centroid(prob: CentroidProblem) -> np.ndarray:
    return left_centroid(prob) if prob.side is Side.LEFT else right_centroid(prob)


def centroid_objective(prob: CentroidProblem, c) -> float:
    """Averaged divergence with ``c`` in the slot given by ``prob.side``."""
    c = as_vector(c)
    total = 0.0
    for p in prob.points:
        if prob.side is Side.LEFT:
            d = duo_bregman(prob.F1, prob.F2, c, p, enforce_dominance=False)
        else:
            d = duo_bregman(prob.F1, prob.F2, p, c, enforce_dominance=False)
        total += d.value
    return total / len(prob.points)


def perturbation_violations(
    prob: CentroidProblem,
    c,
    count: int = 100,
    rng: Optional[np.random.Generator] = None,
    min_frac: float = 0.01,
    max_frac: float = 0.10,
) -> int:
    """Count random in-domain perturbations of ``c`` that do not increase the objective.

    Step lengths are drawn between ``min_frac`` and ``max_frac`` of the
    point spread (1 when all points coincide), in random directions.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    c = as_vector(c)
    arr = prob.array
    spread = float(np.max(arr.max(axis=0) - arr.min(axis=0)))
    spread = spread if spread > 0 else 1.0
    base = centroid_objective(prob, c)
    bad = done = tries = 0
    while done < count:
        tries += 1
        if tries > 100 * count:
            raise DomainError("could not draw in-domain perturbations")
        direction = rng.normal(size=c.size)
        direction /= np.linalg.norm(direction)
        q = c + rng.uniform(min_frac, max_frac) * spread * direction
        if not (prob.F1.contains(q) and prob.F2.contains(q)):
            continue
        done += 1
        if not centroid_objective(prob, q) > base:
            bad += 1
    return bad
