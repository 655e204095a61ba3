"""Support descriptors for densities: open intervals and the lattice of
nonnegative integers."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lower, upper)`` carrying Lebesgue measure."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty interval ({self.lower}, {self.upper})")

    @property
    def discrete(self) -> bool:
        return False

    def contains(self, x: float) -> bool:
        return self.lower < x < self.upper

    def issubset(self, other) -> bool:
        if not isinstance(other, Interval):
            return False
        return other.lower <= self.lower and self.upper <= other.upper

    def intersect(self, other: Interval) -> Interval | None:
        lo, hi = max(self.lower, other.lower), min(self.upper, other.upper)
        return Interval(lo, hi) if lo < hi else None


@dataclass(frozen=True)
class Lattice:
    """Integers ``lower, lower + 1, ...`` carrying counting measure."""

    lower: int = 0

    @property
    def discrete(self) -> bool:
        return True

    def contains(self, x) -> bool:
        return float(x).is_integer() and x >= self.lower

    def issubset(self, other) -> bool:
        return isinstance(other, Lattice) and other.lower <= self.lower

    def intersect(self, other: Lattice) -> Lattice:
        return Lattice(max(self.lower, other.lower))


REAL_LINE = Interval()
POSITIVE_HALF_LINE = Interval(0.0, math.inf)
NATURALS = Lattice(0)
