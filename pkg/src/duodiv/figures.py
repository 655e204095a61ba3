"""Plot data (long-format rows) for the duo squared-Euclidean surfaces and
the dominance-reversal conjugate curves.  No plotting happens here."""
from __future__ import annotations

import csv
import io
from typing import Iterable, Optional, Sequence

import numpy as np

from .divergences import duo_bregman
from .generators import ConvexGenerator, legendre_conjugate, monomial, quadratic

SURFACE_COLUMNS = ("a", "theta", "theta_prime", "value")
CURVE_COLUMNS = ("pair", "function", "x", "value")


def duo_euclid_surface(a: float, n: int = 41, lo: float = -2.0, hi: float = 2.0) -> list[dict]:
    """``B_{F1,F2}(theta : theta')`` with ``F1 = a theta^2 / 2`` and ``F2 = theta^2 / 2``.

    Dominance is not enforced, so ``a < 1`` yields the negative values the
    guarded API refuses to return.
    """
    F1, F2 = quadratic(a), quadratic(1.0)
    grid = np.linspace(lo, hi, n)
    rows = []
    for t in grid:
        for tp in grid:
            d = duo_bregman(F1, F2, [t], [tp], enforce_dominance=False)
            rows.append({"a": a, "theta": float(t), "theta_prime": float(tp), "value": d.value})
    return rows


def conjugate_curves(
    F1: ConvexGenerator,
    F2: ConvexGenerator,
    thetas: Sequence[float],
    etas: Sequence[float],
    label: str = "",
    method: str = "numeric",
) -> list[dict]:
    """Primal curves on ``thetas`` and numerically conjugated curves on ``etas``."""
    rows = []
    for name, F in (("F1", F1), ("F2", F2)):
        for t in thetas:
            rows.append({"pair": label, "function": name, "x": float(t), "value": F(np.array([t]))})
    for name, F in (("F1*", F1), ("F2*", F2)):
        for e in etas:
            v = legendre_conjugate(F, np.array([e]), method=method)
            rows.append({"pair": label, "function": name, "x": float(e), "value": v})
    return rows


def midpoint_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def square_quartic_curves(n: int = 1000) -> list[dict]:
    """``theta^2`` against ``theta^4`` on (0, 1); conjugates on the shared range (0, 2)."""
    F1, F2 = monomial(2, 0.0, 1.0), monomial(4, 0.0, 1.0)
    return conjugate_curves(F1, F2, midpoint_grid(0, 1, n), midpoint_grid(0, 2, n), "square_quartic")


def scaled_quadratic_curves(a: float, n: int = 1000, bound: float = 5.0) -> list[dict]:
    F1, F2 = quadratic(a), quadratic(1.0)
    grid = midpoint_grid(-bound, bound, n)
    return conjugate_curves(F1, F2, grid, grid, f"quadratic_a={a:g}")


def write_csv(rows: Iterable[dict], out=None, columns: Optional[Sequence[str]] = None) -> str:
    """Write rows to ``out`` (path or file object); returns the CSV text."""
    rows = list(rows)
    columns = list(columns or (rows[0].keys() if rows else ()))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    text = buf.getvalue()
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    elif out is not None:
        out.write(text)
    return text
