"""Generator pairs ``(F1, F2)`` with ``F1 >= F2`` and samplers for their shared domain."""
import math

import numpy as np

from duodiv import families as fam
from duodiv.generators import monomial, quadratic
from duodiv.truncnorm import log_normalizer


def _scalar(lo, hi):
    return lambda rng: np.array([rng.uniform(lo, hi)])


def _gauss(rng):
    return np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1.5, -0.2)])


DOMINANCE_PAIRS = {
    "quadratic a=1": (quadratic(1.0), quadratic(1.0), _scalar(-5, 5)),
    "quadratic a=2": (quadratic(2.0), quadratic(1.0), _scalar(-5, 5)),
    "quadratic a=5": (quadratic(5.0), quadratic(1.0), _scalar(-5, 5)),
    "square/quartic": (monomial(2, 0, 1), monomial(4, 0, 1), _scalar(0.02, 0.98)),
    "poisson": (fam.POISSON_F, fam.POISSON_F, _scalar(-2, 2)),
    "geometric": (fam.GEOMETRIC_F, fam.GEOMETRIC_F, _scalar(-3, -0.1)),
    "laplacian/exponential": (fam.LAPLACIAN_F, fam.EXPONENTIAL_F, _scalar(0.2, 5)),
    "normal/half-normal scale": (fam.NORMAL_SCALE_F, fam.HALF_NORMAL_SCALE_F, _scalar(0.2, 5)),
    "normal/half-normal": (log_normalizer(), log_normalizer(0.0, math.inf), _gauss),
    "trunc(-1,2)/trunc(0,1)": (log_normalizer(-1.0, 2.0), log_normalizer(0.0, 1.0), _gauss),
}
