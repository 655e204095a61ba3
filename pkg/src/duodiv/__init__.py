"""Duo Fenchel-Young, duo Bregman and duo Jensen divergences, with an
exponential-family catalog and an independent numerical oracle."""

__version__ = "0.1.0"

from .divergences import (  # noqa: E402
    DivergenceValue,
    Method,
    bregman,
    dual_duo_bregman,
    duo_bregman,
    duo_fenchel_young,
    duo_jensen,
    itakura_saito,
    jeffreys_symmetrized_bregman,
    jensen,
    symmetrized_duo_bregman,
)
from .errors import *  # noqa: E402,F401,F403
from .generators import (  # noqa: E402
    Box,
    ConjugatePair,
    ConvexGenerator,
    check_dominance,
    gradient_inverse,
    legendre_conjugate,
    quadratic,
)
from .oracle import OracleConfig  # noqa: E402
