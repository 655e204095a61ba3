import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from duodiv import families as fam
from duodiv.errors import ConvergenceError, DomainError
from duodiv.generators import (
    Box,
    ConjugatePair,
    check_dominance,
    exponential_generator,
    gradient_inverse,
    legendre_conjugate,
    monomial,
    neg_log,
    quadratic,
)
from duodiv.oracle import OracleConfig, finite_diff_grad
from duodiv.truncnorm import log_normalizer

# (generator, strategy for interior theta)
_finite = dict(allow_nan=False, allow_infinity=False)
CATALOG = {
    "quadratic": (quadratic(2.0), st.floats(-5, 5, **_finite)),
    "theta^2 on (0,1)": (monomial(2, 0, 1), st.floats(0.01, 0.99)),
    "theta^4 on (0,1)": (monomial(4, 0, 1), st.floats(0.01, 0.99)),
    "poisson": (fam.POISSON_F, st.floats(-3, 3)),
    "geometric": (fam.GEOMETRIC_F, st.floats(-4, -0.05)),
    "exponential": (fam.EXPONENTIAL_F, st.floats(0.1, 10)),
    "laplacian": (fam.LAPLACIAN_F, st.floats(0.1, 10)),
    "half_normal_scale": (fam.HALF_NORMAL_SCALE_F, st.floats(0.1, 10)),
    "normal_scale": (fam.NORMAL_SCALE_F, st.floats(0.1, 10)),
}
CLOSED_FORM = ["quadratic", "theta^2 on (0,1)", "theta^4 on (0,1)", "poisson", "geometric",
               "exponential", "laplacian", "half_normal_scale", "normal_scale"]

gauss_theta = st.tuples(st.floats(-2, 2), st.floats(-2.0, -0.1)).map(np.array)
GAUSS = {
    "normal": log_normalizer(),
    "half_normal": log_normalizer(0.0, math.inf),
    "trunc(-1,2)": log_normalizer(-1.0, 2.0),
}


def _scalar(name):
    F, strat = CATALOG[name]
    return F, strat.map(lambda x: np.array([x]))


# -- legendre_conjugate examples -------------------------------------------


def test_conjugate_of_square():
    assert legendre_conjugate(monomial(2), [1.0]) == pytest.approx(0.25, abs=1e-12)
    assert legendre_conjugate(monomial(2), [1.0], method="numeric") == pytest.approx(0.25, abs=1e-10)


def test_conjugate_of_quartic_on_unit_interval():
    F = monomial(4, 0.0, 1.0)
    expected = 3 / 4 ** (4 / 3)
    assert expected == pytest.approx(0.472470, abs=1e-6)
    assert legendre_conjugate(F, [1.0]) == pytest.approx(expected, abs=1e-12)
    assert legendre_conjugate(F, [1.0], method="numeric") == pytest.approx(expected, abs=1e-10)
    grid = np.arange(0.0, 1.0 + 1e-12, 1e-6)
    assert np.max(grid - grid**4) == pytest.approx(expected, abs=1e-9)


def test_conjugate_of_scaled_quadratic():
    F = quadratic(2.0)
    assert legendre_conjugate(F, [2.0]) == pytest.approx(1.0, abs=1e-12)
    assert legendre_conjugate(F, [2.0], method="numeric") == pytest.approx(1.0, abs=1e-10)


def test_conjugate_method_validation():
    with pytest.raises(ValueError):
        legendre_conjugate(log_normalizer(0.0, 1.0), [0.5, 0.3], method="closed")
    with pytest.raises(ValueError):
        legendre_conjugate(quadratic(), [0.5], method="bogus")


def test_conjugate_outside_gradient_range():
    with pytest.raises(DomainError):
        legendre_conjugate(fam.GEOMETRIC_F, [-1.0])
    with pytest.raises(DomainError):
        legendre_conjugate(fam.GEOMETRIC_F.numeric(), [0.0])
    with pytest.raises(DomainError):
        legendre_conjugate(monomial(2, 0.0, 1.0), [2.5], method="numeric")


def test_gradient_inverse_iteration_budget():
    with pytest.raises(ConvergenceError):
        gradient_inverse(fam.POISSON_F, [50.0], max_iter=1)


def test_truncated_conjugate_is_negative_entropy():
    F = log_normalizer(0.0, math.inf)
    theta = np.array([0.0, -0.5])
    eta = F.grad(theta)
    expected = -(0.5 * math.log(2 * math.pi * math.e) - math.log(2))
    assert legendre_conjugate(F, eta) == pytest.approx(expected, abs=1e-9)


# -- check_dominance examples ----------------------------------------------


def test_dominance_examples():
    assert check_dominance(monomial(2, 0, 1), monomial(4, 0, 1), 1000)
    assert check_dominance(quadratic(1.0), quadratic(1.0), 10)
    assert not check_dominance(quadratic(1.0), monomial(2, 0, 2), 1000)


def test_dominance_empty_intersection():
    with pytest.raises(DomainError):
        check_dominance(monomial(2, 0, 1), monomial(2, 2, 3))


def test_dominance_two_dimensional():
    assert check_dominance(log_normalizer(), log_normalizer(0.0, 1.0))
    assert not check_dominance(log_normalizer(0.0, 1.0), log_normalizer())


def test_dominance_of_conjugates_is_reversed():
    F1, F2 = monomial(2, 0, 1), monomial(4, 0, 1)
    assert check_dominance(F2.conjugate(), F1.conjugate())
    assert not check_dominance(F1.conjugate(), F2.conjugate())


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_dominance_reflexive(name):
    F, _ = CATALOG[name]
    assert check_dominance(F, F)
    assert check_dominance(F, F.numeric())


# -- convexity and gradients -----------------------------------------------


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_strict_convexity(name):
    F, strat = _scalar(name)

    @given(strat, strat, st.floats(0.05, 0.95))
    def check(t1, t2, lam):
        if abs(t1[0] - t2[0]) < 1e-3:
            return
        mid = lam * t1 + (1 - lam) * t2
        assert F(mid) < lam * F(t1) + (1 - lam) * F(t2) + 1e-12

    check()


@pytest.mark.parametrize("name", sorted(GAUSS))
def test_strict_convexity_gaussian(name):
    F = GAUSS[name]

    @given(gauss_theta, gauss_theta, st.floats(0.05, 0.95))
    def check(t1, t2, lam):
        if np.linalg.norm(t1 - t2) < 1e-2:
            return
        mid = lam * t1 + (1 - lam) * t2
        assert F(mid) < lam * F(t1) + (1 - lam) * F(t2) + 1e-12

    check()


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_gradient_matches_finite_differences(name):
    F, strat = _scalar(name)

    @given(strat)
    def check(theta):
        fd, err = finite_diff_grad(F.func, theta, domain=F.domain)
        g = F.grad(theta)
        assert np.all(np.abs(g - fd) <= 1e-6 * np.maximum(1.0, np.abs(g)) + err)

    check()


@pytest.mark.parametrize("name", sorted(GAUSS))
def test_gaussian_gradient_matches_finite_differences(name):
    F = GAUSS[name]

    @given(gauss_theta)
    def check(theta):
        fd, err = finite_diff_grad(F.func, theta, OracleConfig(fd_step=1e-5), domain=F.domain)
        g = F.grad(theta)
        assert np.all(np.abs(g - fd) <= 1e-6 * np.maximum(1.0, np.abs(g)) + err)

    check()


# -- conjugate pairs -------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_fenchel_young_equality_and_inversion(name):
    F, strat = _scalar(name)
    pair = ConjugatePair.of(F)

    @given(strat)
    def check(theta):
        eta = pair.primal.grad(theta)
        assert pair.primal(theta) + pair.dual(eta) - float(theta @ eta) == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(pair.dual.grad(eta), theta, rtol=0, atol=1e-8)

    check()


@pytest.mark.parametrize("name", sorted(GAUSS))
def test_fenchel_young_equality_gaussian(name):
    pair = ConjugatePair.of(GAUSS[name])

    @given(gauss_theta)
    def check(theta):
        eta = pair.primal.grad(theta)
        assert pair.primal(theta) + pair.dual(eta) - float(theta @ eta) == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(pair.dual.grad(eta), theta, rtol=0, atol=1e-8)

    check()


@pytest.mark.parametrize("name", CLOSED_FORM)
def test_numeric_conjugate_matches_closed_form(name):
    F, _ = CATALOG[name]
    rng = np.random.default_rng(7)
    lo, hi = F.domain.clipped(5.0)
    thetas = rng.uniform(lo[0], hi[0], size=100)
    for t in thetas:
        theta = np.array([t])
        if not F.contains(theta):
            continue
        eta = F.grad(theta)
        closed = legendre_conjugate(F, eta, method="closed")
        numeric = legendre_conjugate(F, eta, method="numeric")
        assert numeric == pytest.approx(closed, abs=1e-8)
        back = gradient_inverse(F, eta)
        assert np.allclose(F.grad(back), eta, rtol=1e-8, atol=1e-8)


def test_numeric_normal_conjugate_matches_closed_form():
    F = log_normalizer()
    rng = np.random.default_rng(11)
    for _ in range(100):
        theta = np.array([rng.uniform(-2, 2), rng.uniform(-2, -0.1)])
        eta = F.grad(theta)
        assert legendre_conjugate(F, eta, "numeric") == pytest.approx(legendre_conjugate(F, eta), abs=1e-8)
        assert np.allclose(F.grad(gradient_inverse(F, eta)), eta, atol=1e-8)


@given(st.floats(0.05, 1.95))
def test_dominance_reversal_square_quartic(eta):
    F1, F2 = monomial(2, 0, 1), monomial(4, 0, 1)
    e = np.array([eta])
    assert legendre_conjugate(F1, e, "numeric") <= legendre_conjugate(F2, e, "numeric") + 1e-10


@given(st.floats(1.0, 10.0), st.floats(-20, 20))
def test_dominance_reversal_quadratics(a, eta):
    F1, F2 = quadratic(a), quadratic(1.0)
    assert check_dominance(F1, F2)
    e = np.array([eta])
    assert legendre_conjugate(F1, e, "numeric") <= legendre_conjugate(F2, e, "numeric") + 1e-10


# -- misc ------------------------------------------------------------------


def test_generators_are_immutable():
    F = quadratic()
    with pytest.raises(dataclasses.FrozenInstanceError):
        F.name = "other"
    with pytest.raises(dataclasses.FrozenInstanceError):
        Box.real(1).lower = None


def test_biconjugate_is_the_primal():
    F = neg_log()
    assert F.conjugate().conjugate() is F
    assert exponential_generator().conjugate_mode == "closed-form"
    assert log_normalizer(0.0, 1.0).conjugate_mode == "numeric"


def test_domain_membership_is_strict():
    F = neg_log()
    with pytest.raises(DomainError):
        F([0.0])
    with pytest.raises(DomainError):
        F([math.nan])
    with pytest.raises(DomainError):
        log_normalizer()([0.0, 0.0])


def test_box_validation():
    with pytest.raises(DomainError):
        Box.interval(1.0, 0.0)
    assert Box.interval(0, 1).intersect(Box.interval(2, 3)) is None
