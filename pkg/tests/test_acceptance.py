"""Acceptance criteria, one check per criterion at its stated tolerance.

Run under pytest (a summary block lists every criterion) or directly:

    python tests/test_acceptance.py
"""
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from duodiv import families as fam
from duodiv import figures, oracle
from duodiv import truncnorm as tn
from duodiv.centroids import CentroidProblem, centroid, left_centroid, perturbation_violations, right_centroid
from duodiv.divergences import bregman, dual_duo_bregman, duo_bregman, duo_jensen, jensen
from duodiv.errors import DominanceError
from duodiv.generators import check_dominance, exponential_generator, monomial, quadratic
from pairs import DOMINANCE_PAIRS

m = fam.make_member
LAM = "lambda"


def _ref(member):
    return oracle.reference_density(member.family_id, member.source_params)


def _kl_gap(p, q):
    closed = fam.kl_divergence(p, q)
    ref = oracle.kl_numeric(_ref(p), _ref(q))
    return abs(closed.value - ref.value) - ref.abs_error_estimate


# -- 1 ---------------------------------------------------------------------


def _nested_windows(rng, count):
    out = []
    while len(out) < count:
        a2 = rng.uniform(-3, 0)
        b2 = a2 + rng.uniform(1, 5)
        a1 = rng.uniform(a2, b2 - 0.5)
        b1 = rng.uniform(a1 + 0.3, b2)
        a2 = -math.inf if rng.random() < 0.2 else a2
        b2 = math.inf if rng.random() < 0.2 else b2
        p = m("trunc_normal", m=rng.uniform(-2, 2), s=rng.uniform(0.3, 3), a=a1, b=b1)
        q = m("trunc_normal", m=rng.uniform(-2, 2), s=rng.uniform(0.3, 3), a=a2, b=b2)
        out.append((p, q))
    return out


def criterion_1():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    groups = {
        "geometric/geometric": [(m("geometric", p=0.5), m("geometric", p=0.25))]
        + [(m("geometric", p=rng.uniform(0.05, 0.95)), m("geometric", p=rng.uniform(0.05, 0.95))) for _ in range(10)],
        "poisson/geometric": [(m("poisson", **{LAM: 1.0}), m("geometric", p=0.5))]
        + [(m("poisson", **{LAM: rng.uniform(0.1, 8)}), m("geometric", p=rng.uniform(0.05, 0.95))) for _ in range(10)],
        "exponential/laplacian": [(m("exponential", **{LAM: rng.uniform(0.1, 10)}),
                                   m("laplacian", **{LAM: rng.uniform(0.1, 10)})) for _ in range(10)],
        "half-normal/normal": [(m("half_normal", sigma=rng.uniform(0.2, 4)),
                                m("normal", m=rng.uniform(-2, 2), s=rng.uniform(0.3, 4))) for _ in range(10)],
        "truncnormal/truncnormal": _nested_windows(rng, 50),
        "normal/normal": [(m("normal", m=rng.uniform(-3, 3), s=rng.uniform(0.2, 3)),
                           m("normal", m=rng.uniform(-3, 3), s=rng.uniform(0.2, 3))) for _ in range(10)],
    }
    worst = {name: max(_kl_gap(p, q) for p, q in pairs) for name, pairs in groups.items()}
    elapsed = time.perf_counter() - start
    ok = all(g <= 1e-6 for g in worst.values()) and elapsed <= 60
    detail = f"worst excess {max(worst.values()):.2e} (tol 1e-6), {sum(map(len, groups.values()))} pairs in {elapsed:.1f}s"
    return ok, detail


# -- 2 ---------------------------------------------------------------------


def criterion_2():
    checks = []
    v = fam.kl_divergence(m("exponential", **{LAM: 1.0}), m("laplacian", **{LAM: 1.0})).value
    checks.append(("exp/lap", abs(v - math.log(2)), 1e-9))
    o = oracle.kl_numeric(_ref(m("half_normal", sigma=1.0)), _ref(m("normal", m=0.0, s=1.0)))
    checks.append(("halfnormal/normal oracle", abs(o.value - math.log(2)), 1e-6))
    h, _ = fam.entropy(m("normal", m=0.0, s=1.0))
    checks.append(("normal entropy", abs(h - math.log(math.sqrt(2 * math.pi * math.e))), 1e-10))
    mean, var = tn.trunc_moments(tn.TruncNormalParams(0.0, 1.0, 0.0, math.inf))
    checks.append(("trunc mean", abs(mean - math.sqrt(2 / math.pi)), 1e-8))
    checks.append(("trunc variance", abs(var - (1 - 2 / math.pi)), 1e-8))
    failed = [name for name, err, tol in checks if not err <= tol]
    worst = max(err / tol for _, err, tol in checks)
    return not failed, f"{len(checks)} anchors, worst error/tol {worst:.2e}" + (f", failed {failed}" if failed else "")


# -- 3 ---------------------------------------------------------------------


def criterion_3():
    rng = np.random.default_rng(99)
    names = sorted(DOMINANCE_PAIRS)
    worst = 0.0
    for i in range(1000):
        F1, F2, sample = DOMINANCE_PAIRS[names[i % len(names)]]
        t, tp = sample(rng), sample(rng)
        primal = duo_bregman(F1, F2, t, tp).value
        dual = dual_duo_bregman(F1, F2, F2.grad(tp), F1.grad(t)).value
        worst = max(worst, abs(primal - dual))
    return worst <= 1e-8, f"1000 draws over {len(names)} pairs, max |primal - dual| {worst:.2e} (tol 1e-8)"


# -- 4 ---------------------------------------------------------------------


def criterion_4():
    rng = np.random.default_rng(4)
    instances = [(m("exponential", **{LAM: rng.uniform(0.2, 5)}), m("laplacian", **{LAM: rng.uniform(0.2, 5)}))
                 for _ in range(10)]
    instances.append((m("trunc_normal", m=0.0, s=1.0, a=0.0, b=math.inf), m("normal", m=0.0, s=1.0)))
    for _ in range(10):
        a1 = rng.uniform(-1, 0.5)
        b1 = a1 + rng.uniform(0.5, 2)
        p = m("trunc_normal", m=rng.uniform(-1, 1), s=rng.uniform(0.5, 2), a=a1, b=b1)
        q = m("trunc_normal", m=rng.uniform(-1, 1), s=rng.uniform(0.5, 2), a=a1 - rng.uniform(0, 1), b=b1 + rng.uniform(0, 1))
        instances.append((p, q))
    worst = 0.0
    for p, q in instances:
        vals = list(fam.kl_nested_forms(p, q).values())
        worst = max(worst, max(vals) - min(vals))
    return worst <= 1e-8, f"{len(instances)} instances, max pairwise spread {worst:.2e} (tol 1e-8)"


# -- 5 ---------------------------------------------------------------------


def _reversal(F1, F2, primal_grid, rows):
    dominated = all(F1(np.array([t])) >= F2(np.array([t])) for t in primal_grid)
    conj = {}
    for r in rows:
        if r["function"] in ("F1*", "F2*"):
            conj.setdefault(r["function"], []).append(r["value"])
    c1, c2 = np.array(conj["F1*"]), np.array(conj["F2*"])
    return dominated, len(c1), float(np.max(c1 - c2))


def criterion_5(out_dir=None):
    out_dir = Path(out_dir or tempfile.mkdtemp(prefix="duodiv-fig7-"))
    cases = [("square_quartic", monomial(2, 0, 1), monomial(4, 0, 1), figures.midpoint_grid(0, 1, 1000),
              figures.square_quartic_curves())]
    for a in (1.0, 2.0, 5.0):
        cases.append((f"quadratic_a={a:g}", quadratic(a), quadratic(1.0), figures.midpoint_grid(-5, 5, 1000),
                      figures.scaled_quadratic_curves(a)))
    ok, worst = True, -math.inf
    for label, F1, F2, grid, rows in cases:
        figures.write_csv(rows, str(out_dir / f"{label}.csv"), figures.CURVE_COLUMNS)
        dominated, n_dual, excess = _reversal(F1, F2, grid, rows)
        ok = ok and dominated and n_dual == 1000 and excess <= 1e-10
        worst = max(worst, excess)
    return ok, f"{len(cases)} pairs, max F1* - F2* = {worst:.2e} (tol 1e-10), CSV in {out_dir}"


# -- 6 ---------------------------------------------------------------------


def _monotone_final(gaps):
    return all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] <= 1e-3


def criterion_6():
    rng = np.random.default_rng(66)
    seq = (1e-2, 1e-3, 1e-4)
    # The gap is linear in alpha with a slope set by the spread of the pair
    # and the curvature of F; the ranges keep that slope below 10 so the
    # gap at alpha = 1e-4 is resolvable against 1e-3.
    singles = [(exponential_generator(), lambda: [rng.uniform(-1, 1)]),
               (fam.GEOMETRIC_F, lambda: [rng.uniform(-2, -0.5)]),
               (fam.EXPONENTIAL_F, lambda: [rng.uniform(0.7, 3)]),
               (quadratic(3.0), lambda: [rng.uniform(-1, 1)])]
    duos = [(fam.EXPONENTIAL_F, fam.LAPLACIAN_F, lambda: [rng.uniform(0.7, 3)]),
            (fam.HALF_NORMAL_SCALE_F, fam.NORMAL_SCALE_F, lambda: [rng.uniform(0.5, 3)]),
            (quadratic(1.0), quadratic(2.0), lambda: [rng.uniform(-2, 2)]),
            (monomial(4, 0, 1), monomial(2, 0, 1), lambda: [rng.uniform(0.05, 0.95)])]
    bad, final = 0, 0.0
    for i in range(20):
        F, draw = singles[i % len(singles)]
        t1, t2 = np.array(draw()), np.array(draw())
        target = bregman(F, t2, t1).value
        gaps = [abs(jensen(F, t2, t1, a).value / a - target) for a in seq]
        bad += not _monotone_final(gaps)
        final = max(final, gaps[-1])
        # Duo Jensen takes the smaller generator first; its limit is B_{F2,F1}.
        F1, F2, draw = duos[i % len(duos)]
        t1, t2 = np.array(draw()), np.array(draw())
        target = duo_bregman(F2, F1, t2, t1).value
        gaps = [abs(duo_jensen(F1, F2, t1, t2, 1 - e).value / e - target) for e in seq]
        bad += not _monotone_final(gaps)
        final = max(final, gaps[-1])
    return bad == 0, f"20 instances x 2 limits, {bad} non-monotone, worst final gap {final:.2e} (tol 1e-3)"


# -- 7 ---------------------------------------------------------------------


def criterion_7():
    rng = np.random.default_rng(7)
    worst, concave = 0.0, True
    grid = np.linspace(0.02, 0.98, 50)
    instances = []
    for _ in range(3):
        instances.append((m("exponential", **{LAM: rng.uniform(0.3, 4)}), m("laplacian", **{LAM: rng.uniform(0.3, 4)})))
        instances.append((m("half_normal", sigma=rng.uniform(0.4, 3)),
                          m("normal", m=rng.uniform(-1, 1), s=rng.uniform(0.4, 3))))
    for p, q in instances:
        F1, F2 = p.log_normalizer, q.log_normalizer
        for a in (0.25, 0.5, 0.75):
            closed = duo_jensen(F1, F2, p.theta, q.theta, a).value
            ref = oracle.bhattacharyya_numeric(_ref(p), _ref(q), a)
            worst = max(worst, abs(closed - ref.value) - ref.abs_error_estimate)
        curve = np.array([duo_jensen(F1, F2, p.theta, q.theta, a).value for a in grid])
        concave = concave and bool(np.all(np.diff(curve, 2) <= 1e-12))
    ok = worst <= 1e-6 and concave
    return ok, f"{len(instances)} pairs x 3 alphas, worst excess {worst:.2e} (tol 1e-6), concave={concave}"


# -- 8 ---------------------------------------------------------------------


def criterion_8():
    rng = np.random.default_rng(88)
    exact = True
    for _ in range(20):
        pts = rng.uniform(-3, 3, size=(int(rng.integers(1, 9)), 1))
        exact = exact and np.array_equal(right_centroid(CentroidProblem(pts, fam.POISSON_F)), pts.mean(axis=0))
    qa = 0.0
    for _ in range(20):
        pts = rng.uniform(-3, 3, size=int(rng.integers(1, 9)))
        c = left_centroid(CentroidProblem(pts[:, None], fam.POISSON_F, side="left"))[0]
        qa = max(qa, abs(c - math.log(np.mean(np.exp(pts)))))
    violations = 0
    suites = 0
    for name in sorted(DOMINANCE_PAIRS):
        F1, F2, sample = DOMINANCE_PAIRS[name]
        pts = [sample(rng) for _ in range(6)]
        for side in ("left", "right"):
            prob = CentroidProblem(pts, F1, F2, side)
            violations += perturbation_violations(prob, centroid(prob), 100, np.random.default_rng(suites))
            suites += 1
    ok = exact and qa <= 1e-10 and violations == 0
    return ok, f"right exact={exact}, left quasi-arithmetic error {qa:.2e} (tol 1e-10), {suites} suites, {violations} violations"


# -- 9 ---------------------------------------------------------------------


def criterion_9():
    guarded = False
    try:
        duo_bregman(quadratic(0.5), quadratic(1.0), [1.0], [1.0])
    except DominanceError:
        guarded = True
    guarded = guarded and not check_dominance(quadratic(0.5), quadratic(1.0))
    negative = min(r["value"] for r in figures.duo_euclid_surface(0.5))
    floors = {a: min(r["value"] for r in figures.duo_euclid_surface(a)) for a in (1.0, 2.0)}
    ok = guarded and negative < 0 and all(v >= -1e-10 for v in floors.values())
    return ok, f"guard raised={guarded}, a=0.5 min {negative:.3g}, a=1 min {floors[1.0]:.2e}, a=2 min {floors[2.0]:.2e}"


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, tmp_path):
    from conftest import ACCEPTANCE_RESULTS

    fn = CRITERIA[number]
    ok, detail = fn(tmp_path) if number == 5 else fn()
    ACCEPTANCE_RESULTS[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def main() -> int:
    failures = 0
    for number, fn in CRITERIA.items():
        ok, detail = fn()
        failures += not ok
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
