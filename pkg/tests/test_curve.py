import random
from fractions import Fraction

import numpy as np
import pytest

from brownq.curve import (
    CURVE_VARS,
    SYSTEM_VARS,
    CurveConfig,
    DivisibilityError,
    build_system,
    curve_eval,
    divisor,
    run_pipeline,
    specific_case_f2,
)
from brownq.measures import AtomicMeasure
from brownq.omega import GridSpec, trace_omega, verify_against_curve
from brownq.polyring import GaussPoly, GaussRational, proportional

I = GaussRational(0, 1)


def rational_measure(rnd, n, spread=3):
    atoms = [Fraction(rnd.randint(-4 * spread, 4 * spread), 4) for _ in range(n)]
    raw = [rnd.randint(1, 6) for _ in range(n)]
    return AtomicMeasure(atoms, [Fraction(r, sum(raw)) for r in raw])


def M(atoms, weights):
    return AtomicMeasure(atoms, weights)


def test_single_atom_system():
    P1, P2 = build_system(CurveConfig(M([0], [1]), M([0], [1])))
    g, m, x, y = GaussPoly.gens(SYSTEM_VARS)
    assert P1 == g * x + m - 1
    assert P2 == I * g * y - m


def test_two_atom_system_expansion():
    P1, _ = build_system(CurveConfig(M([-1, 1], ["1/2", "1/2"]), M([0], [1])))
    g, m, x, y = GaussPoly.gens(SYSTEM_VARS)
    a, b = g * (x + 1) + m, g * (x - 1) + m
    half = GaussRational(Fraction(1, 2))
    assert P1 == a * b - half * b - half * a


def test_system_structure():
    rnd = random.Random(1)
    for _ in range(5):
        n, k = rnd.randint(1, 3), rnd.randint(1, 3)
        cfg = CurveConfig(rational_measure(rnd, n), rational_measure(rnd, k))
        P1, P2 = build_system(cfg)
        g, m, x, y = GaussPoly.gens(SYSTEM_VARS)
        assert P1.degree("g") == n and P2.degree("g") == k
        lead = GaussPoly.const(1, SYSTEM_VARS)
        for a in cfg.mu_p.atoms:
            lead = lead * (x - a)
        assert P1.coefficients_in("g")[n].with_variables(SYSTEM_VARS) == lead
        c1 = P1.coefficients_in("g")[0].with_variables(SYSTEM_VARS)
        c2 = P2.coefficients_in("g")[0].with_variables(SYSTEM_VARS)
        assert c1 == (m - 1) * m ** (n - 1)
        assert c2 == -m * (1 - m) ** (k - 1)


def test_rejects_decimal_measures():
    with pytest.raises(ValueError, match="omega or esd"):
        CurveConfig(M([0.5, 1], [0.5, 0.5]), M([0], [1]))


def test_division_identity_and_real_f():
    rnd = random.Random(2)
    for n, k in [(1, 2), (2, 2), (3, 2), (2, 3)]:
        cfg = CurveConfig(rational_measure(rnd, n), rational_measure(rnd, k))
        res = run_pipeline(cfg)
        assert res.f2 * divisor(cfg) == res.f1
        assert not res.degenerate
        assert res.f.is_real()
        assert res.f.variables == ("x", "y")


def test_curve_matches_determinant_route():
    # the pipeline uses the multi-modular resultant; Bareiss is the other route
    from brownq.polyring import resultant

    res = run_pipeline(CurveConfig(M([-1, 0, 1], ["1/3", "1/3", "1/3"]), M([0, 1], ["1/2", "1/2"])))
    assert resultant(res.re_f2, res.im_f2, "m", method="bareiss") == res.f


def test_duplicate_atoms_are_handled():
    res = run_pipeline(CurveConfig(M([0, 0], ["1/2", "1/2"]), M([0], [1])))
    assert res.f2 * divisor(res.config) == res.f1


@pytest.mark.parametrize("n, k", [(2, 2), (2, 3)])
def test_specific_case_factorization(n, k):
    rnd = random.Random(n * 10 + k)
    p = rational_measure(rnd, n)
    q = rational_measure(rnd, k)
    cfg = CurveConfig(M([0] * n, p.weights), M([0] * k, q.weights))
    res = run_pipeline(cfg)
    assert proportional(res.f2, specific_case_f2(n, k)) is not None
    assert res.f is not None and not res.f.is_zero()
    assert curve_eval(res, 0) == 0


def test_translation_covariance():
    rnd = random.Random(3)
    p, q = rational_measure(rnd, 2), rational_measure(rnd, 2)
    t = Fraction(3, 7)
    shifted = M([a + t for a in p.atoms], p.weights)
    f = run_pipeline(CurveConfig(p, q)).f
    ft = run_pipeline(CurveConfig(shifted, q)).f
    for _ in range(20):
        x, y = Fraction(rnd.randint(-30, 30), 11), Fraction(rnd.randint(-30, 30), 13)
        assert ft.eval_exact({"x": x, "y": y}) == f.eval_exact({"x": x - t, "y": y})


def test_curve_eval_matches_exact():
    rnd = random.Random(4)
    res = run_pipeline(CurveConfig(rational_measure(rnd, 3), rational_measure(rnd, 2)))
    T, den = res.f.scale_to_integral()
    big = max(max(abs(a), abs(b)) for a, b in T.values())
    for _ in range(5):
        x, y = rnd.uniform(-2, 2), rnd.uniform(-2, 2)
        exact = res.f.eval_exact({"x": Fraction(x), "y": Fraction(y)})
        approx = curve_eval(res, complex(x, y))
        # curve_eval returns f divided by its largest coefficient modulus
        ref = float(exact.re * den / big)
        scale = sum(abs(a) / big * max(1, abs(x), abs(y)) ** res.f.degree() for a, _ in T.values())
        assert abs(approx - ref) <= 1e-12 * scale


def test_divisibility_violation_raises():
    cfg = CurveConfig(M([-1, 1], ["1/2", "1/2"]), M([0, 1], ["1/2", "1/2"]))
    P1, P2 = build_system(cfg)
    x = GaussPoly.var("x", SYSTEM_VARS)
    # perturbing the g-free coefficient breaks the m^(n-1)(m-1)^(k-1) factor
    with pytest.raises(DivisibilityError) as err:
        run_pipeline(cfg, system=(P1 + x, P2))
    assert not err.value.remainder.is_zero()


def test_degenerate_system_reported():
    cfg = CurveConfig(M([0], [1]), M([0], [1]))
    g, m, x, y = GaussPoly.gens(SYSTEM_VARS)
    res = run_pipeline(cfg, system=(g * x + m - 1, g * y - m))
    assert res.im_zero and res.degenerate and res.f is None
    assert res.report()["degenerate"]
    with pytest.raises(ValueError):
        curve_eval(res, 0.5)


def test_curve_vanishes_on_two_atom_omega():
    p, q = M([-1, 1], ["1/2", "1/2"]), M([-1, 1], ["1/2", "1/2"])
    res = run_pipeline(CurveConfig(p, q))
    tr = trace_omega(p, q, GridSpec(resolution=(200, 200)))
    pick = tr.witnesses[:: max(1, len(tr.witnesses) // 20)][:20]
    assert len(pick) == 20
    rep = verify_against_curve(pick, res)
    # |f| relative to the largest coefficient
    assert rep["max_abs_f"] <= 1e-6
    assert rep["max_score"] <= 1e-6


def test_sign_change_brackets_omega_arc():
    # three-atom p: Omega sits on a simple factor of f, so f changes sign
    p, q = M([-1, 0, 1], ["1/3", "1/3", "1/3"]), M([0, 1], ["1/2", "1/2"])
    f = run_pipeline(CurveConfig(p, q)).f
    z = trace_omega(p, q, GridSpec(resolution=(200, 200))).z()
    h = 1e-4
    changes = total = 0
    for w in z[:: max(1, len(z) // 60)]:
        d = np.abs(z - w)
        d[d == 0] = np.inf
        tangent = z[np.argmin(d)] - w
        normal = 1j * tangent / abs(tangent)
        a = f.eval_dyadic({"x": (w + h * normal).real, "y": (w + h * normal).imag}).real
        b = f.eval_dyadic({"x": (w - h * normal).real, "y": (w - h * normal).imag}).real
        changes += a * b < 0
        total += 1
    assert changes >= 0.8 * total


def test_extraneous_components_in_two_atom_curve():
    # f is a superset certificate: x^2 (2y-1)^2 divides it for this config,
    # and (0, 1/4) is a zero far from the hyperbola
    from brownq.polyring import exact_div

    res = run_pipeline(CurveConfig(M([-1, 1], ["1/2", "1/2"]), M([0, 1], ["1/2", "1/2"])))
    x, y = GaussPoly.gens(("x", "y"))
    exact_div(res.f, x**2 * (2 * y - 1) ** 2)
    assert res.f.eval_exact({"x": 0, "y": Fraction(1, 4)}) == 0


def test_report_serialisable():
    import json

    res = run_pipeline(CurveConfig(M([0, 1], ["1/3", "2/3"]), M([0, 2], ["1/2", "1/2"])))
    rep = res.report()
    json.dumps(rep)
    assert rep["degree_f"] == res.f.degree()
    assert res.f_normalized.variables == ("x", "y")
    assert CURVE_VARS == ("m", "x", "y")
