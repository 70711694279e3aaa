import math
from fractions import Fraction

import pytest
import sympy as sp

from twfront.criteria import (
    Verdict, c_upper_bound, check_existence, check_nonexistence, check_positive_speed, evaluate, integral_I,
)
from twfront.exceptions import DivergentIntegral, PreconditionViolation
from twfront.model import reference_problem

THRESHOLD = math.sqrt(2.0 / 24.0)


def test_reference_integral_matches_exact_rational():
    exact = Fraction(1, 24)
    assert integral_I(reference_problem()) == pytest.approx(float(exact), rel=1e-12)


def test_integral_with_degenerate_diffusion_matches_symbolic():
    u = sp.symbols("u")
    exact = sp.integrate(u * (1 - u) * 2 * (u - sp.Rational(1, 2)) * (1 - u), (u, sp.Rational(1, 2), 1))
    prob = reference_problem(alpha=1.0, beta=1.0)
    assert integral_I(prob) == pytest.approx(float(exact), rel=1e-12)


def test_integral_is_linear_in_g0():
    base = integral_I(reference_problem())
    assert integral_I(reference_problem(g0=6.0)) == pytest.approx(3.0 * base, rel=1e-12)
    assert integral_I(reference_problem(g0=0.0)) == 0.0


def test_integral_diverges_for_strongly_singular_diffusion():
    with pytest.raises(DivergentIntegral):
        integral_I(reference_problem(beta=-3.0))


def test_constant_convection_never_triggers_nonexistence():
    assert check_nonexistence(reference_problem(coeffs=(0.7,))) == (False, False)


def test_nonexistence_examples():
    assert check_nonexistence(reference_problem(coeffs=(10.0, -10.0))) == (True, True)
    assert check_nonexistence(reference_problem(coeffs=(0.1, -0.1))) == (False, False)


def test_existence_examples():
    assert check_existence(reference_problem())
    assert check_existence(reference_problem(coeffs=(0.05,)))
    assert not check_existence(reference_problem(coeffs=(1.0, -1.0)))
    # H(1) = 0.25 fails existence while H(theta) = 0.1875 stays below the nonexistence threshold
    rep = evaluate(reference_problem(coeffs=(0.5, -0.5)))
    assert not rep.existence and not rep.nonexistence_weak
    assert rep.verdict is Verdict.INCONCLUSIVE


def test_positive_speed_examples():
    assert check_positive_speed(reference_problem(coeffs=(0.01,)))
    assert not check_positive_speed(reference_problem(coeffs=(0.3,)))
    with pytest.raises(PreconditionViolation):
        check_positive_speed(reference_problem())


def test_upper_bound_examples():
    assert c_upper_bound(reference_problem()) == pytest.approx(2 * math.sqrt(1 / 12), rel=1e-12)
    # h = 1 shifts c* by exactly -1, so the bound must stay above c*(0) - 1
    assert c_upper_bound(reference_problem(coeffs=(1.0,))) == pytest.approx(2 * (math.sqrt(1 / 12) - 0.5), rel=1e-12)


def test_upper_bound_scales_with_reaction():
    b1 = c_upper_bound(reference_problem())
    b4 = c_upper_bound(reference_problem(g0=8.0))
    assert b4 == pytest.approx(2.0 * b1, rel=1e-12)


def test_evaluate_report():
    rep = evaluate(reference_problem())
    assert rep.verdict is Verdict.EXISTS
    assert rep.positive_speed
    assert rep.k_p == 1.0
    assert rep.to_dict()["verdict"] == "Exists"
    assert evaluate(reference_problem(coeffs=(10.0, -10.0))).verdict is Verdict.NO_SOLUTION


def test_zero_reaction_is_no_solution():
    rep = evaluate(reference_problem(g0=0.0))
    assert rep.verdict is Verdict.NO_SOLUTION
    assert not rep.existence


from hypothesis import given, settings, strategies as st  # noqa: E402

from twfront.model import make_problem  # noqa: E402
from twfront.shooting import Status, find_c_star  # noqa: E402

random_instances = st.builds(
    lambda p, theta, alpha, beta, g0, h0, h1: make_problem(
        p, theta, alpha=alpha, beta=beta, g0=g0, coeffs=(h0, h1)
    ),
    st.floats(1.2, 3.5), st.floats(0.1, 0.9), st.floats(0.0, 2.0), st.floats(-0.3, 1.0),
    st.floats(0.1, 5.0), st.floats(-2.0, 2.0), st.floats(-4.0, 4.0),
)


@given(random_instances)
def test_existence_and_nonexistence_exclusive(prob):
    rep = evaluate(prob)
    assert not (rep.existence and rep.nonexistence_weak)


@settings(max_examples=10)
@given(random_instances)
def test_verdict_consistent_with_solver(prob):
    rep = evaluate(prob)
    if rep.verdict is Verdict.INCONCLUSIVE:
        return
    wave = find_c_star(prob)
    if rep.nonexistence_strict:
        assert wave.status is Status.NO_SOLUTION
    if wave.found:
        assert not rep.nonexistence_weak
        assert wave.c_star < rep.c_upper
