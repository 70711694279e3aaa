import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twfront.exceptions import DomainError
from twfront.model import (
    eval_D, eval_f, eval_g, eval_H, h_min, k_of_p, khat, make_problem, signed_power, stationary_point,
)


def test_diffusion_values():
    assert eval_D(make_problem(2, 0.5), 0.3) == pytest.approx(1.0)
    assert eval_D(make_problem(2, 0.5, alpha=1.0), 0.25) == pytest.approx(0.25)
    assert eval_D(make_problem(2, 0.5, d0=2.0, alpha=1.0, beta=1.0), 0.5) == pytest.approx(0.5)


def test_diffusion_rejects_closed_endpoints():
    with pytest.raises(DomainError):
        eval_D(make_problem(2, 0.5), 1.0)


def test_reaction_values():
    prob = make_problem(2, 0.5, g0=2.0)
    assert eval_g(prob, 0.2) == 0.0
    assert eval_g(prob, 0.75) == pytest.approx(0.125)
    assert eval_g(prob, 1.0) == 0.0
    with pytest.raises(DomainError):
        eval_g(prob, 1.5)


def test_convection_primitive():
    assert eval_H(make_problem(2, 0.5), 0.7) == 0.0
    assert eval_H(make_problem(2, 0.5, coeffs=(1.0,)), 0.4) == pytest.approx(0.4)
    assert eval_H(make_problem(2, 0.5, coeffs=(0.0, 1.0)), 1.0) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "coeffs, expected",
    [((3.0,), 3.0), ((-0.5, 1.0), -0.5), ((0.25, -1.0, 1.0), 0.0)],
)
def test_minimum_of_h(coeffs, expected):
    assert h_min(make_problem(2, 0.5, coeffs=coeffs)) == pytest.approx(expected, abs=1e-12)


def test_f_values():
    ref = make_problem(2, 0.5, g0=2.0)
    assert eval_f(ref, 0.3) == 0.0
    assert eval_f(ref, 0.75) == pytest.approx(0.125)
    cubic = make_problem(3, 0.5, d0=4.0, g0=2.0)
    assert eval_f(cubic, 0.75) == pytest.approx(0.25)
    assert eval_f(ref, 1.0) == 0.0


def test_f_undefined_at_one_for_negative_exponent():
    prob = make_problem(2, 0.5, beta=-2.0, gamma=1.0)
    with pytest.raises(DomainError):
        eval_f(prob, 1.0)


def test_k_values():
    assert k_of_p(2.0) == 1.0
    assert abs(k_of_p(1.5) - 1.0 / 3.0) <= 1e-12
    assert k_of_p(1 + 1e-6) < 0.01
    assert abs(k_of_p(200.0) - 0.5) <= 0.02
    with pytest.raises(DomainError):
        k_of_p(1.0)


@given(st.floats(1.001, 50.0))
def test_k_in_unit_interval(p):
    assert 0.0 < k_of_p(p) <= 1.0


def test_khat_limits():
    assert khat(2 - 1e-9) == pytest.approx(1.0, abs=1e-6)
    assert khat(1.5) > 1.0
    assert stationary_point(1.5) == pytest.approx(0.5 ** -2.0)


def test_signed_power_values():
    assert signed_power(0.0, 0.7) == 0.0
    assert signed_power(-2.0, 1.0) == -2.0
    assert signed_power(-4.0, 0.5) == pytest.approx(-2.0)
    out = signed_power(np.array([-1.0, 8.0]), 1.0 / 3.0)
    assert out == pytest.approx([-1.0, 2.0])


finite = st.floats(-1e6, 1e6, allow_nan=False)
exponent = st.floats(0.05, 5.0)


@given(finite, exponent)
def test_signed_power_is_odd(v, q):
    assert signed_power(-v, q) == -signed_power(v, q)


@given(finite, finite, exponent)
def test_signed_power_is_monotone(a, b, q):
    lo, hi = sorted((a, b))
    assert signed_power(lo, q) <= signed_power(hi, q)


@given(st.floats(1e-3, 1e3), exponent)
def test_signed_power_inverse(v, q):
    assert signed_power(signed_power(v, q), 1.0 / q) == pytest.approx(v, rel=1e-9)


def test_domain_checks_on_construction():
    with pytest.raises(DomainError):
        make_problem(1.0, 0.5)
    with pytest.raises(DomainError):
        make_problem(2.0, 1.0)
    with pytest.raises(DomainError):
        make_problem(2.0, 0.5, d0=-1.0)
    with pytest.raises(DomainError):
        make_problem(2.0, 0.5, g0=-1.0)


def test_conjugate_exponent():
    prob = make_problem(3.0, 0.5)
    assert prob.p_conj == pytest.approx(1.5)
    assert 1 / prob.p + 1 / prob.p_conj == pytest.approx(1.0)
    assert math.isclose(make_problem(2.0, 0.5).p_conj, 2.0)
