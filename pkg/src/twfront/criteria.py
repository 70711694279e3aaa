"""Sufficient conditions for existence, nonexistence and sign of the wave speed."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .exceptions import DivergentIntegral, PreconditionViolation, QuadratureFailure
from .model import Problem, k_of_p

QUAD_RTOL = 1e-10


class Verdict(str, enum.Enum):
    EXISTS = "Exists"
    NO_SOLUTION = "NoSolution"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CriteriaReport:
    integral_I: float
    H_theta: float
    H_one: float
    h_m: float
    k_p: float
    nonexistence_weak: bool
    nonexistence_strict: bool
    nonexistence_all_c: bool
    existence: bool
    positive_speed: bool
    c_upper: float
    verdict: Verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def integral_I(problem: Problem) -> float:
    """Integral of D**(p'-1) * g over (0, 1), i.e. of f over (theta, 1)."""
    if not problem.integrable:
        raise DivergentIntegral(
            f"(p'-1)*beta + gamma = {problem.gamma_eff:.6g} <= -1: integral of D**(p'-1) g diverges at u = 1"
        )
    theta = problem.theta
    if problem.is_builtin:
        d, r = problem.diffusion, problem.reaction
        if r.g0 == 0.0:
            return 0.0
        e = problem.p_conj - 1.0
        scale = d.d0**e * r.g0
        # the algebraic weight (u - theta)**sigma (1 - u)**gamma_eff carries both endpoint singularities
        smooth = lambda u: scale * u ** (d.alpha * e)  # noqa: E731
        val, err = integrate.quad(
            smooth, theta, 1.0, weight="alg", wvar=(r.sigma, problem.gamma_eff),
            epsabs=0.0, epsrel=1e-13, limit=200,
        )
    else:
        val, err = _hook_integral(problem)
    if not math.isfinite(val) or err > QUAD_RTOL * max(abs(val), 1e-300):
        raise QuadratureFailure(f"integral_I: estimate {val!r} with error {err!r} misses rtol {QUAD_RTOL}")
    return float(val)


def _hook_integral(problem: Problem):
    theta = problem.theta
    ge = problem.gamma_eff
    if ge is None:
        return integrate.quad(problem.f, theta, 1.0, epsabs=0.0, epsrel=1e-12, limit=500)
    # u = 1 - t**(1/(1+ge)) maps the power singularity at u = 1 to a regular endpoint
    a = 1.0 / (1.0 + ge)
    t_max = (1.0 - theta) ** (1.0 + ge)

    def integrand(t):
        if t <= 0.0:
            return 0.0
        s = t**a
        return problem.f(1.0 - s) * a * s / t

    return integrate.quad(integrand, 0.0, t_max, epsabs=0.0, epsrel=1e-12, limit=500)


def check_nonexistence(problem: Problem, I: float | None = None) -> tuple[bool, bool]:
    """Return (weak, strict) forms of the nonexistence inequality."""
    if I is None:
        I = integral_I(problem)
    pc = problem.p_conj
    lhs = problem.H(problem.theta)
    rhs = problem.theta * problem.h_m + (pc * I) ** (1.0 / pc)
    return bool(lhs >= rhs), bool(lhs > rhs)


def check_existence(problem: Problem, I: float | None = None) -> bool:
    if I is None:
        I = integral_I(problem)
    pc = problem.p_conj
    return bool(problem.H(1.0) <= problem.h_m + (k_of_p(problem.p) * I) ** (1.0 / pc))


def check_positive_speed(problem: Problem, I: float | None = None) -> bool:
    """Sufficient condition for c* > 0 when h > 0 on [0, 1]."""
    if not problem.h_m > 0:
        raise PreconditionViolation(
            f"positive-speed test needs h > 0 on [0, 1]; min h = {problem.h_m:.6g} (c* > 0 already follows when min h <= 0)"
        )
    if I is None:
        I = integral_I(problem)
    pc = problem.p_conj
    return bool(problem.H(1.0) <= (k_of_p(problem.p) * I) ** (1.0 / pc))


def c_upper_bound(problem: Problem, I: float | None = None) -> float:
    """Strict upper bound on c*: y_c*(theta)**(1/p') = c* theta + H(theta) and y_c(theta) < p' I.

    No -min h term: undoing the shift h -> h - min h cancels it.
    """
    if I is None:
        I = integral_I(problem)
    pc = problem.p_conj
    return float(((pc * I) ** (1.0 / pc) - problem.H(problem.theta)) / problem.theta)


def evaluate(problem: Problem) -> CriteriaReport:
    I = integral_I(problem)
    weak, strict = check_nonexistence(problem, I)
    h_m = problem.h_m
    if I > 0:
        exists = check_existence(problem, I)
    else:
        # no reaction at all: nothing can propagate
        exists, weak = False, True
    if not exists:
        positive = False
    elif h_m <= 0:
        positive = True
    else:
        positive = check_positive_speed(problem, I)

    if weak:
        verdict = Verdict.NO_SOLUTION
    elif exists:
        verdict = Verdict.EXISTS
    else:
        verdict = Verdict.INCONCLUSIVE
    all_c = strict and bool(np.isclose(h_m, float(problem.h(0.0)), rtol=0.0, atol=1e-12))
    return CriteriaReport(
        integral_I=I,
        H_theta=float(problem.H(problem.theta)),
        H_one=float(problem.H(1.0)),
        h_m=h_m,
        k_p=k_of_p(problem.p),
        nonexistence_weak=weak,
        nonexistence_strict=strict,
        nonexistence_all_c=all_c,
        existence=exists,
        positive_speed=positive,
        c_upper=c_upper_bound(problem, I),
        verdict=verdict,
    )
