"""Edge behaviour of wave profiles for power-law coefficients.

Near u = 0 the profile reaches 0 at a finite coordinate exactly when
p + alpha > 2; near u = 1 the outcome depends on which of four regions of the
(gamma, beta) plane contains the exponents:

    M11: -1 < q <= 1/(p-1),  gamma - beta + 1 <  p    finite
    M12: -1 < q <= 1/(p-1),  gamma - beta + 1 >= p    infinite
    M13:      q >  1/(p-1),  gamma <  1               finite
    M14:      q >  1/(p-1),  gamma >= 1               infinite

with q = gamma + beta / (p - 1).  Comparisons are carried out in exact rational
arithmetic on the decimal representation of the inputs, so points lying on a
dividing line classify by the closed/open conventions above.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import DomainError, OutOfTheoremScope, PreconditionViolation
from .model import Problem

DEAD_BAND = 1e-12


class Support(str, enum.Enum):
    INFINITE_TAIL = "InfiniteTail"
    FINITE_EDGE = "FiniteEdge"


class Slope(str, enum.Enum):
    NEG_INFINITY = "NegInfinity"
    NEGATIVE_CONSTANT = "NegativeConstant"
    ZERO = "Zero"
    NOT_APPLICABLE = "NotApplicable"


class Region(str, enum.Enum):
    M11 = "M11"
    M12 = "M12"
    M13 = "M13"
    M14 = "M14"


class BoundaryProximityWarning(UserWarning):
    """A classification input sits within the dead-band of a dividing line."""


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"exponent must be finite, got {x!r}")
    # repr gives the shortest decimal that round-trips, e.g. 0.1 -> 1/10
    return Fraction(repr(x))


def _cmp(a: Fraction, b: Fraction, what: str) -> int:
    d = a - b
    if d != 0 and abs(d) <= DEAD_BAND:
        warnings.warn(f"{what}: value within {DEAD_BAND:g} of the dividing line", BoundaryProximityWarning, stacklevel=3)
    return (d > 0) - (d < 0)


def classify_zero(p, alpha) -> tuple[Support, Slope]:
    """Support and one-sided slope of the profile at the edge where u reaches 0."""
    P, A = _q(p), _q(alpha)
    if not P > 1:
        raise DomainError(f"p must exceed 1, got {p!r}")
    if _cmp(P + A, Fraction(2), "p + alpha vs 2") <= 0:
        return Support.INFINITE_TAIL, Slope.NOT_APPLICABLE
    s = _cmp(A, Fraction(1), "alpha vs 1")
    if s > 0:
        return Support.FINITE_EDGE, Slope.NEG_INFINITY
    if s == 0:
        return Support.FINITE_EDGE, Slope.NEGATIVE_CONSTANT
    return Support.FINITE_EDGE, Slope.ZERO


def classify_one(p, beta, gamma) -> tuple[Support, Region]:
    """Support at the edge where u reaches 1 and the (gamma, beta) region label."""
    P, B, G = _q(p), _q(beta), _q(gamma)
    if not P > 1:
        raise DomainError(f"p must exceed 1, got {p!r}")
    if not G > 0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    q = G + B / (P - 1)
    if _cmp(q, Fraction(-1), "gamma + beta/(p-1) vs -1") <= 0:
        raise OutOfTheoremScope(f"gamma + beta/(p-1) = {float(q):.6g} <= -1 is not covered by any region")
    if _cmp(q, 1 / (P - 1), "gamma + beta/(p-1) vs 1/(p-1)") <= 0:
        if _cmp(G - B + 1, P, "gamma - beta + 1 vs p") < 0:
            return Support.FINITE_EDGE, Region.M11
        return Support.INFINITE_TAIL, Region.M12
    if _cmp(G, Fraction(1), "gamma vs 1") < 0:
        return Support.FINITE_EDGE, Region.M13
    return Support.INFINITE_TAIL, Region.M14


def region_membership(p, beta, gamma) -> list[Region]:
    """All regions whose defining inequalities hold; used to test the partition."""
    P, B, G = _q(p), _q(beta), _q(gamma)
    q = G + B / (P - 1)
    lower = -1 < q <= 1 / (P - 1)
    upper = q > 1 / (P - 1)
    out = []
    if G > 0 and lower and G - B + 1 < P:
        out.append(Region.M11)
    if G > 0 and lower and G - B + 1 >= P:
        out.append(Region.M12)
    if G > 0 and upper and G < 1:
        out.append(Region.M13)
    if G > 0 and upper and G >= 1:
        out.append(Region.M14)
    return out


@dataclass(frozen=True)
class EdgeClassification:
    at_zero: Support
    slope_at_xi2: Slope
    at_one: Support
    region_at_one: Region
    slope_at_xi1_zero: bool

    def to_dict(self) -> dict:
        return {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in asdict(self).items()}


def classify(p, alpha, beta, gamma) -> EdgeClassification:
    at_zero, slope = classify_zero(p, alpha)
    at_one, region = classify_one(p, beta, gamma)
    return EdgeClassification(
        at_zero=at_zero,
        slope_at_xi2=slope,
        at_one=at_one,
        region_at_one=region,
        slope_at_xi1_zero=at_one is Support.FINITE_EDGE,
    )


def check_standing_hypotheses(problem: Problem, c_star: Optional[float] = None) -> None:
    """Raise unless H >= 0 on (0, 1] and (when given) c* > 0.

    H = 0 (no convection) is admitted: y**(1/p') = c* u still behaves like u at 0.
    """
    u = np.linspace(0.0, 1.0, 2001)[1:]
    if np.any(problem.H(u) < 0.0):
        raise PreconditionViolation("edge classification assumes H >= 0 on (0, 1]")
    if c_star is not None and not c_star > 0:
        raise PreconditionViolation(f"edge classification assumes c* > 0, got {c_star!r}")


def classify_problem(problem: Problem, c_star: Optional[float] = None) -> EdgeClassification:
    d, r = problem.diffusion, problem.reaction
    if d.alpha is None or d.beta is None or r.gamma is None:
        raise PreconditionViolation("custom coefficients need explicit alpha, beta and gamma for classification")
    check_standing_hypotheses(problem, c_star)
    return classify(problem.p, d.alpha, d.beta, r.gamma)


def tail_exponent_zero(p: float, alpha: float) -> float:
    """Exponent e with D**(p'-1) / y**(1/p) ~ u**e as u -> 0+ (for c* + h(0) > 0)."""
    return (alpha - 1.0) / (p - 1.0)


def tail_exponent_one(p: float, beta: float, gamma: float) -> float:
    """Exponent e with D**(p'-1) / y**(1/p) ~ (1-u)**e as u -> 1-."""
    q = gamma + beta / (p - 1.0)
    if q <= 1.0 / (p - 1.0):
        return (beta - gamma - 1.0) / p
    return -gamma


def cross_validate(classification: EdgeClassification, table) -> dict:
    """Compare numerical edge markers and slope trends of a profile table with a classification."""
    edges = table.edges
    out = {}
    checks = (
        ("xi2", classification.at_zero, edges["zero"]["numeric_finite"]),
        ("xi1", classification.at_one, edges["one"]["numeric_finite"]),
    )
    for name, predicted, numeric in checks:
        want = predicted is Support.FINITE_EDGE
        ok = numeric is None or numeric == want
        out[name] = {
            "predicted": predicted.value,
            "numeric_finite": numeric,
            "pass": bool(ok),
        }
    slope_pred = classification.slope_at_xi2
    slope_exp = edges["zero"].get("slope_exponent")
    if slope_pred is Slope.NOT_APPLICABLE or slope_exp is None:
        out["slope_at_xi2"] = {"predicted": slope_pred.value, "pass": True}
    else:
        tol = 0.05
        if slope_exp > tol:
            observed = Slope.ZERO
        elif slope_exp < -tol:
            observed = Slope.NEG_INFINITY
        else:
            observed = Slope.NEGATIVE_CONSTANT
        out["slope_at_xi2"] = {
            "predicted": slope_pred.value,
            "observed": observed.value,
            "slope_exponent": slope_exp,
            "pass": observed is slope_pred,
        }
    out["pass"] = all(v["pass"] for v in out.values() if isinstance(v, dict))
    return out
