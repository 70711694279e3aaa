"""Brute-force validators for the technical inequalities and the constant k(p)."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .criteria import integral_I
from .exceptions import DomainError, PreconditionViolation
from .model import Problem, k_of_p, khat, make_problem, stationary_point
from .shooting import integrate_y

# relative slack for floating-point equality cases (r = 2 is an identity)
REL_SLACK = 1e-12


@dataclass(frozen=True)
class InequalityReport:
    name: str
    samples_tested: int
    violations: int
    worst_margin: float

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {**asdict(self), "ok": self.ok}


def _ratio(t, r):
    """(1 + r t + t**r) / (1 + t)**r, the normalised left side with t = b / a."""
    return (1.0 + r * t + t**r) / (1.0 + t) ** r


def tech_margin(a, b, r):
    """Normalised slack bound - lhs/(a+b)**r of the technical inequality (vectorised)."""
    a, b, r = (np.atleast_1d(np.asarray(x, dtype=float)) for x in np.broadcast_arrays(a, b, r))
    if np.any(a <= 0) or np.any(b <= 0) or np.any(r <= 1):
        raise DomainError("tech inequality needs a > 0, b > 0 and r > 1")
    s = a / (a + b)
    w = b / (a + b)
    lhs = s**r + r * s ** (r - 1.0) * w + w**r
    bound = np.ones_like(r)
    sel = r < 2.0
    bound[sel] = [khat(float(x)) for x in r[sel]]
    return bound - lhs


def tech_inequality(a: float, b: float, r: float) -> bool:
    """Check a**r + r a**(r-1) b + b**r <= K (a+b)**r with K = 1 (r >= 2) or khat(r) (1 < r < 2)."""
    return bool(tech_margin(a, b, r)[0] >= -REL_SLACK)


def khat_max_oracle(r: float) -> float:
    """max over t >= 0 of (1 + r t + t**r)/(1 + t)**r by golden-section search."""
    if not 1.0 < r < 2.0:
        raise DomainError(f"khat oracle needs 1 < r < 2, got {r!r}")
    # search in s = log t; start at the predicted stationary point and widen until it brackets a maximum
    neg = lambda s: -_ratio(math.exp(s), r)  # noqa: E731
    centre = math.log(stationary_point(r))
    width = 1.0
    for _ in range(60):
        lo, hi = centre - width, centre + width
        if neg(centre) < min(neg(lo), neg(hi)):
            break
        width *= 2.0
    else:
        raise RuntimeError(f"could not bracket the maximum for r = {r!r}")
    res = optimize.minimize_scalar(neg, bracket=(lo, centre, hi), method="golden", options={"xtol": 1e-12})
    return float(-res.fun)


def case2_constant(p: float) -> float:
    """k for 1 < p < 2 rebuilt from the coefficient sum in the contradiction argument."""
    r = p / (p - 1.0)
    coeff = -1.0 + (1.0 - r * 2.0 ** (r - 2.0)) + (r - r * 2.0 ** (r - 2.0))
    return r / -coeff


def k_consistency(p: float, tol: float = 1e-9) -> bool:
    if not p > 1.0 or p == 2.0:
        raise DomainError(f"k_consistency needs p > 1, p != 2; got {p!r}")
    r = p / (p - 1.0)
    if p > 2.0:
        expected = r / (r - 1.0 + khat_max_oracle(r))
    else:
        expected = case2_constant(p)
    return abs(k_of_p(p) - expected) <= tol * max(1.0, abs(expected))


def lemma_yH_check(problem: Problem) -> bool:
    """At c = 0, y_0(theta)**(1/p') exceeds H(theta) whenever H(1)**p' <= k(p) I and h >= 0."""
    if problem.h_m < 0:
        raise PreconditionViolation(f"lemma needs h >= 0, min h = {problem.h_m:.6g}")
    I = integral_I(problem)
    pc = problem.p_conj
    H1 = float(problem.H(1.0))
    if not H1**pc <= k_of_p(problem.p) * I:
        raise PreconditionViolation(f"hypothesis H(1)^p' = {H1**pc:.6g} > k(p) I = {k_of_p(problem.p) * I:.6g}")
    out = integrate_y(problem, 0.0, I=I)
    return bool(out.y_theta ** (1.0 / pc) > float(problem.H(problem.theta)))


# ---- campaigns -------------------------------------------------------------

def tech_campaign(n: int = 100_000, seed: int = 0, r_max: float = 8.0) -> InequalityReport:
    rng = np.random.default_rng(seed)
    a = 10.0 ** rng.uniform(-4.0, 4.0, n)
    b = 10.0 ** rng.uniform(-4.0, 4.0, n)
    r = 1.0 + (r_max - 1.0) * (1.0 - rng.random(n))  # (1, r_max]
    m = tech_margin(a, b, r)
    return InequalityReport("technical inequality", n, int(np.count_nonzero(m < -REL_SLACK)), float(m.min()))


def khat_campaign(n: int = 50, tol: float = 1e-10) -> InequalityReport:
    rs = np.linspace(1.0, 2.0, n + 2)[1:-1]
    diffs = np.array([khat(float(r)) - khat_max_oracle(float(r)) for r in rs])
    below_one = sum(khat_max_oracle(float(r)) <= 1.0 for r in rs)
    bad = int(np.count_nonzero(np.abs(diffs) > tol)) + int(below_one)
    return InequalityReport("khat closed form vs search", n, bad, float(-np.max(np.abs(diffs))))


def k_campaign(n: int = 50) -> InequalityReport:
    ps = [p for p in np.linspace(1.05, 20.0, n) if p != 2.0]
    bad = sum(not k_consistency(float(p)) for p in ps)
    return InequalityReport("k(p) branch consistency", len(ps), int(bad), 0.0)


def yH_campaign(n: int = 100, seed: int = 1) -> InequalityReport:
    """Random power-law instances with a constant h >= 0 inside the lemma hypothesis."""
    rng = np.random.default_rng(seed)
    bad, worst = 0, math.inf
    for _ in range(n):
        p = float(rng.uniform(1.3, 4.0))
        prob = make_problem(
            p, float(rng.uniform(0.2, 0.8)),
            alpha=float(rng.uniform(0.0, 1.5)), beta=float(rng.uniform(0.0, 1.0)),
            g0=float(rng.uniform(0.5, 3.0)), sigma=float(rng.uniform(0.5, 2.0)), gamma=float(rng.uniform(0.5, 2.0)),
        )
        I = integral_I(prob)
        # constant h with H(1)**p' a random fraction of k(p) I
        kappa = float(rng.uniform(0.0, 0.95) * (k_of_p(p) * I) ** (1.0 / prob.p_conj))
        prob = make_problem(
            p, prob.theta, alpha=prob.diffusion.alpha, beta=prob.diffusion.beta,
            g0=prob.reaction.g0, sigma=prob.reaction.sigma, gamma=prob.reaction.gamma, coeffs=(kappa,),
        )
        out = integrate_y(prob, 0.0)
        margin = out.y_theta ** (1.0 / prob.p_conj) - float(prob.H(prob.theta))
        worst = min(worst, margin)
        bad += not margin > 0
    return InequalityReport("y_0(theta) above H(theta)", n, int(bad), float(worst))


def run_all(quick: bool = False) -> list[InequalityReport]:
    return [
        tech_campaign(10_000 if quick else 100_000),
        khat_campaign(),
        k_campaign(),
        yH_campaign(20 if quick else 100),
    ]
