"""Problem definition: coefficients D, g, h, the exponent p and shared constants.

The built-in coefficient families are

    D(u) = d0 * u**alpha * (1 - u)**beta
    g(u) = g0 * (u - theta)**sigma * (1 - u)**gamma   for theta < u < 1, else 0
    h(u) = sum_j coeffs[j] * u**j

Each family also accepts a ``custom_hook`` callable which replaces the formula.
The exponents stay attached to the spec and describe the endpoint behaviour of
the hook; they are what the edge classification consumes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .exceptions import DomainError

Hook = Callable[[float], float]


def _as_array(u):
    arr = np.asarray(u, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class Exponents:
    p: float

    def __post_init__(self):
        if not (self.p > 1.0) or not math.isfinite(self.p):
            raise DomainError(f"p must be a finite real > 1, got {self.p!r}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)


@dataclass(frozen=True)
class DiffusionSpec:
    d0: float = 1.0
    alpha: Optional[float] = 0.0
    beta: Optional[float] = 0.0
    custom_hook: Optional[Hook] = None

    def __post_init__(self):
        if not self.d0 > 0:
            raise DomainError(f"diffusion.d0 must be positive, got {self.d0!r}")
        if self.custom_hook is None and (self.alpha is None or self.beta is None):
            raise DomainError("built-in diffusion needs numeric alpha and beta")

    def __call__(self, u):
        u, scalar = _as_array(u)
        if self.custom_hook is not None:
            val = np.vectorize(self.custom_hook, otypes=[float])(u)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                val = self.d0 * u**self.alpha * (1.0 - u) ** self.beta
        return _out(val, scalar)


@dataclass(frozen=True)
class ReactionSpec:
    theta: float
    g0: float = 1.0
    sigma: float = 1.0
    gamma: Optional[float] = 1.0
    custom_hook: Optional[Hook] = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise DomainError(f"theta must lie in (0, 1), got {self.theta!r}")
        if self.g0 < 0:
            raise DomainError(f"reaction.g0 must be nonnegative, got {self.g0!r}")
        if not self.sigma > 0:
            raise DomainError(f"reaction.sigma must be positive, got {self.sigma!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise DomainError(f"reaction.gamma must be positive, got {self.gamma!r}")
        if self.custom_hook is None and self.gamma is None:
            raise DomainError("built-in reaction needs a numeric gamma")

    def __call__(self, u):
        u, scalar = _as_array(u)
        active = (u > self.theta) & (u < 1.0)
        val = np.zeros_like(u)
        if self.custom_hook is not None:
            if np.any(active):
                val[active] = np.vectorize(self.custom_hook, otypes=[float])(u[active])
        else:
            ua = u[active]
            val[active] = self.g0 * (ua - self.theta) ** self.sigma * (1.0 - ua) ** self.gamma
        return _out(val, scalar)


@dataclass(frozen=True)
class ConvectionSpec:
    """Convective velocity h; H is its antiderivative with H(0) = 0."""

    coeffs: tuple = (0.0,)
    custom_hook: Optional[Hook] = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))

    @cached_property
    def _poly(self):
        return np.polynomial.Polynomial(self.coeffs)

    @cached_property
    def _antiderivative(self):
        # integ() uses lbnd=0, k=0, so H(0) == 0 exactly
        return self._poly.integ()

    def velocity(self, u):
        u, scalar = _as_array(u)
        if self.custom_hook is not None:
            val = np.vectorize(self.custom_hook, otypes=[float])(u)
        else:
            val = self._poly(u)
        return _out(np.asarray(val, dtype=float), scalar)

    def antiderivative(self, u):
        u, scalar = _as_array(u)
        if self.custom_hook is None:
            return _out(np.asarray(self._antiderivative(u), dtype=float), scalar)

        def one(x):
            if x == 0.0:
                return 0.0
            val, _ = integrate.quad(self.custom_hook, 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)
            return val

        return _out(np.vectorize(one, otypes=[float])(u), scalar)

    @cached_property
    def minimum(self) -> float:
        if self.custom_hook is None:
            return _poly_min(self._poly)
        return _hook_min(self.custom_hook)

    @property
    def is_constant(self) -> bool:
        return self.custom_hook is None and all(c == 0.0 for c in self.coeffs[1:])


def _poly_min(poly) -> float:
    """Minimum of a polynomial on [0, 1].

    Critical points come from sign changes of the derivative on a 1e-3 grid,
    refined by bracketing to 1e-12.
    """
    deriv = poly.deriv()
    grid = np.linspace(0.0, 1.0, 1001)
    dv = deriv(grid)
    candidates = [0.0, 1.0]
    candidates.extend(grid[1:-1][dv[1:-1] == 0.0])
    sign_change = np.nonzero(dv[:-1] * dv[1:] < 0)[0]
    for i in sign_change:
        candidates.append(optimize.brentq(deriv, grid[i], grid[i + 1], xtol=1e-12))
    return float(min(poly(x) for x in candidates))


def _hook_min(h: Hook) -> float:
    grid = np.linspace(0.0, 1.0, 2001)
    vals = np.array([h(x) for x in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best = vals[i]
    if hi > lo:
        res = optimize.minimize_scalar(h, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = min(best, float(res.fun))
    return float(best)


@dataclass(frozen=True)
class Problem:
    exponents: Exponents
    diffusion: DiffusionSpec
    reaction: ReactionSpec
    convection: ConvectionSpec = field(default_factory=ConvectionSpec)

    @property
    def p(self) -> float:
        return self.exponents.p

    @property
    def p_conj(self) -> float:
        return self.exponents.p_conj

    @property
    def theta(self) -> float:
        return self.reaction.theta

    @property
    def is_builtin(self) -> bool:
        return self.diffusion.custom_hook is None and self.reaction.custom_hook is None

    @property
    def gamma_eff(self) -> Optional[float]:
        """Power of (1 - u) in f = D**(p'-1) * g near u = 1, when known."""
        beta, gamma = self.diffusion.beta, self.reaction.gamma
        if beta is None or gamma is None:
            return None
        return (self.p_conj - 1.0) * beta + gamma

    @property
    def integrable(self) -> bool:
        ge = self.gamma_eff
        return ge is None or ge > -1.0

    @cached_property
    def h_m(self) -> float:
        return self.convection.minimum

    def D(self, u):
        return self.diffusion(u)

    def g(self, u):
        return self.reaction(u)

    def h(self, u):
        return self.convection.velocity(u)

    def H(self, u):
        return self.convection.antiderivative(u)

    def f(self, u):
        """D**(p'-1) * g, with the value 0 wherever g vanishes."""
        u, scalar = _as_array(u)
        out = np.zeros_like(u)
        active = (u > self.theta) & (u < 1.0)
        if np.any(active):
            ua = u[active]
            with np.errstate(over="raise"):
                try:
                    out[active] = self.diffusion(ua) ** (self.p_conj - 1.0) * self.reaction(ua)
                except FloatingPointError:
                    raise OverflowError("D**(p'-1) overflows; beta too negative for this u") from None
        return _out(out, scalar)

    @cached_property
    def f_scalar(self) -> Callable[[float], float]:
        """Fast float-only f for ODE right-hand sides."""
        if not self.is_builtin:
            return lambda u: float(self.f(u))
        d, r = self.diffusion, self.reaction
        e = self.p_conj - 1.0
        scale = d.d0**e * r.g0
        a, ge = d.alpha * e, self.gamma_eff
        theta, sigma = r.theta, r.sigma

        def f(u):
            if u <= theta or u >= 1.0:
                return 0.0
            return scale * u**a * (u - theta) ** sigma * (1.0 - u) ** ge

        return f

    @cached_property
    def h_scalar(self) -> Callable[[float], float]:
        conv = self.convection
        if conv.custom_hook is not None:
            return conv.custom_hook
        coeffs = conv.coeffs[::-1]

        def h(u):
            acc = 0.0
            for c in coeffs:
                acc = acc * u + c
            return acc

        return h

    def with_convection(self, coeffs=None, custom_hook=None) -> "Problem":
        if coeffs is None and custom_hook is None:
            coeffs = (0.0,)
        return replace(self, convection=ConvectionSpec(coeffs=coeffs or (0.0,), custom_hook=custom_hook))

    def shifted_convection(self, delta: float) -> "Problem":
        """Problem with h replaced by h + delta."""
        conv = self.convection
        if conv.custom_hook is None:
            coeffs = list(conv.coeffs)
            coeffs[0] += delta
            return self.with_convection(coeffs)
        hook = conv.custom_hook
        return self.with_convection(custom_hook=lambda u: hook(u) + delta)

    def scaled_reaction(self, factor: float) -> "Problem":
        r = self.reaction
        if r.custom_hook is None:
            return replace(self, reaction=replace(r, g0=r.g0 * factor))
        hook = r.custom_hook
        return replace(self, reaction=replace(r, custom_hook=lambda u: factor * hook(u)))


def make_problem(
    p: float,
    theta: float,
    *,
    d0: float = 1.0,
    alpha: float = 0.0,
    beta: float = 0.0,
    g0: float = 1.0,
    sigma: float = 1.0,
    gamma: float = 1.0,
    coeffs: Sequence[float] = (0.0,),
) -> Problem:
    """Build a problem from the built-in parametric families."""
    return Problem(
        exponents=Exponents(p),
        diffusion=DiffusionSpec(d0=d0, alpha=alpha, beta=beta),
        reaction=ReactionSpec(theta=theta, g0=g0, sigma=sigma, gamma=gamma),
        convection=ConvectionSpec(coeffs=tuple(coeffs)),
    )


def reference_problem(**overrides) -> Problem:
    """p = 2, D = 1, h = 0, theta = 1/2, g = 2 (u - 1/2)(1 - u)."""
    params = dict(p=2.0, theta=0.5, g0=2.0, sigma=1.0, gamma=1.0)
    params.update(overrides)
    return make_problem(**params)


# ---------------------------------------------------------------------------
# checked point evaluations


def _check_open(u, name="u"):
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"{name} must lie in (0, 1)")


def _check_closed(u, name="u"):
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"{name} must lie in [0, 1]")


def eval_D(problem: Problem, u):
    _check_open(u)
    return problem.D(u)


def eval_g(problem: Problem, u):
    _check_closed(u)
    return problem.g(u)


def eval_H(problem: Problem, u):
    _check_closed(u)
    return problem.H(u)


def h_min(problem: Problem) -> float:
    return problem.h_m


def eval_f(problem: Problem, u):
    _check_closed(u)
    arr = np.asarray(u, dtype=float)
    if np.any(arr == 1.0):
        ge = problem.gamma_eff
        if ge is not None and not ge > 0:
            raise DomainError("f(1) is undefined when (p'-1)*beta + gamma <= 0")
    return problem.f(u)


# ---------------------------------------------------------------------------
# special functions


def khat(r: float) -> float:
    """Closed-form maximum of (1 + r t + t**r) / (1 + t)**r over t >= 0, 1 < r < 2."""
    if not 1.0 < r < 2.0:
        raise DomainError(f"khat needs 1 < r < 2, got {r!r}")
    t1 = stationary_point(r)
    return (1.0 + r * t1 + t1**r) / (1.0 + t1) ** r


def stationary_point(r: float) -> float:
    """t1 = (r - 1)**(1 / (r - 2)), the interior critical point of the ratio above."""
    return math.exp(math.log(r - 1.0) / (r - 2.0))


def k_of_p(p: float) -> float:
    """Constant k(p) in the sufficient existence condition."""
    if not p > 1.0:
        raise DomainError(f"k(p) needs p > 1, got {p!r}")
    if p == 2.0:
        return 1.0
    pc = p / (p - 1.0)
    if p < 2.0:
        try:
            return 1.0 / math.expm1((pc - 1.0) * math.log(2.0))
        except OverflowError:
            return 0.0
    # p > 2: write p' - 2 = (2 - p) / (p - 1) and log(p' - 1) = -log(p - 1) for accuracy near p = 2
    t1 = math.exp(math.log1p(p - 2.0) * (p - 1.0) / (p - 2.0))
    kh = (1.0 + pc * t1 + t1**pc) / (1.0 + t1) ** pc
    return pc / (pc - 1.0 + kh)


def signed_power(v, q: float):
    """sign(v) * |v|**q; odd and strictly increasing for q > 0."""
    arr, scalar = _as_array(v)
    out = np.sign(arr) * np.abs(arr) ** q
    return _out(out, scalar)
