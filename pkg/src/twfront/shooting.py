"""Shooting on the reduced first-order problem.

For a trial speed c the function y_c solves

    y' = p' * [(c + h(u)) * max(y, 0)**(1/p) - f(u)],   y(1) = 0,

integrated in decreasing u.  Below theta f vanishes and the equation separates,
so y_c is known in closed form there.  A wave exists at speed c exactly when
that closed form reaches zero at u = 0, i.e. when

    F(c) = y_c(theta)**(1/p') - c * theta - H(theta) = 0.

F is strictly decreasing in c, so c* is found by bisection between -min h and
the analytic upper bound on the speed.
"""
from __future__ import annotations

import contextlib
import enum
import logging
import math
import os
import sys
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import criteria
from .exceptions import BracketFailure, PreconditionViolation, StepFailure
from .model import Problem

log = logging.getLogger(__name__)

TOL_ODE = 1e-11
TOL_C = 1e-10
TOL_F = 1e-9
LAYER_FRACTION = 1e-4
LAYER_POINTS = 401
LAYER_DECADES = 12
PICARD_MAX_ITER = 50
PICARD_TOL = 1e-12

# fd-level redirection is process-wide; serialise it across threads
_STDOUT_LOCK = threading.RLock()


class Status(str, enum.Enum):
    FOUND = "Found"
    NO_SOLUTION = "NoSolution"
    INCONCLUSIVE_REGIME = "InconclusiveRegime"


def separable_extension(problem: Problem, c: float, y_theta: float) -> Callable:
    """Closed-form y_c on [0, theta] given its value at theta.

    y**(1/p') = y_theta**(1/p') + c (u - theta) + H(u) - H(theta), clamped at 0.
    """
    if y_theta < 0:
        raise ValueError("y_theta must be nonnegative")
    pc = problem.p_conj
    z_theta = y_theta ** (1.0 / pc)
    H_theta = problem.H(problem.theta)
    theta = problem.theta

    def y(u):
        u = np.asarray(u, dtype=float)
        z = z_theta + c * (u - theta) + problem.H(u) - H_theta
        out = np.maximum(z, 0.0) ** pc
        return float(out) if out.ndim == 0 else out

    return y


@dataclass
class YProfile:
    """y_c evaluated anywhere on [0, 1]; pieced together from the three solution regions."""

    problem: Problem
    c: float
    y_theta: float
    u_layer: float  # 1 - eps: start of the main integration
    layer_s: np.ndarray  # ascending distances 1 - u inside the startup layer
    layer_y: np.ndarray
    dense: object  # OdeSolution on [theta, u_layer]

    def __post_init__(self):
        self._below = separable_extension(self.problem, self.c, self.y_theta)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        out = np.empty_like(u)
        theta = self.problem.theta
        lo = u <= theta
        hi = u >= self.u_layer
        mid = ~(lo | hi)
        if np.any(lo):
            out[lo] = self._below(u[lo])
        if np.any(mid):
            out[mid] = np.maximum(self.dense(u[mid]).reshape(-1), 0.0)
        if np.any(hi):
            out[hi] = self._layer(1.0 - u[hi])
        return float(out[0]) if scalar else out

    def _layer(self, s):
        # y behaves like a power of s inside the layer: interpolate log y against log s
        s = np.asarray(s, dtype=float)
        ls, ly = self.layer_s[1:], self.layer_y[1:]
        pos = ly > 0
        out = np.zeros_like(s)
        if np.count_nonzero(pos) < 2:
            return np.interp(s, self.layer_s, self.layer_y)
        inside = s > 0
        out[inside] = np.exp(np.interp(np.log(s[inside]), np.log(ls[pos]), np.log(ly[pos])))
        return out


@dataclass
class ShootingOutcome:
    c: float
    u: np.ndarray
    y: np.ndarray
    y_theta: float
    residual_F: float
    positive_on_unit: bool
    below_bound: bool
    layer_method: str
    profile: YProfile = field(repr=False)

    @property
    def y_samples(self):
        return np.column_stack([self.u, self.y])


def _layer_grid(eps):
    s = np.geomspace(eps * 10.0**-LAYER_DECADES, eps, LAYER_POINTS)
    return np.concatenate([[0.0], s])


def _cumulative(values, s):
    return integrate.cumulative_simpson(values, x=s, initial=0.0)


def _layer_picard(problem, c, s):
    """Fixed-point iteration on y(s) = p' * int_0^s [f - (c + h) y**(1/p)]."""
    pc, p = problem.p_conj, problem.p
    u = 1.0 - s
    f = problem.f(u)
    ch = c + problem.h(u)
    base = pc * _cumulative(f, s)
    y = np.maximum(base, 0.0)
    for _ in range(PICARD_MAX_ITER):
        new = np.maximum(base - pc * _cumulative(ch * y ** (1.0 / p), s), 0.0)
        scale = max(float(np.max(new)), 1e-300)
        if float(np.max(np.abs(new - y))) <= PICARD_TOL * scale:
            return new, True
        y = new
    return y, False


def _layer_implicit(problem, c, s):
    """Backward-Euler marching in s = 1 - u with a monotone scalar solve per step.

    Each step solves x**p + a x = b for x = y**(1/p); the left side is convex and
    increasing, so Newton from x = b**(1/p) converges monotonically.
    """
    pc, p = problem.p_conj, problem.p
    u = 1.0 - s
    f = problem.f(u)
    ch = c + problem.h(u)
    y = np.zeros_like(s)
    for n in range(1, s.size):
        ds = s[n] - s[n - 1]
        b = y[n - 1] + ds * pc * f[n]
        a = ds * pc * ch[n]
        if b <= 0.0:
            y[n] = 0.0
            continue
        x = b ** (1.0 / p)
        for _ in range(60):
            phi = x**p + a * x - b
            step = phi / (p * x ** (p - 1.0) + a)
            x -= step
            if abs(step) <= 1e-15 * x or x <= 0:
                break
        y[n] = max(x, 0.0) ** p
    return y


@contextlib.contextmanager
def _silence_stdout():
    """Mute file descriptor 1: the Fortran LSODA core prints failures there directly."""
    fd = 1
    with _STDOUT_LOCK:
        with contextlib.suppress(AttributeError, OSError, ValueError):
            sys.stdout.flush()
        saved = os.dup(fd)
        try:
            with open(os.devnull, "w") as null:
                os.dup2(null.fileno(), fd)
            yield
        finally:
            os.dup2(saved, fd)
            os.close(saved)


class _Dense:
    """Dense output of x = y**(1/power) in s = 1 - u, presented as y(u)."""

    def __init__(self, sol, power):
        self.sol = sol
        self.power = power

    def __call__(self, u):
        return np.maximum(self.sol(1.0 - np.asarray(u, dtype=float)), 0.0) ** self.power


class _Collapsed:
    """y left of u_stop, where it fell below y_stop: continued on the slow manifold (f/(c+h))**p.

    Left of u_stop, y cannot exceed y_stop plus the sup of the manifold, and u_stop is
    only accepted where that sup is itself below y_stop; the error this adds to
    y(theta)**(1/p') is therefore at most (2 y_stop)**(1/p').
    """

    def __init__(self, dense, u_stop, y_stop, problem, c):
        self.dense, self.u_stop, self.y_stop = dense, u_stop, y_stop
        self.problem, self.c = problem, c

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        above = u >= self.u_stop
        if np.any(above):
            out[above] = np.reshape(self.dense(u[above]), -1)
        if np.any(~above):
            ul = u[~above]
            b = self.c + self.problem.h(ul)
            with np.errstate(divide="ignore", invalid="ignore"):
                manifold = np.where(b > 0, (self.problem.f(ul) / b) ** self.problem.p, self.y_stop)
            out[~above] = np.minimum(self.y_stop, manifold)
        return out


class _Stitched:
    """Dense y(u) from two consecutive segments meeting at u_split."""

    def __init__(self, upper, lower, u_split):
        self.upper, self.lower, self.u_split = upper, lower, u_split

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        hi = u >= self.u_split
        if np.any(hi):
            out[hi] = np.reshape(self.upper(u[hi]), -1)
        if np.any(~hi):
            out[~hi] = np.reshape(self.lower(u[~hi]), -1)
        return out


def _collapse_level(problem):
    # y**(1/p') at this level is far below the residual tolerance
    return (1e-3 * TOL_F) ** problem.p_conj


def _collapse_cutoff(problem, c, y_stop):
    """Largest sampled u such that (f/(c+h))**p <= y_stop on all of [theta, u]."""
    theta = problem.theta
    u = theta + (1.0 - theta) * np.geomspace(1e-15, 1.0, 400)[:-1]
    b = c + problem.h(u)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        manifold = np.where(b > 0, (problem.f(u) / b) ** problem.p, np.inf)
    bad = np.nonzero(~(manifold <= y_stop))[0]
    stop = bad[0] if bad.size else u.size
    return float(u[stop - 1]) if stop > 0 else theta


def _solve_main(problem, c, eps, y0, tol_ode, method):
    """Integrate from u = 1 - eps down to theta; returns (node values of y, dense y(u)).

    If the direct form fails, retry in s = 1 - u with unknown y**(1/p): s keeps
    full relative resolution next to u = 1, where the stiff regime has
    transients shorter than the float spacing of u.
    """
    theta, p, pc = problem.theta, problem.p, problem.p_conj
    f, h = problem.f_scalar, problem.h_scalar
    inv_p = 1.0 / p

    def rhs(u, y):
        return [pc * ((c + h(u)) * max(y[0], 0.0) ** inv_p - f(u))]

    def jac(u, y):
        return [[pc * (c + h(u)) * inv_p * max(y[0], 1e-300) ** (inv_p - 1.0)]]

    y_stop = _collapse_level(problem)
    u_cut = _collapse_cutoff(problem, c, y_stop)

    def collapse(u, y):
        return y[0] - y_stop

    collapse.terminal = True
    collapse.direction = -1

    kwargs = {"jac": jac} if method in ("LSODA", "Radau", "BDF") else {}

    def segment(u0, u1, y_start, events=None):
        atol = max(y_start, 1e-280) * tol_ode
        # failures are handled below, so the solver's own warnings are noise
        with _silence_stdout(), warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return integrate.solve_ivp(
                rhs, (u0, u1), [y_start], method=method, rtol=tol_ode, atol=atol, dense_output=True,
                events=events, **kwargs
            )

    # a small y licenses stopping only on [theta, u_cut], where the manifold bound holds down to theta
    split = theta + 1e-9 * (1.0 - theta) < u_cut < 1.0 - eps
    sol = segment(1.0 - eps, u_cut if split else theta, y0)
    if sol.status == 0 and not split:
        return sol.y[0, 1:], sol.sol
    if sol.status == 0:
        y_cut = float(sol.y[0, -1])
        if y_cut <= y_stop:
            return sol.y[0, 1:], _Collapsed(sol.sol, u_cut, y_stop, problem, c)
        low = segment(u_cut, theta, y_cut, events=collapse)
        if low.status >= 0:
            lower = low.sol if low.status == 0 else _Collapsed(low.sol, low.t[-1], y_stop, problem, c)
            nodes = np.concatenate([sol.y[0, 1:], low.y[0, 1:]])
            return nodes, _Stitched(sol.sol, lower, u_cut)
        sol = low
    if y0 <= 0.0:
        raise StepFailure(f"integration of y_c (c={c!r}) failed: {sol.message}")
    log.debug("y-form integration failed at c=%r (%s); retrying in y**(1/p)", c, sol.message)

    # x = y**(1/p) sits on the slow manifold x ~ f/(c+h) in the stiff regime, where Newton behaves
    A = pc * inv_p

    x_stop = y_stop**inv_p
    x_floor = 10.0 ** (-250.0 / p)  # keeps x**(-p) finite

    def rhs_x(s, x):
        u = 1.0 - s
        xx = max(x[0], x_floor)
        return [A * (f(u) - (c + h(u)) * xx) * xx ** (1.0 - p)]

    def jac_x(s, x):
        u = 1.0 - s
        b = c + h(u)
        xx = max(x[0], x_floor)
        return [[A * (-b * xx ** (1.0 - p) + (1.0 - p) * (f(u) - b * xx) * xx ** (-p))]]

    def collapse_x(s, x):
        return x[0] - x_stop if 1.0 - s <= u_cut else 1.0

    collapse_x.terminal = True
    collapse_x.direction = -1

    x0 = y0**inv_p
    solx = integrate.solve_ivp(
        rhs_x, (eps, 1.0 - theta), [x0], method="Radau", rtol=tol_ode, atol=x0 * tol_ode, dense_output=True,
        jac=jac_x, events=collapse_x,
    )
    if solx.status < 0:
        raise StepFailure(f"integration of y_c (c={c!r}) failed: {sol.message}; x-form: {solx.message}")
    dense = _Dense(solx.sol, power=p)
    if solx.status == 1:
        dense = _Collapsed(dense, 1.0 - solx.t[-1], y_stop, problem, c)
    return solx.y[0, 1:] ** p, dense


def integrate_y(
    problem: Problem,
    c: float,
    *,
    tol_ode: float = TOL_ODE,
    method: str = "LSODA",
    n_samples: int = 201,
    I: Optional[float] = None,
) -> ShootingOutcome:
    """Solve the initial value problem for y_c from u = 1 down to u = 0."""
    h_m = problem.h_m
    if c + h_m < -1e-13 * (1.0 + abs(h_m)):
        raise PreconditionViolation(f"c = {c!r} below -min h = {-h_m!r}; the initial value problem may lose uniqueness")
    theta, p, pc = problem.theta, problem.p, problem.p_conj
    eps = LAYER_FRACTION * (1.0 - theta)
    s = _layer_grid(eps)
    layer_y, ok = _layer_picard(problem, c, s)
    layer_method = "picard"
    if not ok:
        layer_y = _layer_implicit(problem, c, s)
        layer_method = "implicit"
    u0 = 1.0 - eps
    y0 = float(layer_y[-1])

    y_nodes, dense = _solve_main(problem, c, eps, y0, tol_ode, method)
    y_theta = max(float(np.reshape(dense(theta), -1)[0]), 0.0)
    F = y_theta ** (1.0 / pc) - c * theta - float(problem.H(theta))

    prof = YProfile(problem, c, y_theta, u0, s, layer_y, dense)
    u_grid = np.unique(np.concatenate([np.linspace(0.0, 1.0, n_samples), [theta, u0]]))
    y_grid = prof(u_grid)
    interior = (u_grid > theta) & (u_grid < 1.0)
    positive = bool(np.all(y_grid[interior] > 0.0) and np.all(y_nodes > 0.0))
    if I is None:
        I = criteria.integral_I(problem)
    below = bool(y_theta < pc * I)
    return ShootingOutcome(
        c=c,
        u=u_grid,
        y=y_grid,
        y_theta=y_theta,
        residual_F=F,
        positive_on_unit=positive,
        below_bound=below,
        layer_method=layer_method,
        profile=prof,
    )


def shooting_residual(problem: Problem, c: float, **kwargs) -> float:
    return integrate_y(problem, c, **kwargs).residual_F


@dataclass
class WaveSpeedResult:
    c_star: float
    bracket: tuple
    iterations: int
    status: Status
    outcome: Optional[ShootingOutcome] = field(default=None, repr=False)
    report: Optional[criteria.CriteriaReport] = field(default=None, repr=False)
    F_star: float = math.nan
    checks: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status in (Status.FOUND, Status.INCONCLUSIVE_REGIME)

    @property
    def y_table(self):
        return None if self.outcome is None else self.outcome.y_samples

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "c_star": None if math.isnan(self.c_star) else self.c_star,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "F_star": None if math.isnan(self.F_star) else self.F_star,
            "checks": dict(self.checks),
        }


def find_c_star(
    problem: Problem,
    *,
    tol_c: float = TOL_C,
    tol_F: float = TOL_F,
    tol_ode: float = TOL_ODE,
    method: str = "LSODA",
    max_iter: int = 200,
) -> WaveSpeedResult:
    """Bisection for the unique zero of the shooting residual."""
    report = criteria.evaluate(problem)
    I = report.integral_I
    h_m = problem.h_m
    c_lo = -h_m + 1e-14 * (1.0 + abs(h_m))
    c_hi = report.c_upper

    def run(c):
        return integrate_y(problem, c, tol_ode=tol_ode, method=method, I=I)

    lo_out = run(c_lo)
    if lo_out.residual_F <= 0.0 or I == 0.0:
        log.info("F(c_lo) = %.3e <= 0: no wave for c > -min h", lo_out.residual_F)
        return WaveSpeedResult(
            c_star=math.nan, bracket=(c_lo, c_hi), iterations=0, status=Status.NO_SOLUTION,
            outcome=lo_out, report=report, F_star=lo_out.residual_F,
        )
    if not c_hi > c_lo:
        raise BracketFailure(f"upper bound {c_hi!r} does not exceed lower end {c_lo!r} although F(c_lo) > 0")
    hi_out = run(c_hi)
    if hi_out.residual_F >= 0.0:
        raise BracketFailure(
            f"F(c_hi) = {hi_out.residual_F:.3e} >= 0 at the analytic upper bound; tighten tol_ode"
        )
    lo, hi = c_lo, c_hi
    best = None
    it = 0
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        out = run(mid)
        best = out
        if out.residual_F > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol_c * (1.0 + abs(mid)) and abs(out.residual_F) <= tol_F:
            break
    c_star = 0.5 * (lo + hi)
    best = run(c_star)
    status = Status.FOUND if report.verdict == criteria.Verdict.EXISTS else Status.INCONCLUSIVE_REGIME
    checks = {
        "residual_within_tol": abs(best.residual_F) <= tol_F,
        "above_lower_bound": c_star > -h_m,
        "below_upper_bound": c_star < c_hi,
        "positive_on_unit": best.positive_on_unit,
        "y_theta_below_bound": best.below_bound,
        "separable_identity": abs(best.y_theta ** (1.0 / problem.p_conj) - c_star * problem.theta
                                  - float(problem.H(problem.theta))) <= 1e-8,
    }
    return WaveSpeedResult(
        c_star=c_star, bracket=(lo, hi), iterations=it, status=status,
        outcome=best, report=report, F_star=best.residual_F, checks=checks,
    )
