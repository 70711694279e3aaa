"""Direct simulation of the evolution equation from step-like data.

    v_t = [D(v) |v_x|^(p-2) v_x]_x + (H(v))_x + g(v)   on (-L, L)

with v = 1 at the left boundary and v = 0 at the right.  Explicit finite
volumes: the diffusive face flux uses the arithmetic-mean face value, the
convective flux -H(v) is upwinded on the sign of -h at the face.  The measured
front is the level set v = theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import evaluate
from .exceptions import DomainError, InstabilityDetected, NonPropagation, PreconditionViolation
from .model import Problem

OVERSHOOT = 0.01
SUPPORT_LEVELS = (1e-6, 1e-12)
_EDGE = 1e-14


@dataclass(frozen=True)
class SimConfig:
    L: float = 50.0
    N: int = 4000
    cfl: float = 0.9
    t_end: float = 100.0
    gradient_floor: float = 1e-8
    record_stride: int = 50

    def __post_init__(self):
        if not self.N >= 100:
            raise DomainError(f"N must be at least 100, got {self.N!r}")
        if not 0.0 < self.cfl < 1.0:
            raise DomainError(f"cfl must lie in (0, 1), got {self.cfl!r}")
        if not (self.L > 0 and self.t_end > 0 and self.gradient_floor > 0 and self.record_stride >= 1):
            raise DomainError("L, t_end and gradient_floor must be positive, record_stride at least 1")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N


@dataclass
class SimResult:
    times: np.ndarray
    front_positions: np.ndarray
    fitted_speed: float
    fit_rms: float
    support_edges: dict = field(default_factory=dict)
    edge_speed: float = math.nan
    steps: int = 0
    dx: float = math.nan

    def series(self):
        return list(zip(self.times.tolist(), self.front_positions.tolist()))

    def support_gap(self) -> float:
        """Final distance between the 1e-6 and 1e-12 level positions (small for a sharp edge)."""
        hi, lo = (self.support_edges[s] for s in SUPPORT_LEVELS)
        return float(lo[-1] - hi[-1])

    def to_dict(self) -> dict:
        return {
            "fitted_speed": self.fitted_speed,
            "fit_rms": self.fit_rms,
            "edge_speed": self.edge_speed,
            "support_gap": self.support_gap() if self.support_edges else None,
            "steps": self.steps,
            "dx": self.dx,
        }


def _crossing(x, v, level):
    """First x (from the left) where v drops through `level`, by linear interpolation."""
    below = np.nonzero(v < level)[0]
    if below.size == 0:
        return float(x[-1])
    j = int(below[0])
    if j == 0:
        return float(x[0])
    v0, v1 = v[j - 1], v[j]
    return float(x[j - 1] + (v0 - level) / (v0 - v1) * (x[j] - x[j - 1]))


def _last_above(x, v, level):
    idx = np.nonzero(v > level)[0]
    return float(x[idx[-1]]) if idx.size else float(x[0])


def _fit(t, x):
    sel = t >= t[0] + 0.5 * (t[-1] - t[0])
    ts, xs = t[sel], x[sel]
    if ts.size < 2:
        return math.nan, math.nan, ts, xs
    slope, icpt = np.polyfit(ts, xs, 1)
    rms = float(np.sqrt(np.mean((xs - (slope * ts + icpt)) ** 2)))
    return float(slope), rms, ts, xs


def _reaction_lipschitz(problem: Problem) -> float:
    u = np.linspace(0.0, 1.0, 4001)
    gv = problem.g(u)
    return float(np.max(np.abs(np.diff(gv))) / (u[1] - u[0]))


def simulate(problem: Problem, config: SimConfig = SimConfig()) -> SimResult:
    """Evolve the equation to t_end and fit the speed of the theta level set."""
    if evaluate(problem).nonexistence_strict:
        raise PreconditionViolation("no wave exists for this problem; there is no speed to measure")
    p = problem.p
    theta = problem.theta
    N, dx, floor = config.N, config.dx, config.gradient_floor
    x = -config.L + dx * (np.arange(N) + 0.5)

    # unit step at x = 0, ramped linearly over 4 cells
    v = np.clip(0.5 - x / (4.0 * dx), 0.0, 1.0)

    lip_g = _reaction_lipschitz(problem)
    uu = np.linspace(0.0, 1.0, 2001)
    h_max = float(np.max(np.abs(problem.h(uu))))

    vext = np.empty(N + 2)
    times, fronts = [0.0], [_crossing(x, v, theta)]
    edges = {s: [_last_above(x, v, s)] for s in SUPPORT_LEVELS}
    t, step = 0.0, 0
    while t < config.t_end:
        vext[0], vext[1:-1], vext[-1] = 1.0, v, 0.0
        vl, vr = vext[:-1], vext[1:]
        vf = 0.5 * (vl + vr)
        grad = (vr - vl) / dx
        Df = problem.D(np.clip(vf, _EDGE, 1.0 - _EDGE))
        mag = np.abs(grad)
        if p < 2.0:
            mag = np.maximum(mag, floor)
        if p == 2.0:
            dflux = Df * grad
            d_eff = float(np.max(Df))
        else:
            secant = Df * mag ** (p - 2.0)
            dflux = secant * grad
            # linearised diffusivity: tangent for p > 2, secant (capped by the floor) for p < 2
            d_eff = max(p - 1.0, 1.0) * float(np.max(secant))
        # convective flux of v_t + (-H(v))_x = 0, upwinded on the face speed -h(vf)
        Hl, Hr = problem.H(vl), problem.H(vr)
        a = -problem.h(vf)
        cflux = np.where(a >= 0.0, -Hl, -Hr)

        dt_diff = 0.5 * dx * dx / max(d_eff, 1e-300)
        dt_conv = dx / h_max if h_max > 0 else math.inf
        dt_reac = 1.0 / lip_g if lip_g > 0 else math.inf
        dt = config.cfl * min(dt_diff, dt_conv, dt_reac)
        dt = min(dt, config.t_end - t)

        total = dflux - cflux
        v = v + dt * ((total[1:] - total[:-1]) / dx + problem.g(v))
        t += dt
        step += 1
        if v.min() < -OVERSHOOT or v.max() > 1.0 + OVERSHOOT or not np.all(np.isfinite(v)):
            raise InstabilityDetected(f"v left [-{OVERSHOOT}, {1 + OVERSHOOT}] at t = {t:.6g} (step {step})")
        if step % config.record_stride == 0 or t >= config.t_end:
            times.append(t)
            fronts.append(_crossing(x, v, theta))
            for s in SUPPORT_LEVELS:
                edges[s].append(_last_above(x, v, s))

    times_a, fronts_a = np.array(times), np.array(fronts)
    speed, rms, _, xs = _fit(times_a, fronts_a)
    if not math.isfinite(speed) or abs(xs[-1] - xs[0]) < 2.0 * dx:
        raise NonPropagation(f"front moved {abs(xs[-1] - xs[0]):.3g} < 2 cells over the fitting window")
    edges_a = {s: np.array(e) for s, e in edges.items()}
    edge_speed, _, _, _ = _fit(times_a, edges_a[SUPPORT_LEVELS[0]])
    return SimResult(
        times=times_a, front_positions=fronts_a, fitted_speed=speed, fit_rms=rms,
        support_edges=edges_a, edge_speed=edge_speed, steps=step, dx=dx,
    )
