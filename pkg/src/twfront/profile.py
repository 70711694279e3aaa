"""Wave profile u(xi) reconstructed from the reduced solution.

With z = y**(1/p') (so that the flux D |u'|^(p-2) u' equals -z) the wave
coordinate of a level u is

    xi(u) = -int_theta^u (D(s) / z(s))**(p'-1) ds,

normalised by u(xi = 0) = theta, and the slope is u' = -(z / D)**(p'-1).
Below theta z = c* u + H(u) exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import asymptotics
from .exceptions import ClassificationConflict, PreconditionViolation, SingularIntegrand
from .model import Problem

GL_NODES = 20
_GX, _GW = np.polynomial.legendre.leggauss(GL_NODES)
EDGE_FLOOR = 1e-12
EXPONENT_TOL = 0.1


def _wave_parts(wave):
    if not getattr(wave, "found", False) or wave.outcome is None:
        raise PreconditionViolation("profile reconstruction needs a wave with status Found")
    return wave.c_star, wave.outcome.profile


class _Integrand:
    def __init__(self, problem: Problem, wave):
        self.problem = problem
        self.c, self.yprof = _wave_parts(wave)
        self.e = problem.p_conj - 1.0

    def z(self, u):
        u = np.asarray(u, dtype=float)
        p = self.problem
        out = np.empty_like(u)
        lo = u <= p.theta
        if np.any(lo):
            out[lo] = self.c * u[lo] + p.H(u[lo])
        hi = ~lo
        if np.any(hi):
            out[hi] = self.yprof(u[hi]) ** (1.0 / p.p_conj)
        return out

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        z = self.z(u)
        with np.errstate(divide="ignore"):
            return (self.problem.D(u) / z) ** self.e


def _graded(a, b, n_mid=120, frac=0.05, ratio=0.5, floor=EDGE_FLOOR):
    """Nodes on [a, b] refined geometrically toward both ends down to distance `floor`."""
    L = b - a
    k = np.arange(0, int(math.ceil(math.log(floor / (L * frac)) / math.log(ratio))) + 1)
    d = np.maximum(L * frac * ratio**k, floor)
    mid = np.linspace(a + L * frac, b - L * frac, n_mid + 1)
    return np.unique(np.concatenate([a + d, mid, b - d]))


def _gl_segments(func, a, b):
    """Gauss-Legendre integrals of func over each [a_i, b_i] (vectorised)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * _GX[None, :]
    vals = func(pts.ravel()).reshape(pts.shape)
    return half * (vals @ _GW)


def _local_exponent(x0, x1, v0, v1):
    if v0 <= 0 or v1 <= 0 or not (math.isfinite(v0) and math.isfinite(v1)):
        return None
    return math.log(v1 / v0) / math.log(x1 / x0)


def _numeric_finite(e):
    if e is None:
        return None
    if e > -1.0 + EXPONENT_TOL:
        return True
    if e < -1.0 - EXPONENT_TOL:
        return False
    return None


@dataclass
class _Tabulation:
    nodes: np.ndarray
    xi: np.ndarray
    vals: np.ndarray
    xi1: float
    xi2: float
    exp_zero: float
    exp_one: float
    edges: dict


def _analytic_exponents(problem: Problem, c_star: float):
    d, r = problem.diffusion, problem.reaction
    e0 = e1 = None
    if d.alpha is not None and c_star + float(problem.h(0.0)) > 0:
        e0 = asymptotics.tail_exponent_zero(problem.p, d.alpha)
    if d.beta is not None and r.gamma is not None and c_star + float(problem.h(1.0)) > 0:
        try:
            asymptotics.classify_one(problem.p, d.beta, r.gamma)
            e1 = asymptotics.tail_exponent_one(problem.p, d.beta, r.gamma)
        except asymptotics.OutOfTheoremScope:
            e1 = None
    return e0, e1


def tabulate(problem: Problem, wave, *, floor: float = EDGE_FLOOR) -> _Tabulation:
    """xi at graded u-nodes plus both edge positions."""
    integrand = _Integrand(problem, wave)
    theta = problem.theta
    nodes = np.unique(np.concatenate([_graded(0.0, theta, floor=floor), _graded(theta, 1.0, floor=floor), [theta]]))
    nodes = nodes[(nodes > 0.0) & (nodes < 1.0)]
    vals = integrand(nodes)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        raise SingularIntegrand("z = y**(1/p') vanishes inside (0, 1): the y table is defective")
    seg = _gl_segments(integrand, nodes[:-1], nodes[1:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    i_theta = int(np.searchsorted(nodes, theta))
    xi = -(cum - cum[i_theta])

    e0_an, e1_an = _analytic_exponents(problem, integrand.c)
    e0_num = _local_exponent(nodes[0], nodes[1], vals[0], vals[1])
    s0, s1 = 1.0 - nodes[-1], 1.0 - nodes[-2]
    e1_num = _local_exponent(s0, s1, vals[-1], vals[-2])

    edges = {}
    ends = {}
    for name, e_an, e_num, x0, v0, xi0, sign in (
        ("zero", e0_an, e0_num, nodes[0], vals[0], xi[0], +1.0),
        ("one", e1_an, e1_num, s0, vals[-1], xi[-1], -1.0),
    ):
        numeric = _numeric_finite(e_num)
        analytic = None if e_an is None else bool(e_an > -1.0)
        if analytic is not None and numeric is not None and analytic != numeric:
            raise ClassificationConflict(
                f"edge at u={0 if name == 'zero' else 1}: exponents predict "
                f"{'finite' if analytic else 'infinite'} but the integrand decays like power {e_num:.3f}"
            )
        finite = analytic if analytic is not None else bool(numeric)
        e = e_an if e_an is not None else e_num
        if finite:
            pos = xi0 + sign * v0 * x0 / (e + 1.0)
        else:
            pos = sign * math.inf
        edges[name] = {
            "finite": finite,
            "analytic_finite": analytic,
            "numeric_finite": numeric,
            "exponent_analytic": e_an,
            "exponent_numeric": e_num,
        }
        ends[name] = (pos, e if e is not None else -1.0)
    return _Tabulation(
        nodes=nodes, xi=xi, vals=vals, xi1=ends["one"][0], xi2=ends["zero"][0],
        exp_zero=ends["zero"][1], exp_one=ends["one"][1], edges=edges,
    )


def xi_of_u(problem: Problem, wave, u: float) -> float:
    """Wave coordinate of level u by adaptive quadrature (independent of the tabulation)."""
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    integrand = _Integrand(problem, wave)
    theta = problem.theta
    if u == theta:
        return 0.0

    def f(s):
        v = float(integrand(np.array([s]))[0])
        if not math.isfinite(v):
            raise SingularIntegrand(f"z vanishes at u = {s!r}")
        return v

    val, err = integrate.quad(f, theta, u, epsabs=0.0, epsrel=1e-11, limit=400)
    return -val


def edge_positions(problem: Problem, wave) -> tuple[float, float]:
    tab = tabulate(problem, wave)
    return tab.xi1, tab.xi2


def _tail_invert(delta, x0, v0, e):
    """Solve int_x^x0 C s**e ds = delta for x, with C = v0 / x0**e; 0 when beyond a finite edge."""
    delta = np.asarray(delta, dtype=float)
    C = v0 / x0**e
    if abs(e + 1.0) < 1e-12:
        return x0 * np.exp(-delta / C)
    base = x0 ** (e + 1.0) - delta * (e + 1.0) / C
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(base > 0, np.abs(base) ** (1.0 / (e + 1.0)), 0.0)
    return out


@dataclass
class ProfileTable:
    xi: np.ndarray
    u: np.ndarray
    du_dxi: np.ndarray
    flux: np.ndarray
    xi1: float
    xi2: float
    c_star: float
    edges: dict = field(default_factory=dict)

    @property
    def rows(self):
        return np.column_stack([self.xi, self.u, self.du_dxi])

    def metadata(self) -> dict:
        def mark(x):
            return x if math.isfinite(x) else ("-inf" if x < 0 else "+inf")

        return {"c_star": self.c_star, "xi1": mark(self.xi1), "xi2": mark(self.xi2), "edges": self.edges}

    def to_csv(self, target, manifest: Optional[dict] = None) -> None:
        """Write to a path or an open text stream; one '# {json}' metadata line, then the table."""
        meta = self.metadata()
        if manifest:
            meta = {**meta, "manifest": manifest}
        if hasattr(target, "write"):
            self._write(target, meta)
        else:
            with open(target, "w", newline="") as fh:
                self._write(fh, meta)

    def _write(self, fh, meta) -> None:
        fh.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi", "u", "du_dxi", "flux"])
        for row in zip(self.xi, self.u, self.du_dxi, self.flux):
            w.writerow([repr(float(v)) for v in row])


def build_profile(problem: Problem, wave, xi_min: float = -20.0, xi_max: float = 40.0, xi_step: float = 1e-2,
                  *, newton_steps: int = 4) -> ProfileTable:
    """Tabulate u(xi), u'(xi) and the flux on a uniform xi grid."""
    tab = tabulate(problem, wave)
    integrand = _Integrand(problem, wave)
    n = int(round((xi_max - xi_min) / xi_step))
    xi_t = xi_min + xi_step * np.arange(n + 1)
    u = np.empty_like(xi_t)

    nodes, xi_n, vals = tab.nodes, tab.xi, tab.vals
    xi_hi, xi_lo = xi_n[0], xi_n[-1]
    left = xi_t < xi_lo
    right = xi_t > xi_hi
    mid = ~(left | right)

    if np.any(mid):
        # xi_n decreases with u; reverse for interpolation in xi, dropping nodes merged by roundoff
        xr, nr = xi_n[::-1], nodes[::-1]
        keep = np.concatenate([[True], np.diff(xr) > 0])
        pch = PchipInterpolator(xr[keep], nr[keep])
        guess = pch(xi_t[mid])
        # node bracket [x_k, x_k+1] containing each target
        k = np.clip(np.searchsorted(-xi_n, -xi_t[mid], side="right") - 1, 0, nodes.size - 2)
        a, b = nodes[k], nodes[k + 1]
        x = np.clip(guess, a, b)
        for _ in range(newton_steps):
            xi_x = xi_n[k] - _gl_segments(integrand, a, x)
            step = (xi_x - xi_t[mid]) / integrand(x)
            x = np.clip(x + step, a, b)
        u[mid] = x
    if np.any(right):
        u[right] = _tail_invert(xi_t[right] - xi_hi, nodes[0], vals[0], tab.exp_zero)
    if np.any(left):
        u[left] = 1.0 - _tail_invert(xi_lo - xi_t[left], 1.0 - nodes[-1], vals[-1], tab.exp_one)
    if math.isfinite(tab.xi2):
        u[xi_t >= tab.xi2] = 0.0
    if math.isfinite(tab.xi1):
        u[xi_t <= tab.xi1] = 1.0
    u = np.clip(u, 0.0, 1.0)

    du = np.zeros_like(u)
    flux = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    if np.any(inside):
        du[inside] = -1.0 / integrand(u[inside])
        flux[inside] = -integrand.z(u[inside])

    edges = {k: dict(v) for k, v in tab.edges.items()}
    edges["zero"]["slope_exponent"] = _slope_exponent(u, du)
    return ProfileTable(xi=xi_t, u=u, du_dxi=du, flux=flux, xi1=tab.xi1, xi2=tab.xi2,
                        c_star=integrand.c, edges=edges)


def _slope_exponent(u, du, rows: int = 10):
    """Power k in |u'| ~ u**k fitted over the last `rows` positive rows near u = 0."""
    pos = np.nonzero((u > 0.0) & (u < 1.0) & (du < 0.0))[0]
    if pos.size < 3:
        return None
    tail = pos[-rows:]
    lu, ld = np.log(u[tail]), np.log(-du[tail])
    if np.ptp(lu) < 1e-8:
        return None
    return float(np.polyfit(lu, ld, 1)[0])


def residual_second_order(problem: Problem, table: ProfileTable) -> float:
    """Max |(flux)' + (c* + h(u)) u' + g(u)| over interior rows, flux' by centred differences."""
    xi, u, du, flux = table.xi, table.u, table.du_dxi, table.flux
    inside = (u > 0.0) & (u < 1.0)
    ok = inside[1:-1] & inside[:-2] & inside[2:]
    if not np.any(ok):
        return 0.0
    dflux = (flux[2:] - flux[:-2]) / (xi[2:] - xi[:-2])
    uc = u[1:-1]
    res = dflux + (table.c_star + problem.h(uc)) * du[1:-1] + problem.g(uc)
    return float(np.max(np.abs(res[ok])))


def edge_flux(table: ProfileTable) -> tuple[float, float]:
    """|flux| at the first row with u < 1 and at the last row with u > 0."""
    inside = np.nonzero((table.u > 0.0) & (table.u < 1.0))[0]
    if inside.size == 0:
        return 0.0, 0.0
    return float(abs(table.flux[inside[0]])), float(abs(table.flux[inside[-1]]))
