"""Borel summation of the formal solution along a direction theta.

The sum in direction theta is

    u(t, z) = 1/(q T) int_{arg s = theta p/q} sum_j phi(z + w^j s) C_{q/p}(s/T) ds

with w = exp(2 pi i/q) and T = t^{p/q} taken on the continuous branch
fixed by the unreduced argument of t.  Writing s = |T| e^{i theta p/q} rho
and Delta = theta - arg t (reduced mod the monodromy period 2 pi q/p),

    u = e^{i g}/q int_0^inf sum_j phi(z + w^j |T| e^{i theta p/q} rho) C(e^{i g} rho) drho,

g = (p/q) Delta, so the kernel argument is O(1) whatever the size of |t|.
For the heat equation C_2 is a Gaussian and the same integral is
evaluated in closed form for the kernel.
"""

from __future__ import annotations

import cmath
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .datum import CauchyDatum
from .errors import (BorelStokesError, OutsideSector, QuadratureNotConverged, RayHitsPole,
                     SingularDirection, TailBoundFails)
from .formal import HEAT, Equation
from .quadrature import gauss_kronrod
from .special_fn import KernelParams, decay_constant, fit_decay_constants, kernel_values

__all__ = [
    "RiemannPoint",
    "QuadratureSpec",
    "Sector",
    "BorelSumResult",
    "GridCell",
    "borel_transform",
    "heat_sum",
    "general_sum",
    "borel_sum",
    "sum_on_grid",
    "pole_directions",
    "angle_distance",
    "reduce_angle",
    "validity_radius",
]

_SQRT_PI = math.sqrt(math.pi)


# -- angles on the cover -----------------------------------------------------

def reduce_angle(a: float, period: float) -> float:
    """Representative of a in (-period/2, period/2]."""
    r = math.fmod(a, period)
    if r > period / 2:
        r -= period
    elif r <= -period / 2:
        r += period
    return r


def angle_distance(a: float, b: float, period: float) -> float:
    return abs(reduce_angle(a - b, period))


@dataclass(frozen=True, eq=False)
class RiemannPoint:
    """Point of the Riemann surface of t^{p/q}: modulus and unreduced argument."""

    modulus: float
    argument: float
    period: float

    def __post_init__(self):
        if not self.modulus > 0:
            raise ValueError("modulus must be positive")
        if not self.period > 0:
            raise ValueError("period must be positive")

    def __eq__(self, other):
        if not isinstance(other, RiemannPoint):
            return NotImplemented
        if not math.isclose(self.period, other.period, rel_tol=1e-12):
            return False
        if not math.isclose(self.modulus, other.modulus, rel_tol=1e-12):
            return False
        k = (self.argument - other.argument) / self.period
        return abs(k - round(k)) < 1e-12 * max(1.0, abs(k))

    def __hash__(self):
        return hash((round(self.modulus, 9), round(self.period, 9)))

    @classmethod
    def from_complex(cls, t: complex, period: float, sheet: int = 0) -> "RiemannPoint":
        """Principal argument plus sheet multiples of 2 pi."""
        return cls(abs(t), cmath.phase(t) + 2.0 * math.pi * sheet, period)

    @property
    def complex(self) -> complex:
        return cmath.rect(self.modulus, self.argument)

    def power(self, e: float) -> complex:
        """t^e on the continuous branch through the stored argument."""
        return cmath.rect(self.modulus ** e, e * self.argument)

    def rotate(self, dphi: float) -> "RiemannPoint":
        return RiemannPoint(self.modulus, self.argument + dphi, self.period)

    def with_modulus(self, modulus: float) -> "RiemannPoint":
        return RiemannPoint(modulus, self.argument, self.period)


def as_riemann_point(t, eq: Equation) -> RiemannPoint:
    if isinstance(t, RiemannPoint):
        if not math.isclose(t.period, eq.period, rel_tol=1e-12):
            raise ValueError(f"RiemannPoint period {t.period} does not match 2 pi q/p = {eq.period}")
        return t
    return RiemannPoint.from_complex(complex(t), eq.period)


@dataclass(frozen=True)
class QuadratureSpec:
    tol: float = 1e-12
    max_nodes: int = 400_000
    ray_margin: float = 1e-6
    eps_sector: float = 1e-3

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.ray_margin > 0:
            raise ValueError("ray_margin must be positive")
        if not 0 < self.eps_sector < math.pi:
            raise ValueError("eps_sector must lie in (0, pi)")
        if self.max_nodes < 15:
            raise ValueError("max_nodes too small")


@dataclass(frozen=True)
class Sector:
    theta: float
    opening: float
    radius: float

    def to_json(self):
        return {"theta": self.theta, "opening": self.opening,
                "radius": None if math.isinf(self.radius) else self.radius}


@dataclass(frozen=True)
class BorelSumResult:
    value: complex
    err_est: float
    sector: Sector
    route: str = "general"
    n_evals: int = 0

    def to_json(self):
        return {"value": [self.value.real, self.value.imag], "err_est": self.err_est,
                "sector": self.sector.to_json(), "route": self.route}


# -- singular directions and preconditions ----------------------------------

def pole_directions(eq: Equation, datum: CauchyDatum):
    """(direction in [0, period), pole index, sheet l) for every pole and l = 1..q.

    delta_l = (q/p) arg z_l + 2 (l-1) pi / p.
    """
    P = eq.period
    out = []
    for i, pole in enumerate(datum.poles):
        a = cmath.phase(pole.location)
        for l in range(1, eq.q + 1):
            d = eq.q / eq.p * a + 2.0 * (l - 1) * math.pi / eq.p
            out.append((d % P, i, l))
    return out


def _check_direction(eq, datum, theta, quad):
    P = eq.period
    for d, i, l in pole_directions(eq, datum):
        if angle_distance(theta, d, P) <= quad.eps_sector:
            raise SingularDirection(
                f"theta={theta:.6g} is within {quad.eps_sector:g} of the singular "
                f"direction {d:.6g} (pole {i}, l={l})")


def _check_rays(eq, datum, theta, z, quad):
    """Every rotated ray z + w^j e^{i theta p/q} R+ must clear every pole."""
    for j in range(eq.q):
        e = cmath.exp(1j * (theta * eq.p / eq.q + 2.0 * math.pi * j / eq.q))
        for i, pole in enumerate(datum.poles):
            w = (pole.location - z) / e
            dist = abs(w.imag) if w.real > 0 else abs(w)
            if dist < quad.ray_margin:
                raise RayHitsPole(
                    f"integration ray {j} passes within {dist:.2e} of pole {i} at {pole.location}")


def validity_radius(eq: Equation, datum: CauchyDatum, A2: float) -> float:
    """Radius r of the disc in t where the Borel integral converges.

    Growth of the datum of order rho is tamed by the kernel decay of order
    beta whenever rho < beta, for any t.  Only growth of the full order
    beta limits |t|, through A2 |t|^{-k} > C2.
    """
    gb = datum.growth_bounds()
    if gb.order < eq.beta or gb.C2 == 0:
        return math.inf
    return 0.5 * (A2 / gb.C2) ** float(1 / eq.k)


def _pole_bound(datum: CauchyDatum, dist: np.ndarray) -> np.ndarray:
    out = np.zeros_like(dist)
    for p in datum.poles:
        for k, a in enumerate(p.coefficients, start=1):
            out = out + abs(a) / dist ** k
    return out


def _tail_cutoff(eq, datum, z, Tabs, A1, A2, beta, tol):
    """L with (bound on integrand) integrated over (L, inf) below tol/2.

    Returns (L, tail bound at L).
    """
    gb = datum.growth_bounds()
    reach = max([abs(p.location - z) for p in datum.poles] + [0.0])
    L0 = max(4.0, 2.0 * (reach + 1.0) / Tabs)

    logA1 = math.log(A1)

    def integrand(rho):
        dist = max(Tabs * rho - reach, 1.0)
        decay = logA1 - A2 * rho ** beta
        ent = math.exp(float(gb.log_bound(abs(z) + Tabs * rho)) + decay) if gb.C1 else 0.0
        return ent + float(_pole_bound(datum, np.asarray(dist))) * math.exp(decay)

    # the bound peaks where growth and decay balance; beyond double range the
    # integral cannot be resolved
    rho = np.linspace(0.0, 50.0 * L0, 2001)
    logpeak = np.max(gb.log_bound(abs(z) + Tabs * rho) + logA1 - A2 * rho ** beta) if gb.C1 else 0.0
    if not np.isfinite(logpeak) or logpeak > 690.0:
        raise TailBoundFails("datum growth overwhelms kernel decay in double precision")
    L = L0
    for _ in range(60):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            tail, _ = integrate.quad(integrand, L, np.inf, limit=200)
        if np.isfinite(tail) and tail < tol / 2:
            return L, tail
        L *= 1.25
    raise TailBoundFails(f"no cutoff found with tail below {tol / 2:g}")


def _breakpoints(eq, datum, z, w, L):
    """Ray parameters of closest approach to each pole image."""
    bps = []
    for j in range(eq.q):
        wj = w * cmath.exp(2j * math.pi * j / eq.q)
        for p in datum.poles:
            r = ((p.location - z) / wj).real
            if 0.0 < r < L:
                bps.append(r)
    return bps


def _prepare(eq, datum, theta, t, z, quad, heat):
    t = as_riemann_point(t, eq)
    z = complex(z)
    P = eq.period
    _check_direction(eq, datum, theta, quad)
    delta = reduce_angle(theta - t.argument, P)
    half = eq.half_opening
    if heat:
        limit = (2.0 * half - quad.eps_sector) / 2.0
    else:
        # also keeps the kernel argument inside |arg| <= pi/(2 beta) - eps/2
        limit = min((2.0 * half - quad.eps_sector) / 2.0,
                    eq.q / eq.p * (math.pi / (2.0 * float(eq.beta)) - quad.eps_sector / 2.0))
    if abs(delta) >= limit:
        raise OutsideSector(
            f"|arg t - theta| = {abs(delta):.6g} (mod {P:.6g}) exceeds {limit:.6g}")
    _check_rays(eq, datum, theta, z, quad)
    return t, z, delta


def borel_transform(eq: Equation, datum: CauchyDatum, t, z: complex) -> complex:
    """v(t, z) = (1/q) sum_j phi(z + w^j t^{p/q})."""
    t = as_riemann_point(t, eq)
    T = t.power(eq.p / eq.q)
    pts = complex(z) + T * np.exp(2j * np.pi * np.arange(eq.q) / eq.q)
    return complex(np.sum(datum.eval_array(pts)) / eq.q)


def _integrate(eq, datum, theta, t, z, delta, quad, kernel, A1, A2, route):
    p, q = eq.p, eq.q
    Tabs = t.modulus ** (p / q)
    beta = float(eq.beta)
    g = p / q * delta
    w = Tabs * cmath.exp(1j * theta * p / q)
    rad = validity_radius(eq, datum, A2)
    if t.modulus >= rad:
        raise TailBoundFails(f"|t| = {t.modulus:g} is outside the validity radius {rad:g}")
    L, tail = _tail_cutoff(eq, datum, z, Tabs, A1, A2, beta, quad.tol)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    eg = cmath.exp(1j * g)

    def f(rho):
        pts = z + (w * rho)[:, None] * roots[None, :]
        s = datum.eval_array(pts).sum(axis=1)
        return s * kernel(eg * rho)

    res = gauss_kronrod(f, 0.0, L, tol=quad.tol / 2, breakpoints=_breakpoints(eq, datum, z, w, L),
                        max_evals=quad.max_nodes)
    value = eg / q * res.value
    err = (res.err_est + tail) / q
    if not res.converged and err > 1e-6 * max(1.0, abs(value)):
        raise QuadratureNotConverged(
            f"quadrature stopped at {res.n_evals} evaluations with error {err:.2e}")
    opening = 2.0 * eq.half_opening - quad.eps_sector
    return BorelSumResult(complex(value), float(err), Sector(theta, opening, rad), route, res.n_evals)


def heat_sum(datum: CauchyDatum, theta: float, t, z: complex,
             quad: QuadratureSpec = QuadratureSpec()) -> BorelSumResult:
    """Heat-equation sum with the Gaussian kernel written out."""
    eq = HEAT
    t, z, delta = _prepare(eq, datum, theta, t, z, quad, heat=True)
    # |exp(-rho^2 e^{i Delta}/4)| = exp(-cos(Delta) rho^2/4)
    A2 = 0.25 * math.cos(delta)
    kernel = lambda x: np.exp(-x * x / 4.0) / _SQRT_PI
    return _integrate(eq, datum, theta, t, z, delta, quad, kernel, 1.0 / _SQRT_PI, A2, "heat")


def general_sum(eq: Equation, datum: CauchyDatum, theta: float, t, z: complex,
                quad: QuadratureSpec = QuadratureSpec()) -> BorelSumResult:
    """Sum with the kernel C_{q/p} from its series or steepest-descent integral."""
    t, z, delta = _prepare(eq, datum, theta, t, z, quad, heat=False)
    g = eq.p / eq.q * delta
    A1, A2 = fit_decay_constants(eq.alpha, round(g, 12), _fit_range(eq, g))
    params = KernelParams(eq.alpha, tol=min(1e-14, quad.tol * 1e-2))
    kernel = lambda x: kernel_values(params, x)
    return _integrate(eq, datum, theta, t, z, delta, quad, kernel, A1, A2, "general")


def _fit_range(eq: Equation, g: float) -> float:
    # fit the decay where |C| falls to about e^-40
    a = decay_constant(eq.alpha) * max(math.cos(float(eq.beta) * g), 0.05)
    return round((40.0 / a) ** (1.0 / float(eq.beta)), 6)


def borel_sum(eq: Equation, datum: CauchyDatum, theta: float, t, z: complex,
              quad: QuadratureSpec = QuadratureSpec(), force_general: bool = False) -> BorelSumResult:
    if eq.is_heat and not force_general:
        return heat_sum(datum, theta, t, z, quad)
    return general_sum(eq, datum, theta, t, z, quad)


@dataclass(frozen=True)
class GridCell:
    t: RiemannPoint
    z: complex
    result: BorelSumResult | None = None
    error: BorelStokesError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _threads() -> int:
    env = os.environ.get("BOREL_STOKES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sum_on_grid(eq: Equation, datum: CauchyDatum, theta: float, t_list: Sequence,
                z_list: Sequence[complex], quad: QuadratureSpec = QuadratureSpec(),
                force_general: bool = False, threads: int | None = None):
    """Matrix [i][j] of GridCell for t_list[i], z_list[j].

    Failures are recorded per cell; the grid always completes.
    """
    ts = [as_riemann_point(t, eq) for t in t_list]
    zs = [complex(z) for z in z_list]

    def one(ij):
        i, j = ij
        try:
            r = borel_sum(eq, datum, theta, ts[i], zs[j], quad, force_general)
            return GridCell(ts[i], zs[j], r)
        except BorelStokesError as e:
            return GridCell(ts[i], zs[j], None, e)

    jobs = [(i, j) for i in range(len(ts)) for j in range(len(zs))]
    n = threads or _threads()
    if n == 1 or len(jobs) < 2:
        cells = [one(ij) for ij in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            cells = list(ex.map(one, jobs))
    return [cells[i * len(zs):(i + 1) * len(zs)] for i in range(len(ts))]
