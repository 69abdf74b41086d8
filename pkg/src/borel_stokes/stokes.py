"""Stokes lines, anti-Stokes lines and the jumps of the sum across them.

Crossing the singular direction delta the integration ray sweeps over a
pole s0 = w^{-j} (z_l - z) of sum_j phi(z + w^j s), and the lateral sums
differ by -2 pi i times the residue there:

    u^{delta+} - u^{delta-} = -(2 pi i/(q T)) sum_k a_k rho^k T^{1-k}/(k-1)!
                                              C^{(k-1)}(rho (z_l - z)/T)

with rho = w^{-j}.  The pole sits on the ray of the line
delta_l = (q/p) arg z_l + 2 (l-1) pi/p exactly when rho = exp(2 pi i (l-1)/q).
For the heat equation C_2 is Gaussian and its derivatives follow the
Hermite-type recurrence h_{m+1} = -(s/2t) h_m + h_m'.

Three independent evaluations are offered: this closed form, a residue
sum over the poles found inside an arbitrary sector (theta1, theta2), and
the plain difference of two Borel sums on either side of the line.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .borel import (QuadratureSpec, RiemannPoint, angle_distance, as_riemann_point, borel_sum,
                    pole_directions, reduce_angle)
from .datum import CauchyDatum
from .errors import (NoStokesLines, OutsideDisc, OutsideJumpSector, PoleOnBoundaryRay,
                     SingularDirection)
from .formal import Equation
from .special_fn import KernelParams, kernel_C, kernel_values

__all__ = [
    "LineKind",
    "Route",
    "StokesLine",
    "JumpResult",
    "singular_directions",
    "anti_stokes_directions",
    "jump_closed_form",
    "residue_jump",
    "jump_quadrature",
    "gaussian_derivative",
]

MERGE_TOL = 1e-9


class LineKind(str, Enum):
    STOKES = "stokes"
    ANTI_STOKES = "anti_stokes"


class Route(str, Enum):
    CLOSED_FORM = "closed_form"
    RESIDUE = "residue"
    QUADRATURE_DIFF = "quadrature_diff"


@dataclass(frozen=True)
class StokesLine:
    direction: float
    contributing_poles: tuple
    kind: LineKind = LineKind.STOKES

    def to_json(self):
        return {"direction": self.direction, "kind": self.kind.value,
                "contributing_poles": [list(c) for c in self.contributing_poles]}


@dataclass(frozen=True)
class JumpResult:
    value: complex
    route: Route
    line: StokesLine | None
    t: RiemannPoint
    z: complex
    err_est: float = 0.0

    def to_json(self):
        return {"route": self.route.value, "value": [self.value.real, self.value.imag],
                "err_est": self.err_est,
                "t": {"modulus": self.t.modulus, "argument": self.t.argument},
                "z": [self.z.real, self.z.imag]}


def _merge(entries, period, tol):
    """Group (direction, contributors) pairs closer than tol, cyclically."""
    entries = sorted(entries, key=lambda e: e[0])
    groups: list = []
    for d, contrib in entries:
        if groups and d - groups[-1][0] <= tol:
            groups[-1][1].extend(contrib)
        else:
            groups.append([d, list(contrib)])
    if len(groups) > 1 and groups[0][0] + period - groups[-1][0] <= tol:
        groups[0][1][:0] = groups.pop()[1]
    return groups


def singular_directions(eq: Equation, datum: CauchyDatum, merge_tol: float = MERGE_TOL):
    """Stokes lines sorted in [0, 2 pi q/p); coinciding directions merged."""
    entries = [(d, [(i, l)]) for d, i, l in pole_directions(eq, datum)]
    groups = _merge(entries, eq.period, merge_tol)
    return [StokesLine(d, tuple(sorted(set(c), key=c.index)), LineKind.STOKES) for d, c in groups]


def anti_stokes_directions(eq: Equation, datum: CauchyDatum, merge_tol: float = MERGE_TOL):
    """Stokes directions shifted by +-pi/(2k), reduced and deduplicated."""
    P = eq.period
    h = eq.half_opening
    entries = []
    for line in singular_directions(eq, datum, merge_tol):
        for sgn in (1.0, -1.0):
            entries.append(((line.direction + sgn * h) % P, list(line.contributing_poles)))
    groups = _merge(entries, P, merge_tol)
    return [StokesLine(d, tuple(dict.fromkeys(c)), LineKind.ANTI_STOKES) for d, c in groups]


# -- heat kernel derivatives -----------------------------------------------

def gaussian_derivative(m: int, s: complex, t: complex) -> complex:
    """d^m/ds^m exp(-s^2/(4t)) through P_{m+1} = -(s/2t) P_m + P_m'."""
    poly = np.array([1.0 + 0j])          # coefficients in ascending powers of s
    c = -1.0 / (2.0 * t)
    for _ in range(m):
        shifted = np.concatenate([[0j], poly]) * c
        deriv = np.concatenate([poly[1:] * np.arange(1, len(poly)), [0j, 0j]])
        poly = shifted + deriv[: len(shifted)]
    val = np.polynomial.polynomial.polyval(s, poly)
    return complex(val * cmath.exp(-s * s / (4.0 * t)))


def _pole_jump(eq, pole, rho, z, T):
    """-2 pi i x residue at s0 = rho (z_l - z) for one pole term."""
    s0 = rho * (pole.location - z)
    total = 0j
    if eq.is_heat:
        t = T * T
        for k, a in enumerate(pole.coefficients, start=1):
            total += a * rho ** k / math.factorial(k - 1) * gaussian_derivative(k - 1, s0, t)
        return -1j * math.sqrt(math.pi) / T * total
    params = KernelParams(eq.alpha)
    for k, a in enumerate(pole.coefficients, start=1):
        total += (a * rho ** k * T ** (1 - k) / math.factorial(k - 1)
                  * kernel_C(params, s0 / T, shift=k - 1))
    return -2j * math.pi / (eq.q * T) * total


def _check_disc(datum, z):
    rt = 0.5 * min(abs(p.location) for p in datum.poles)
    if abs(z) >= rt:
        raise OutsideDisc(f"|z| = {abs(z):.4g} is outside the disc of radius {rt:.4g}")


def _check_line_sector(eq, direction, t, eps):
    limit = (2.0 * eq.half_opening - eps) / 2.0
    if angle_distance(t.argument, direction, eq.period) >= limit:
        raise OutsideJumpSector(
            f"arg t = {t.argument:.6g} is not within {limit:.6g} of the line {direction:.6g}")


def jump_closed_form(eq: Equation, datum: CauchyDatum, line: StokesLine, t, z: complex,
                     eps_sector: float = 1e-3, continued: bool = False) -> JumpResult:
    """Jump across a Stokes line from the residue formula in closed form.

    continued=True evaluates the same analytic expression at t outside
    the line's sector (its analytic continuation along arg t).
    """
    t = as_riemann_point(t, eq)
    z = complex(z)
    if not datum.has_poles:
        raise NoStokesLines("datum has no poles")
    if not continued:
        _check_line_sector(eq, line.direction, t, eps_sector)
    _check_disc(datum, z)
    T = t.power(eq.p / eq.q)
    total = 0j
    for i, l in line.contributing_poles:
        rho = cmath.exp(2j * math.pi * (l - 1) / eq.q)
        total += _pole_jump(eq, datum.poles[i], rho, z, T)
    return JumpResult(total, Route.CLOSED_FORM, line, t, z, 0.0)


def _cauchy_derivative(f, s0: complex, m: int, radius: float, n: int = 48) -> complex:
    """m-th derivative of an entire f at s0 by the trapezoid rule on a circle."""
    if m == 0:
        return complex(f(np.array([s0]))[0])
    ang = 2.0 * np.pi * np.arange(n) / n
    vals = f(s0 + radius * np.exp(1j * ang))
    return complex(math.factorial(m) / radius ** m * np.mean(vals * np.exp(-1j * m * ang)))


def residue_jump(eq: Equation, datum: CauchyDatum, theta1: float, theta2: float, t,
                 z: complex, quad: QuadratureSpec = QuadratureSpec()) -> JumpResult:
    """u^{theta2} - u^{theta1} as -2 pi i times the residues enclosed between the rays.

    Candidates s0 = w^{-j} (z_l - z) for every pole l and branch j are kept
    when arg s0 lies in the open sector (p theta1/q, p theta2/q).
    """
    t = as_riemann_point(t, eq)
    z = complex(z)
    P = eq.period
    width = theta2 - theta1
    if not 0 < width < 2.0 * math.pi / eq.p:
        raise ValueError("need 0 < theta2 - theta1 < 2 pi/p")
    for th in (theta1, theta2):
        for d, i, l in pole_directions(eq, datum):
            if angle_distance(th, d, P) <= quad.eps_sector:
                raise SingularDirection(f"theta={th:.6g} is singular (pole {i}, l={l})")
        limit = (2.0 * eq.half_opening - quad.eps_sector) / 2.0
        if angle_distance(t.argument, th, P) >= limit:
            raise OutsideJumpSector(f"t is outside the validity sector of theta={th:.6g}")
    T = t.power(eq.p / eq.q)
    lo = eq.p * theta1 / eq.q
    span = eq.p * width / eq.q
    total = 0j
    for pole in datum.poles:
        for j in range(eq.q):
            rho = cmath.exp(-2j * math.pi * j / eq.q)
            s0 = rho * (pole.location - z)
            off = (cmath.phase(s0) - lo) % (2.0 * math.pi)
            # distances to the two boundary rays, measured in theta units
            d1 = min(off, 2.0 * math.pi - off) * eq.q / eq.p
            d2 = abs(off - span) * eq.q / eq.p
            if min(d1, d2) <= quad.eps_sector:
                raise PoleOnBoundaryRay(f"pole image {s0:.6g} lies on a boundary ray")
            if 0.0 < off < span:
                total += _residue_term(eq, pole, rho, s0, T)
    return JumpResult(total, Route.RESIDUE, None, t, z, 0.0)


def _residue_term(eq, pole, rho, s0, T):
    if eq.is_heat:
        t = T * T
        acc = 0j
        for k, a in enumerate(pole.coefficients, start=1):
            acc += a * rho ** k / math.factorial(k - 1) * gaussian_derivative(k - 1, s0, t)
        return -1j * math.sqrt(math.pi) / T * acc
    params = KernelParams(eq.alpha)
    g = lambda s: kernel_values(params, np.asarray(s) / T)
    acc = 0j
    for k, a in enumerate(pole.coefficients, start=1):
        acc += a * rho ** k / math.factorial(k - 1) * _cauchy_derivative(g, s0, k - 1, 0.5 * abs(T))
    return -2j * math.pi / (eq.q * T) * acc


def jump_quadrature(eq: Equation, datum: CauchyDatum, line: StokesLine, t, z: complex,
                    quad: QuadratureSpec = QuadratureSpec(), force_general: bool = False) -> JumpResult:
    """Difference of the sums on either side of the line.

    The offset is 2 eps_sector, widened when z != 0 by the angle through
    which the actual pole direction arg(z_l - z) has moved away from arg z_l.
    """
    t = as_riemann_point(t, eq)
    z = complex(z)
    dev = 0.0
    for i, _ in line.contributing_poles:
        zl = datum.poles[i].location
        dev = max(dev, abs(reduce_angle(cmath.phase(zl - z) - cmath.phase(zl), 2.0 * math.pi)))
    off = 2.0 * quad.eps_sector + eq.q / eq.p * dev
    plus = borel_sum(eq, datum, line.direction + off, t, z, quad, force_general)
    minus = borel_sum(eq, datum, line.direction - off, t, z, quad, force_general)
    return JumpResult(plus.value - minus.value, Route.QUADRATURE_DIFF, line, t, z,
                      plus.err_est + minus.err_est)
