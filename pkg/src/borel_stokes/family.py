"""Maximal families of actual solutions on the Riemann surface of t^{p/q}.

Between consecutive singular directions d_i < d_{i+1} every direction
theta gives the same sum u_i, which extends to the sector
(d_i - pi/2k + eps/2, d_{i+1} + pi/2k - eps/2).  These n sums cover the
surface, each one is an actual solution, neighbours differ by the jump
across their shared Stokes line, and any directional sum is one of them.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .borel import (QuadratureSpec, RiemannPoint, _threads, as_riemann_point, borel_sum,
                    reduce_angle)
from .datum import CauchyDatum
from .errors import (BorelStokesError, EpsilonTooLarge, OutsideSector, StencilOutOfDomain)
from .formal import Equation
from .stokes import jump_closed_form, singular_directions

__all__ = [
    "SurfaceSector",
    "FamilyMember",
    "maximal_family",
    "member_evaluator",
    "verify_family",
    "pde_residual",
    "initial_limit",
    "covers_circle",
]


@dataclass(frozen=True)
class SurfaceSector:
    lower: float
    upper: float
    radius: float
    period: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("sector needs lower < upper")

    @property
    def opening(self) -> float:
        return self.upper - self.lower

    @property
    def middle(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, arg: float) -> bool:
        a = self.middle + reduce_angle(arg - self.middle, self.period)
        return self.lower < a < self.upper or self.opening >= self.period

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper, "opening": self.opening,
                "radius": None if math.isinf(self.radius) else self.radius,
                "period": self.period}


@dataclass(frozen=True)
class FamilyMember:
    sector: SurfaceSector
    representative_theta: float
    index: int
    gap: tuple

    def to_json(self):
        return {"index": self.index, "representative_theta": self.representative_theta,
                "gap": list(self.gap), "sector": self.sector.to_json()}


def maximal_family(eq: Equation, datum: CauchyDatum, eps: float = 0.1,
                   r: float = math.inf) -> list:
    """One member per gap between consecutive singular directions.

    An entire datum has no singular direction; its sum is a single
    solution on the whole surface and comes back as one full-cover member.
    """
    P = eq.period
    h = eq.half_opening
    if not eps > 0:
        raise EpsilonTooLarge("eps must be positive")
    dirs = [line.direction for line in singular_directions(eq, datum)]
    if not dirs:
        sec = SurfaceSector(-h, P + h, r, P)
        return [FamilyMember(sec, P / 2, 0, (0.0, P))]
    gaps = [(d, dirs[(i + 1) % len(dirs)] + (P if i + 1 == len(dirs) else 0.0))
            for i, d in enumerate(dirs)]
    if eps >= min(b - a for a, b in gaps):
        raise EpsilonTooLarge(f"eps = {eps:g} leaves some sector no wider than pi/k")
    members = []
    for i, (a, b) in enumerate(gaps):
        sec = SurfaceSector(a - h + eps / 2, b + h - eps / 2, r, P)
        members.append(FamilyMember(sec, 0.5 * (a + b), i, (a, b)))
    return members


def _pole_drift(eq, datum, z):
    """Largest angle (in theta units) between arg(z_l - z) and arg z_l."""
    dev = 0.0
    for p in datum.poles:
        dev = max(dev, abs(reduce_angle(cmath.phase(p.location - z) - cmath.phase(p.location),
                                        2.0 * math.pi)))
    return eq.q / eq.p * dev


def choose_theta(eq: Equation, datum: CauchyDatum, member: FamilyMember, t: RiemannPoint,
                 z: complex, quad: QuadratureSpec) -> float:
    """Direction inside the member's gap that is admissible for (t, z).

    The window is the gap, pulled in from the singular directions, cut
    with the directions within pi/2k of arg t; its midpoint is returned.
    """
    P = eq.period
    a, b = member.gap
    centre = 0.5 * (a + b)
    arg = centre + reduce_angle(t.argument - centre, P)
    margin = max(4.0 * quad.eps_sector, _pole_drift(eq, datum, z) + 4.0 * quad.eps_sector)
    lim = eq.half_opening - 2.0 * eq.q / eq.p * quad.eps_sector
    lo = max(a + margin, arg - lim)
    hi = min(b - margin, arg + lim)
    if lo >= hi:
        raise OutsideSector(f"arg t = {t.argument:.6g} is outside member {member.index}'s sector")
    return 0.5 * (lo + hi)


def member_evaluator(eq: Equation, datum: CauchyDatum, member: FamilyMember,
                     quad: QuadratureSpec = QuadratureSpec(), with_error: bool = False):
    """Callable (t, z) -> u_i(t, z)."""

    def ev(t, z):
        t = as_riemann_point(t, eq)
        z = complex(z)
        theta = choose_theta(eq, datum, member, t, z, quad)
        r = borel_sum(eq, datum, theta, t, z, quad)
        return (r.value, r.err_est) if with_error else r.value

    return ev


# -- finite differences ------------------------------------------------------

@lru_cache(maxsize=32)
def _stencil(m: int, order: int = 4):
    """Central weights w_j (j = -K..K) with sum w_j f(jh) = h^m f^{(m)}(0) + O(h^{m+order})."""
    K = (m + order - 1) // 2
    pts = list(range(-K, K + 1))
    n = len(pts)
    # solve sum_j w_j j^i = i! delta_{i,m} exactly
    A = [[Fraction(j) ** i for j in pts] for i in range(n)]
    rhs = [Fraction(math.factorial(m)) if i == m else Fraction(0) for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        rhs[c], rhs[piv] = rhs[piv], rhs[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
                rhs[r] -= f * rhs[c]
    w = [rhs[i] / A[i][i] for i in range(n)]
    return tuple(pts), tuple(float(x) for x in w)


def pde_residual(evaluator: Callable, eq: Equation, t, z: complex,
                 h_t: float = 1e-3, h_z: float = 1e-3, relative: bool = False) -> complex:
    """d_t^p u - d_z^q u by fourth-order central differences.

    The t-stencil runs along the ray through t so that it stays on the same
    sheet.  With relative=True the residual is divided by the larger of the
    two derivative magnitudes.
    """
    t = as_riemann_point(t, eq)
    z = complex(z)
    pts_t, w_t = _stencil(eq.p)
    pts_z, w_z = _stencil(eq.q)
    if t.modulus <= max(pts_t) * h_t * 1.5:
        raise StencilOutOfDomain("time stencil reaches the origin")
    e = cmath.exp(1j * t.argument)
    try:
        dt = sum(w * evaluator(t.with_modulus(t.modulus + j * h_t), z)
                 for j, w in zip(pts_t, w_t)) / (h_t * e) ** eq.p
        dz = sum(w * evaluator(t, z + j * h_z) for j, w in zip(pts_z, w_z)) / h_z ** eq.q
    except BorelStokesError as exc:
        raise StencilOutOfDomain(f"stencil point rejected: {exc}") from exc
    res = complex(dt - dz)
    if relative:
        return res / max(abs(dt), abs(dz), 1e-300)
    return res


def initial_limit(evaluator: Callable, datum: CauchyDatum, sector: SurfaceSector, z: complex,
                  t_moduli: Sequence[float], arg: float | None = None):
    """Deviations |u(t, z) - phi(z)| along a ray inside the sector.

    Returns (deviations, decreasing).
    """
    if arg is None:
        arg = sector.middle
    if not sector.contains(arg):
        raise OutsideSector("sample ray is not inside the sector")
    phi = datum.eval(z)
    devs = [abs(evaluator(RiemannPoint(float(m), arg, sector.period), z) - phi) for m in t_moduli]
    decreasing = all(b < a for a, b in zip(devs[:-1], devs[1:]))
    return devs, decreasing


# -- verification ------------------------------------------------------------

def covers_circle(intervals, period: float) -> bool:
    """Whether the open intervals (lo, hi) cover every argument mod period."""
    pieces = []
    for lo, hi in intervals:
        if hi - lo >= period:
            return True
        a = lo % period
        b = a + (hi - lo)
        if b <= period:
            pieces.append((a, b))
        else:
            pieces.append((a, period))
            pieces.append((0.0, b - period))
    pieces.sort()
    # open intervals: a point shared only as an endpoint is not covered,
    # except 0 == period which may be covered through the wrap
    reach = None
    for a, b in pieces:
        if reach is None:
            if a > 0.0:
                return _wraps_zero(intervals, period) and _cover_from(pieces, period)
            reach = b
            continue
        if a >= reach:
            return False
        reach = max(reach, b)
    return reach is not None and reach >= period


def _wraps_zero(intervals, period):
    for lo, hi in intervals:
        k = math.floor(hi / period)
        if lo < k * period < hi:
            return True
    return False


def _cover_from(pieces, period):
    reach = 0.0
    for a, b in pieces:
        if a > reach:
            return False
        reach = max(reach, b)
    return reach >= period


def _check(name, ok, detail):
    return {"name": name, "pass": bool(ok), "detail": detail}


def verify_family(eq: Equation, datum: CauchyDatum, members: Sequence[FamilyMember],
                  quad: QuadratureSpec = QuadratureSpec(), samples: dict | None = None) -> dict:
    """Run the five defining checks of a maximal family.

    samples may override: t_mod (0.1), z (list, [0]), pde_t_mod (0.05),
    moduli (initial-limit moduli), seed, n_absorb (3), pde_tol (1e-4).
    """
    s = {"t_mod": 0.1, "z": [0j], "pde_t_mod": 0.05, "moduli": [0.1 * 2.0 ** -j for j in range(6)],
         "seed": 20240611, "n_absorb": 3, "pde_tol": 1e-4}
    s.update(samples or {})
    P = eq.period
    lines = singular_directions(eq, datum)
    evals = [member_evaluator(eq, datum, m, quad, with_error=True) for m in members]
    value_only = [member_evaluator(eq, datum, m, quad) for m in members]

    def covering():
        ok = covers_circle([(m.sector.lower, m.sector.upper) for m in members], P)
        return _check("covering", ok, {"period": P, "n_members": len(members)})

    def opening():
        need = 2.0 * eq.half_opening
        ops = [m.sector.opening for m in members]
        return _check("opening", all(o > need for o in ops), {"openings": ops, "required": need})

    def actual_solution():
        rows = []
        ok = True
        for m, ev in zip(members, value_only):
            for z in s["z"]:
                t = RiemannPoint(s["pde_t_mod"], m.representative_theta, P)
                try:
                    res = abs(pde_residual(ev, eq, t, z, relative=True))
                    devs, dec = initial_limit(ev, datum, m.sector, z, s["moduli"],
                                              m.representative_theta)
                    good = res < s["pde_tol"] and dec
                    rows.append({"member": m.index, "z": [z.real, z.imag], "pde_rel": res,
                                 "deviations": devs, "decreasing": dec})
                except BorelStokesError as exc:
                    good = False
                    rows.append({"member": m.index, "z": [z.real, z.imag], "error": str(exc)})
                ok = ok and good
        return _check("actual_solution", ok, rows)

    def distinctness():
        if not lines:
            return _check("distinctness", True, "no Stokes lines")
        rows = []
        ok = True
        n = len(members)
        for i, m in enumerate(members):
            nxt = members[(i + 1) % n]
            d = m.gap[1]
            line = min(lines, key=lambda L: abs(reduce_angle(L.direction - d, P)))
            for z in s["z"]:
                t = RiemannPoint(s["t_mod"], d, P)
                try:
                    ui, ei = evals[i](t, z)
                    uj, ej = evals[(i + 1) % n](t, z)
                    jump = jump_closed_form(eq, datum, line, t, z, quad.eps_sector).value
                    diff = uj - ui
                    err = ei + ej
                    good = (abs(diff) > 5.0 * err
                            and abs(diff - jump) < 10.0 * err + 1e-8 * max(1.0, abs(jump)))
                    rows.append({"pair": [m.index, nxt.index], "line": line.direction,
                                 "difference": [diff.real, diff.imag], "jump": [jump.real, jump.imag],
                                 "err": err})
                except BorelStokesError as exc:
                    good = False
                    rows.append({"pair": [m.index, nxt.index], "error": str(exc)})
                ok = ok and good
        return _check("distinctness", ok, rows)

    def absorption():
        rng = np.random.default_rng(s["seed"])
        rows = []
        ok = True
        found = 0
        while found < s["n_absorb"]:
            d = float(rng.uniform(0.0, P))
            if any(abs(reduce_angle(d - L.direction, P)) < 0.05 for L in lines):
                continue
            found += 1
            t = RiemannPoint(s["t_mod"], d, P)
            z = s["z"][0]
            try:
                r = borel_sum(eq, datum, d, t, z, quad)
            except BorelStokesError as exc:
                ok = False
                rows.append({"direction": d, "error": str(exc)})
                continue
            match = None
            for m, ev in zip(members, evals):
                try:
                    u, e = ev(t, z)
                except BorelStokesError:
                    continue
                if abs(u - r.value) < 10.0 * (e + r.err_est) + 1e-10:
                    match = m.index
                    break
            ok = ok and match is not None
            rows.append({"direction": d, "member": match})
        return _check("absorption", ok, rows)

    jobs = [covering, opening, actual_solution, distinctness, absorption]
    n = min(_threads(), len(jobs))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            checks = list(ex.map(lambda f: f(), jobs))
    else:
        checks = [f() for f in jobs]
    return {"checks": checks, "n_members": len(members),
            "all_pass": all(c["pass"] for c in checks)}
