"""Meromorphic Cauchy data: finitely many poles plus an exponential polynomial.

    phi(z) = sum_l sum_k a_{lk} / (z - z_l)^k + sum_j c_j z^{m_j} exp(lambda_j z)

Both parts are closed under differentiation, so derivatives of any order
are exact data of the same shape.  Very high derivatives (the formal
solution needs order q*n with n in the tens) overflow as plain numbers, so
evaluation of phi^{(m)}(z)/D is also offered in logarithmic form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AtPole

__all__ = [
    "PoleTerm",
    "EntirePart",
    "CauchyDatum",
    "GrowthBound",
    "growth_bounds",
    "datum_from_json",
    "datum_to_json",
]

_POLE_REL = 1e-12


def _clog(w: complex) -> complex:
    return cmath.log(w) if w != 0 else complex(-math.inf, 0.0)


def _unsign(w) -> complex:
    """Drop signed zeros; cmath.phase(-1-0j) would otherwise be -pi."""
    w = complex(w)
    return complex(w.real + 0.0, w.imag + 0.0)


def _log_rising(k: int, m: int) -> float:
    """log of k(k+1)...(k+m-1)."""
    return math.lgamma(k + m) - math.lgamma(k)


@dataclass(frozen=True)
class PoleTerm:
    """Principal part sum_k coefficients[k-1] / (z - location)^k."""

    location: complex
    coefficients: tuple

    def __post_init__(self):
        loc = _unsign(self.location)
        coeffs = tuple(complex(c) for c in self.coefficients)
        if loc == 0:
            raise ValueError("poles at the origin are not admissible")
        if not coeffs or coeffs[-1] == 0:
            raise ValueError("top pole coefficient must be nonzero")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def guard(self) -> float:
        return _POLE_REL * max(1.0, abs(self.location))


@dataclass(frozen=True)
class EntirePart:
    """sum of c z^m exp(lambda z) over (c, lambda, m) triples."""

    terms: tuple = ()

    def __post_init__(self):
        merged: dict = {}
        for c, lam, m in self.terms:
            m = int(m)
            if m < 0:
                raise ValueError("monomial degree must be nonnegative")
            key = (_unsign(lam), m)
            merged[key] = merged.get(key, 0j) + complex(c)
        terms = tuple((c, lam, m) for (lam, m), c in merged.items() if c != 0)
        object.__setattr__(self, "terms", terms)

    @property
    def order(self) -> int:
        """Exponential growth order: 0 for polynomials, 1 otherwise."""
        return 1 if any(lam != 0 for _, lam, _ in self.terms) else 0

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c, lam, m in self.terms:
            term = c * z ** m
            if lam != 0:
                term = term * np.exp(lam * z)
            out = out + term
        return out

    def derivative(self, order: int, log_scale: float = 0.0) -> "EntirePart":
        if order == 0 and log_scale == 0.0:
            return self
        new = []
        for c, lam, j in self.terms:
            lc = _clog(c) - log_scale
            for i in range(min(j, order) + 1):
                if lam == 0 and i != order:
                    continue
                # C(order, i) * j!/(j-i)! * lam^(order-i)
                if log_scale == 0.0:
                    w = math.comb(order, i) * math.perm(j, i)
                    new.append((c * w * lam ** (order - i), lam, j - i))
                    continue
                lg = (math.lgamma(order + 1) - math.lgamma(i + 1) - math.lgamma(order - i + 1)
                      + math.lgamma(j + 1) - math.lgamma(j - i + 1))
                if order - i:
                    lg += (order - i) * _clog(lam)
                new.append((cmath.exp(lc + lg), lam, j - i))
        return EntirePart(tuple(new))

    def log_derivative_terms(self, z: complex, order: int) -> list:
        """Complex logarithms of the summands of the order-th derivative at z."""
        out = []
        z = complex(z)
        for c, lam, j in self.terms:
            base = _clog(c) + lam * z
            for i in range(min(j, order) + 1):
                if lam == 0 and i != order:
                    continue
                if j - i > 0 and z == 0:
                    continue
                lg = (math.lgamma(order + 1) - math.lgamma(i + 1) - math.lgamma(order - i + 1)
                      + math.lgamma(j + 1) - math.lgamma(j - i + 1))
                if order - i:
                    lg += (order - i) * _clog(lam)
                if j - i:
                    lg += (j - i) * _clog(z)
                out.append(base + lg)
        return out

    def reflect(self) -> "EntirePart":
        return EntirePart(tuple((-((-1) ** m) * c, -lam, m) for c, lam, m in self.terms))

    def scale(self, a: complex) -> "EntirePart":
        return EntirePart(tuple((a * c, lam, m) for c, lam, m in self.terms))


@dataclass(frozen=True)
class GrowthBound:
    """|f(z)| <= bound(|z|) = C1 * max(1, r)^degree * exp(C2 * r^order)."""

    order: int
    C1: float
    C2: float
    degree: int = 0

    def bound(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            out = self.C1 * np.exp(self.C2 * r ** self.order) if self.order else np.full(r.shape, self.C1)
        if self.degree:
            out = out * np.maximum(1.0, r) ** self.degree
        return out

    def log_bound(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.log(self.C1) + (self.C2 * r ** self.order if self.order else 0.0)
            if self.degree:
                out = out + self.degree * np.log(np.maximum(1.0, r))
        return out

    def as_tuple(self):
        return self.order, self.C1, self.C2


def growth_bounds(entire: EntirePart, margin: float = 0.5) -> GrowthBound:
    """Growth constants (order, C1, C2) of an exponential polynomial.

    Polynomials get order 0 and C2 = 0, with the degree kept separately so
    that bound(r) is still a true bound.  Otherwise z^m is absorbed into the
    exponential through |z|^m <= m!/margin^m exp(margin |z|).
    """
    if not entire.terms:
        return GrowthBound(0, 0.0, 0.0, 0)
    if entire.order == 0:
        gb = GrowthBound(0, float(sum(abs(c) for c, _, _ in entire.terms)), 0.0,
                         max(m for _, _, m in entire.terms))
    else:
        c1 = 0.0
        for c, _, m in entire.terms:
            c1 += abs(c) * (math.factorial(m) / margin ** m if m else 1.0)
        c2 = max(abs(lam) for _, lam, _ in entire.terms) + margin
        gb = GrowthBound(1, c1, c2, 0)
    # sanity check on sample rings
    ang = np.exp(2j * np.pi * np.arange(64) / 64)
    for r in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        if gb.C2 * r > 600.0:
            break
        vals = np.abs(entire.eval(r * ang))
        if np.any(vals > gb.bound(r) * (1 + 1e-9) + 1e-300):
            raise RuntimeError("growth bound failed its ring check")
    return gb


@dataclass(frozen=True)
class CauchyDatum:
    poles: tuple = ()
    entire: EntirePart = field(default_factory=EntirePart)

    def __post_init__(self):
        poles = tuple(self.poles)
        locs = [p.location for p in poles]
        if len(set(locs)) != len(locs):
            raise ValueError("pole locations must be pairwise distinct")
        object.__setattr__(self, "poles", poles)

    # -- constructors -------------------------------------------------------

    @classmethod
    def simple_pole(cls, z0: complex, a: complex = 1.0) -> "CauchyDatum":
        return cls((PoleTerm(z0, (a,)),))

    @classmethod
    def from_parts(cls, poles: Iterable = (), entire: Iterable = ()) -> "CauchyDatum":
        """From [(z_l, [a_1, ..., a_r]), ...] and [(c, lambda, m), ...]."""
        return cls(tuple(PoleTerm(z, tuple(a)) for z, a in poles), EntirePart(tuple(entire)))

    # -- structure ----------------------------------------------------------

    @property
    def locations(self) -> np.ndarray:
        return np.array([p.location for p in self.poles], dtype=complex)

    @property
    def has_poles(self) -> bool:
        return bool(self.poles)

    def __add__(self, other: "CauchyDatum") -> "CauchyDatum":
        coeffs: dict = {}
        for p in self.poles + other.poles:
            cur = list(coeffs.get(p.location, []))
            cur += [0j] * (len(p.coefficients) - len(cur))
            for i, a in enumerate(p.coefficients):
                cur[i] += a
            coeffs[p.location] = cur
        poles = []
        for loc, cs in coeffs.items():
            while cs and cs[-1] == 0:
                cs.pop()
            if cs:
                poles.append(PoleTerm(loc, tuple(cs)))
        return CauchyDatum(tuple(poles), EntirePart(self.entire.terms + other.entire.terms))

    def scale(self, a: complex) -> "CauchyDatum":
        if a == 0:
            return CauchyDatum()
        return CauchyDatum(tuple(PoleTerm(p.location, tuple(a * c for c in p.coefficients))
                                 for p in self.poles), self.entire.scale(a))

    def __rmul__(self, a):
        return self.scale(complex(a))

    # -- evaluation ---------------------------------------------------------

    def _check(self, z: np.ndarray):
        for p in self.poles:
            if np.any(np.abs(z - p.location) < p.guard()):
                raise AtPole(f"evaluation within {p.guard():.1e} of the pole {p.location}")

    def eval_array(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        self._check(z)
        out = self.entire.eval(z)
        for p in self.poles:
            w = 1.0 / (z - p.location)
            acc = np.zeros(z.shape, dtype=complex)
            for a in reversed(p.coefficients):
                acc = (acc + a) * w
            out = out + acc
        return out

    def eval(self, z: complex) -> complex:
        return complex(self.eval_array(np.array([z]))[0])

    __call__ = eval

    def derivative(self, order: int, log_scale: float = 0.0) -> "CauchyDatum":
        """Exact order-th derivative, optionally divided by exp(log_scale)."""
        if order < 0:
            raise ValueError("derivative order must be nonnegative")
        if order == 0 and log_scale == 0.0:
            return self
        poles = []
        for p in self.poles:
            new = [0j] * (p.order + order)
            for k, a in enumerate(p.coefficients, start=1):
                if log_scale == 0.0:
                    w = math.prod(range(k, k + order))
                else:
                    w = math.exp(_log_rising(k, order) - log_scale)
                new[k + order - 1] = a * (-1) ** order * w
            poles.append(PoleTerm(p.location, tuple(new)))
        return CauchyDatum(tuple(poles), self.entire.derivative(order, log_scale))

    def log_derivative(self, z: complex, order: int, log_divisor: float = 0.0) -> complex:
        """Complex log of phi^{(order)}(z) / exp(log_divisor).

        Real part -inf means the value is exactly zero.
        """
        z = complex(z)
        self._check(np.array([z]))
        logs = []
        sign_log = 1j * math.pi * (order % 2)
        for p in self.poles:
            lw = cmath.log(z - p.location)
            for k, a in enumerate(p.coefficients, start=1):
                if a == 0:
                    continue
                logs.append(cmath.log(a) + sign_log + _log_rising(k, order) - (k + order) * lw)
        logs += self.entire.log_derivative_terms(z, order)
        logs = [w for w in logs if w.real > -math.inf]
        if not logs:
            return complex(-math.inf, 0.0)
        top = max(w.real for w in logs)
        s = sum(cmath.exp(w - top) for w in logs)
        if s == 0:
            return complex(-math.inf, 0.0)
        return cmath.log(s) + top - log_divisor

    def reflect(self) -> "CauchyDatum":
        """psi(z) = -phi(-z)."""
        poles = tuple(PoleTerm(-p.location,
                               tuple(-((-1) ** k) * a for k, a in enumerate(p.coefficients, start=1)))
                      for p in self.poles)
        return CauchyDatum(poles, self.entire.reflect())

    def growth_bounds(self, margin: float = 0.5) -> GrowthBound:
        return growth_bounds(self.entire, margin)


# -- JSON --------------------------------------------------------------------

def _pair(v, what: str) -> complex:
    if not (isinstance(v, Sequence) and len(v) == 2):
        raise ValueError(f"{what} must be a [re, im] pair")
    return complex(float(v[0]), float(v[1]))


def _strict_keys(obj: dict, allowed: set, what: str):
    if not isinstance(obj, dict):
        raise ValueError(f"{what} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown key(s) in {what}: {sorted(extra)}")


def datum_from_json(obj: dict) -> CauchyDatum:
    _strict_keys(obj, {"poles", "entire"}, "datum")
    poles = []
    for i, p in enumerate(obj.get("poles", [])):
        _strict_keys(p, {"z", "coeffs"}, f"pole {i}")
        z = _pair(p["z"], "pole location")
        if z == 0:
            raise ValueError("pole at z = [0, 0] is not admissible")
        poles.append(PoleTerm(z, tuple(_pair(c, "coefficient") for c in p["coeffs"])))
    terms = []
    for i, e in enumerate(obj.get("entire", [])):
        _strict_keys(e, {"c", "lambda", "m"}, f"entire term {i}")
        m = e.get("m", 0)
        if isinstance(m, bool) or not isinstance(m, int) or m < 0:
            raise ValueError("entire term degree m must be a nonnegative integer")
        terms.append((_pair(e["c"], "c"), _pair(e.get("lambda", [0, 0]), "lambda"), m))
    return CauchyDatum(tuple(poles), EntirePart(tuple(terms)))


def datum_to_json(d: CauchyDatum) -> dict:
    pair = lambda w: [w.real, w.imag]
    return {
        "poles": [{"z": pair(p.location), "coeffs": [pair(a) for a in p.coefficients]}
                  for p in d.poles],
        "entire": [{"c": pair(c), "lambda": pair(lam), "m": m} for c, lam, m in d.entire.terms],
    }
