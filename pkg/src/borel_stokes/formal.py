"""Formal power-series solution of d_t^p u = d_z^q u.

With u(0, z) = phi(z) and the other p-1 initial t-derivatives zero the
unique formal solution is

    u(t, z) = sum_n phi^{(qn)}(z) t^{pn} / (pn)!

which diverges for data with poles: coefficients grow like (n!)^s with
s = (q-p)/p.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .datum import CauchyDatum
from .errors import GrowthOrderViolation, NoMinimum

__all__ = [
    "Equation",
    "FormalSolution",
    "formal_solution",
    "partial_sum",
    "gevrey_estimate",
    "optimal_truncation",
    "HEAT",
]

_ZERO_COEFF = 1e-300


@dataclass(frozen=True)
class Equation:
    p: int
    q: int
    k: Fraction = field(init=False, repr=False)
    s: Fraction = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.p, bool) or isinstance(self.q, bool):
            raise TypeError("p and q must be integers")
        p, q = int(self.p), int(self.q)
        if p != self.p or q != self.q:
            raise TypeError("p and q must be integers")
        if not 1 <= p < q:
            raise ValueError("need 1 <= p < q")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", Fraction(p, q - p))
        object.__setattr__(self, "s", Fraction(q - p, p))

    @property
    def alpha(self) -> Fraction:
        """Kernel order q/p."""
        return Fraction(self.q, self.p)

    @property
    def beta(self) -> Fraction:
        return Fraction(self.q, self.q - self.p)

    @property
    def period(self) -> float:
        """Monodromy period 2 pi q/p of arg t."""
        return 2.0 * math.pi * self.q / self.p

    @property
    def half_opening(self) -> float:
        """pi/(2k), half the minimal opening of a summability sector."""
        return math.pi * (self.q - self.p) / (2.0 * self.p)

    @property
    def is_heat(self) -> bool:
        return self.p == 1 and self.q == 2


HEAT = Equation(1, 2)


def _tvalue(t) -> complex:
    # t^{pn} has an integer exponent, so any representative of t will do
    return complex(t.complex) if hasattr(t, "complex") else complex(t)


class FormalSolution:
    """Lazily extended coefficient list of the formal solution.

    Entry n is the datum phi^{(qn)} divided by (pn)!.  Extension is guarded
    by a lock so concurrent readers see a consistent list.  Numerical
    values are produced straight from the datum in logarithmic form, which
    stays finite long after the stored data would overflow.
    """

    def __init__(self, equation: Equation, datum: CauchyDatum):
        self.equation = equation
        self.datum = datum
        self._coeffs: list = [datum]
        self._lock = threading.Lock()

    def coefficient(self, n: int) -> CauchyDatum:
        if n < len(self._coeffs):
            return self._coeffs[n]
        with self._lock:
            p, q = self.equation.p, self.equation.q
            while len(self._coeffs) <= n:
                m = len(self._coeffs)
                self._coeffs.append(self.datum.derivative(q * m, math.lgamma(p * m + 1)))
            return self._coeffs[n]

    def materialize(self, depth: int) -> None:
        self.coefficient(depth)

    @property
    def terminates_at(self) -> int | None:
        """Last index with a nonzero coefficient, when the series is finite."""
        if self.datum.has_poles:
            return None
        ent = self.datum.entire
        if ent.order != 0:
            return None
        if not ent.terms:
            return 0
        return max(m for _, _, m in ent.terms) // self.equation.q

    def log_coefficient(self, n: int, z: complex) -> complex:
        p, q = self.equation.p, self.equation.q
        return self.datum.log_derivative(z, q * n, math.lgamma(p * n + 1))

    def coefficient_value(self, n: int, z: complex) -> complex:
        lg = self.log_coefficient(n, z)
        return 0j if lg.real == -math.inf else cmath.exp(lg)

    def log_abs_terms(self, t, z: complex, N: int) -> np.ndarray:
        """log|a_n(z) t^{pn}| for n = 0..N."""
        tv = _tvalue(t)
        lt = math.log(abs(tv)) if tv != 0 else -math.inf
        out = np.empty(N + 1)
        for n in range(N + 1):
            la = self.log_coefficient(n, z).real
            out[n] = la if n == 0 else la + self.equation.p * n * lt
        return out

    def term(self, n: int, t, z: complex) -> complex:
        tv = _tvalue(t)
        if n == 0:
            return self.coefficient_value(0, z)
        if tv == 0:
            return 0j
        lg = self.log_coefficient(n, z)
        if lg.real == -math.inf:
            return 0j
        return cmath.exp(lg + self.equation.p * n * cmath.log(tv))


def formal_solution(eq: Equation, datum: CauchyDatum) -> FormalSolution:
    if datum.entire.order > eq.beta:
        raise GrowthOrderViolation(
            f"entire part has growth order {datum.entire.order} > {eq.beta}")
    return FormalSolution(eq, datum)


def partial_sum(f: FormalSolution, t, z: complex, N: int) -> complex:
    """sum_{n<=N} a_n(z) t^{pn}."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return complex(sum(f.term(n, t, z) for n in range(N + 1)))


def gevrey_estimate(f: FormalSolution, z: complex, N_max: int) -> float:
    """Fitted Gevrey order of the coefficients a_n(z).

    Least squares of log|a_n| on (n log n, n, 1) for n in [N_max/2, N_max];
    the n log n weight is the estimate of s.  Zero beyond a point means a
    terminating series, reported as 0.
    """
    if N_max < 8:
        raise ValueError("N_max must be at least 8")
    n = np.arange(N_max // 2, N_max + 1)
    y = np.array([f.log_coefficient(int(i), z).real for i in n])
    if np.any(~np.isfinite(y)) or np.any(y < math.log(_ZERO_COEFF)):
        return 0.0
    A = np.column_stack([n * np.log(n), n, np.ones_like(n, dtype=float)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def optimal_truncation(f: FormalSolution, t, z: complex, N_cap: int = 200):
    """Truncate at the smallest term.

    Returns (N_star, value, err_est) with value the partial sum through
    N_star and err_est the size of the first omitted term.
    """
    last = f.terminates_at
    if last is not None:
        return last, partial_sum(f, t, z, last), 0.0
    logs = f.log_abs_terms(t, z, N_cap + 1)
    if np.isfinite(logs[0]) and logs[1] > logs[0]:
        raise NoMinimum("series terms grow from the start; |t| is too large")
    n_star = int(np.argmin(logs[: N_cap + 1]))
    value = partial_sum(f, t, z, n_star)
    err = float(np.exp(logs[n_star + 1])) if np.isfinite(logs[n_star + 1]) else 0.0
    return n_star, value, err
