"""Gamma function, its reciprocal and the summation kernel C_alpha.

The kernel

    C_alpha(tau) = sum_n (-tau)^n / (n! Gamma(1 - (n+1)/alpha))

is entire of order beta = alpha/(alpha-1).  Summing the series in double
precision is fine while the largest term stays small; once |tau| grows the
terms swing through huge values before the factorials win and the sum loses
all its digits to cancellation.  In that regime, and inside the decay sector
|arg tau| < pi/(2 beta), the same function is obtained from the integral

    C_alpha(tau) = alpha/(2 pi i) int_Gamma exp(v^alpha - tau v) dv

along the steepest-descent path through the principal saddle point v* of
the exponent, which is free of cancellation.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import LowConfidence, PoleOfGamma, SeriesNotConverged

__all__ = [
    "KernelParams",
    "gamma",
    "recip_gamma",
    "kernel_C",
    "kernel_values",
    "kernel_closed_form_2",
    "fit_decay_constants",
    "decay_constant",
]

# Lanczos approximation, g = 7, nine terms
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_POLE_TOL = 1e-12
_EPS = 4.0 * np.finfo(float).eps
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _as_fraction(z) -> Fraction | None:
    """Exact rational value of z if it is a Rational (int, Fraction)."""
    if isinstance(z, bool):
        return Fraction(int(z))
    if isinstance(z, Rational):
        return Fraction(z)
    return None


def _sinpi(z: complex) -> complex:
    """sin(pi z) with the real part reduced mod 2 first."""
    z = complex(z)
    x = math.fmod(z.real, 2.0)
    return cmath.sin(math.pi * complex(x, z.imag))


def _nonpositive_int_near(z: complex) -> bool:
    z = complex(z)
    if z.real > 0.5:
        return False
    n = round(z.real)
    return n <= 0 and abs(z - n) < _POLE_TOL


def _lanczos_log(z: complex) -> complex:
    """log Gamma(z) for Re z >= 1/2, up to a multiple of 2 pi i."""
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma(z) -> complex:
    """Complex Gamma function.

    Lanczos approximation on Re z >= 1/2 and the reflection identity
    Gamma(z) Gamma(1-z) = pi / sin(pi z) elsewhere.  Rational inputs are
    checked for poles exactly.
    """
    fz = _as_fraction(z)
    if fz is not None:
        if fz.denominator == 1 and fz <= 0:
            raise PoleOfGamma(f"Gamma has a pole at {fz}")
        z = float(fz)
    z = complex(z)
    if _nonpositive_int_near(z):
        raise PoleOfGamma(f"Gamma has a pole near {z}")
    if z.real < 0.5:
        return math.pi / (_sinpi(z) * cmath.exp(_lanczos_log(1.0 - z)))
    val = cmath.exp(_lanczos_log(z))
    if z.imag == 0.0:
        return complex(val.real, 0.0)
    return val


def recip_gamma(z) -> complex:
    """1/Gamma(z), entire; exactly 0 at the nonpositive integers."""
    fz = _as_fraction(z)
    if fz is not None:
        if fz.denominator == 1 and fz <= 0:
            return 0j
        z = float(fz)
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real):
        return 0j
    if z.real < 0.5:
        # 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi, no division by sin
        return _sinpi(z) * cmath.exp(_lanczos_log(1.0 - z)) / math.pi
    val = cmath.exp(-_lanczos_log(z))
    if z.imag == 0.0:
        return complex(val.real, 0.0)
    return val


@dataclass(frozen=True)
class KernelParams:
    """Order alpha = q/p of the kernel together with its truncation controls."""

    alpha: Fraction
    tol: float = 1e-14
    max_terms: int = 4000
    beta: Fraction = field(init=False)

    def __post_init__(self):
        alpha = Fraction(self.alpha)
        if alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", alpha / (alpha - 1))


# -- coefficient table -------------------------------------------------------

@lru_cache(maxsize=64)
def _coeff_table(alpha: Fraction, shift: int, nterms: int):
    """log|c_n| and sign(c_n) of c_n = 1/(n! Gamma(1 - (n+1+shift)/alpha)).

    With x = (n+1+shift)/alpha > 0 the reflection identity gives
    1/Gamma(1-x) = sin(pi x) Gamma(x)/pi, so every c_n is real and its
    logarithm never overflows.  Integer x is an exact zero.
    """
    logc = np.full(nterms, -np.inf)
    sign = np.zeros(nterms)
    for n in range(nterms):
        x = Fraction(n + 1 + shift) / alpha
        if x.denominator == 1:
            continue
        s = math.sin(math.pi * float(x % 2))
        logc[n] = math.lgamma(float(x)) - math.lgamma(n + 1.0) + math.log(abs(s)) - math.log(math.pi)
        sign[n] = math.copysign(1.0, s)
    logc.flags.writeable = False
    sign.flags.writeable = False
    return logc, sign


def _first_coeff(alpha: Fraction, shift: int) -> complex:
    return recip_gamma(1 - Fraction(1 + shift) / alpha)


def _stop_index(params: KernelParams, r: float, shift: int) -> int:
    """Number of series terms needed at |tau| = r."""
    logc, _ = _coeff_table(params.alpha, shift, params.max_terms)
    n = np.arange(params.max_terms)
    logterm = logc + n * math.log(r) if r > 0 else np.where(n == 0, 0.0, -np.inf)
    small = (logterm < math.log(params.tol / 10.0)) & (n > 2 * r)
    # first index ending a run of three small terms
    run = small[:-2] & small[1:-1] & small[2:]
    idx = np.flatnonzero(run)
    if idx.size == 0:
        raise SeriesNotConverged(
            f"kernel series for |tau|={r:.3g} needs more than {params.max_terms} terms")
    return int(idx[0]) + 3


def _series(params: KernelParams, taus: np.ndarray, shift: int, c0: complex) -> np.ndarray:
    """Power series summed for all taus at once, truncated where the largest needs."""
    if taus.size == 0:
        return np.empty(0, dtype=complex)
    logc, sign = _coeff_table(params.alpha, shift, params.max_terms)
    stop = _stop_index(params, float(np.max(np.abs(taus))), shift)
    n = np.arange(stop)
    out = np.empty(taus.shape, dtype=complex)
    chunk = max(1, 2_000_000 // stop)
    for a in range(0, taus.size, chunk):
        t = taus[a:a + chunk]
        with np.errstate(divide="ignore", invalid="ignore"):
            expo = logc[None, :stop] + n[None, :] * np.log(np.abs(t))[:, None]
        expo[:, 0] = -np.inf
        terms = sign[None, :stop] * np.exp(expo + 1j * n[None, :] * np.angle(-t)[:, None])
        out[a:a + chunk] = terms.sum(axis=1) + c0
    return -out if shift % 2 else out


@lru_cache(maxsize=256)
def _series_radius(params: KernelParams, shift: int) -> float:
    """Largest |tau| at which eps times the largest series term stays below tol.

    The largest term grows monotonically with |tau|, so bisection on log|tau|
    finds the switch radius once for every (alpha, shift, tol).
    """
    logc, _ = _coeff_table(params.alpha, shift, params.max_terms)
    n = np.arange(params.max_terms)
    bound = math.log(params.tol / _EPS)

    def ok(x):
        return float(np.max(logc + n * x)) <= bound

    lo, hi = -5.0, 0.0
    while ok(hi):
        lo, hi = hi, hi + 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return math.exp(lo)


# -- steepest descent --------------------------------------------------------

_GH_X, _GH_W = np.polynomial.hermite.hermgauss(80)
_SUBSTEP = 0.05


def _descent(alpha: float, taus: np.ndarray, shift: int) -> np.ndarray:
    """C^{(shift)} from the integral along the steepest-descent path.

    C^{(k)}(tau) = alpha/(2 pi i) int e^{v^alpha - tau v} (-v)^k dv over a
    contour from infinity at arg v = -pi/alpha to infinity at +pi/alpha.
    With v = v* w, v* = (tau/alpha)^{1/(alpha-1)} and L = tau v*, the
    exponent is L h(w), h(w) = w^alpha/alpha - w, with its saddle at w = 1.
    Along the path L h(w) = L h(1) - u^2 for real u, so the integral is a
    Gauss-Hermite sum in u; w(u) is traced outward from the saddle by
    Newton continuation, simultaneously for all tau.  Entries where the
    continuation fails come back as nan.
    """
    taus = np.asarray(taus, dtype=complex)
    vstar = (taus / alpha) ** (1.0 / (alpha - 1.0))
    lam = taus * vstar
    A = np.abs(lam)
    rot = np.exp(-1j * np.angle(lam))
    h1 = 1.0 / alpha - 1.0
    slope0 = 1j * math.sqrt(2.0 / (alpha - 1.0)) * np.exp(-0.5j * np.angle(lam))
    sig = _GH_X[None, :] / np.sqrt(A)[:, None]
    w = np.empty(sig.shape, dtype=complex)
    half = sig.shape[1] // 2
    with np.errstate(all="ignore"):
        for cols in (range(half, sig.shape[1]), range(half - 1, -1, -1)):
            s_cur = np.zeros(len(taus))
            w_cur = np.ones(len(taus), dtype=complex)
            d_cur = slope0.copy()
            for i in cols:
                s_end = sig[:, i]
                s_start = s_cur
                nsub = max(1, int(math.ceil(np.max(np.abs(s_end - s_start)) / _SUBSTEP)))
                for k in range(1, nsub + 1):
                    s_new = s_start + (s_end - s_start) * (k / nsub)
                    wg = w_cur + d_cur * (s_new - s_cur)
                    target = h1 - rot * s_new * s_new
                    for _ in range(20):
                        step = (wg ** alpha / alpha - wg - target) / (wg ** (alpha - 1.0) - 1.0)
                        wg = wg - step
                        if np.all(np.abs(step) <= 1e-15 * np.abs(wg)):
                            break
                    d_cur = -2.0 * rot * s_new / (wg ** (alpha - 1.0) - 1.0)
                    w_cur, s_cur = wg, s_new
                w[:, i] = w_cur
        resid = np.abs(w ** alpha / alpha - w - h1 + rot[:, None] * sig * sig)
        dw = -2.0 * rot[:, None] * sig / (w ** (alpha - 1.0) - 1.0)
        if shift:
            dw = dw * (-vstar[:, None] * w) ** shift
        out = alpha / (2j * math.pi) * vstar * np.exp(lam * h1) * (dw @ _GH_W) / np.sqrt(A)
    bad = ~np.isfinite(out) | np.any(resid > 1e-9 * (1.0 + np.abs(sig) ** 2), axis=1)
    out[bad] = np.nan
    return out


def kernel_values(params: KernelParams, tau, shift: int = 0) -> np.ndarray:
    """Vectorised C_alpha (or its shift-th derivative) on an array of tau.

    The derivative uses the exact term shift
    C^{(k)}(tau) = (-1)^k sum_n (-tau)^n / (n! Gamma(1 - (n+1+k)/alpha)).
    The series is used unless its largest term times machine epsilon
    exceeds the tolerance.  Large tau inside the decay sector go to the
    steepest-descent integral; anything else falls back to the series and
    is flagged LowConfidence.
    """
    tau = np.asarray(tau, dtype=complex)
    shape = tau.shape
    flat = tau.ravel()
    c0 = _first_coeff(params.alpha, shift)
    vals = np.empty(flat.shape, dtype=complex)
    near = np.abs(flat) <= _series_radius(params, shift)
    vals[near] = _series(params, flat[near], shift, c0)
    idx = np.flatnonzero(~near)
    low = np.empty(0, dtype=complex)
    if idx.size:
        inside = np.abs(np.angle(flat[idx])) <= math.pi / (2.0 * float(params.beta))
        vals[idx] = np.nan
        if inside.any():
            vals[idx[inside]] = _descent(float(params.alpha), flat[idx[inside]], shift)
        fall = idx[~np.isfinite(vals[idx])]
        low = flat[fall]
        vals[fall] = _series(params, low, shift, c0)
    # real coefficients: C is real on the real axis
    on_axis = flat.imag == 0
    vals[on_axis] = vals[on_axis].real
    if low.size:
        worst = complex(low[np.argmax(np.abs(low))])
        warnings.warn(
            f"C_{params.alpha} at {len(low)} point(s) (e.g. tau={worst:.3g}) "
            "summed with cancellation beyond double precision",
            LowConfidence, stacklevel=2)
    return vals.reshape(shape)


def kernel_C(params: KernelParams, tau: complex, shift: int = 0) -> complex:
    """C_alpha(tau) to absolute accuracy params.tol."""
    return complex(kernel_values(params, np.array([tau]), shift)[0])


def kernel_closed_form_2(tau):
    """C_2(tau) = exp(-tau^2/4)/sqrt(pi)."""
    return np.exp(-np.asarray(tau) ** 2 / 4.0) / math.sqrt(math.pi)


def decay_constant(alpha) -> float:
    """Asymptotic rate A in |C_alpha(x)| ~ exp(-A x^beta) along x > 0."""
    alpha = Fraction(alpha)
    beta = alpha / (alpha - 1)
    return float(alpha) ** (1.0 - float(beta)) / float(beta)


@lru_cache(maxsize=256)
def fit_decay_constants(alpha: Fraction, gamma_dir: float = 0.0,
                        rho_max: float = 6.0, npts: int = 61):
    """Constants (A1, A2) with |C_alpha(rho e^{i gamma})| <= A1 exp(-A2 rho^beta).

    A2 comes from a least-squares fit of log|C| against rho^beta over
    [0, rho_max]; A1 is then raised until the bound holds at every sample.
    The fitted rate is capped by the true asymptotic rate
    A cos(beta gamma) so the bound does not fail beyond the fitted range.
    """
    params = KernelParams(Fraction(alpha))
    beta = float(params.beta)
    rho = np.linspace(0.0, rho_max, npts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowConfidence)
        c = np.abs(kernel_values(params, rho * cmath.exp(1j * gamma_dir)))
    ok = c > 1e-280
    x = rho[ok] ** beta
    y = np.log(c[ok])
    A = np.column_stack([np.ones_like(x), -x])
    (logA1, A2), *_ = np.linalg.lstsq(A, y, rcond=None)
    asym = decay_constant(params.alpha) * math.cos(beta * gamma_dir)
    if asym > 0:
        A2 = min(A2, 0.95 * asym)
    logA1 = max(logA1, float(np.max(y + A2 * x)))
    return math.exp(logA1), float(A2)
