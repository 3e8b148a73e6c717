"""Gamma-family functions and the two Bessel functions used by the closed forms.

Gamma, log-gamma, digamma and trigamma are implemented directly (Lanczos
approximation, Stirling/asymptotic series plus recurrences).  The Bessel
functions have two routes: a fast path backed by ``scipy.special`` and a
reference path that integrates the defining integral representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, PoleError

__all__ = [
    "SpecFunResult",
    "gamma",
    "lgamma",
    "digamma",
    "trigamma",
    "beta",
    "lbeta",
    "bessel_k",
    "bessel_k_quad",
    "bessel_j",
    "bessel_j_quad",
    "bessel_k_scaled_power",
    "FUNCTIONS",
]

GAMMA_OVERFLOW = 171.6243769563027

# Lanczos coefficients, g = 7, n = 9
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

# B_{2k} / (2k) for the digamma asymptotic series
_DIGAMMA_ASYM = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_{2k} for the trigamma asymptotic series
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0)


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    abs_error_bound: float


def _vectorize(fn):
    """Let a scalar routine accept numpy arrays elementwise."""

    def wrapper(x, *args):
        if np.ndim(x) == 0 and all(np.ndim(a) == 0 for a in args):
            return fn(float(x), *(float(a) for a in args))
        return np.vectorize(fn, otypes=[float])(x, *args)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    wrapper.scalar = fn
    return wrapper


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


def _lanczos_sum(z):
    # z is the shifted argument x - 1
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    return acc


def _gamma(x):
    """Gamma function.  Raises ``PoleError`` at non-positive integers."""
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x > GAMMA_OVERFLOW:
        raise OverflowError(f"gamma({x}) overflows double precision")
    if x == math.floor(x) and x <= 23:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _gamma(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power so that large x does not overflow before the exp factor
    half = t ** ((z + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_sum(z)


def _lgamma(x):
    """log|Gamma(x)|."""
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"lgamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - _lgamma(1.0 - x)
    if x < 10.0:
        z = x - 1.0
        t = z + _LANCZOS_G + 0.5
        return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))))
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi) + series


def _digamma(x):
    """Psi(x) = d/dx log Gamma(x)."""
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma has a pole at {x}")
    if x < 0:
        return _digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_DIGAMMA_ASYM):
        series = series * inv2 + c
    return shift + math.log(x) - 0.5 / x - series * inv2


def _trigamma(x):
    """Psi'(x), the derivative of the digamma function."""
    if math.isnan(x):
        return math.nan
    if _is_nonpositive_integer(x):
        raise PoleError(f"trigamma has a pole at {x}")
    if x < 0:
        s = math.sin(math.pi * x)
        return math.pi**2 / (s * s) - _trigamma(1.0 - x)
    shift = 0.0
    while x < 10.0:
        shift += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    for b in reversed(_BERNOULLI):
        series = series * inv2 + b
    return shift + inv + 0.5 * inv2 + inv * inv2 * series


gamma = _vectorize(_gamma)
lgamma = _vectorize(_lgamma)
digamma = _vectorize(_digamma)
trigamma = _vectorize(_trigamma)


def lbeta(a, b):
    """log B(a, b) for positive arguments."""
    return lgamma(a) + lgamma(b) - lgamma(np.add(a, b))


def beta(a, b):
    return np.exp(lbeta(a, b))


# ---------------------------------------------------------------- Bessel K


def bessel_k_quad(lam, z, rtol=1e-12):
    """K_lam(z) from its integral representation, as a ``SpecFunResult``.

    With x = e^t the defining integral becomes
    ``int_0^inf cosh(lam t) exp(-z cosh t) dt``.  The integrand is rescaled by
    its maximum so that large orders and small arguments do not overflow.
    """
    if not z > 0:
        raise DomainError(f"bessel_k requires z > 0, got {z}")
    lam = abs(float(lam))
    z = float(z)

    def log_integrand(t):
        # log cosh(lam t) - z cosh t, stable for large lam t
        return lam * t + math.log1p(math.exp(-2.0 * lam * t)) - math.log(2.0) - z * math.cosh(t)

    t_star = math.asinh(lam / z) if lam > 0 else 0.0
    peak = log_integrand(t_star)

    def integrand(t):
        return math.exp(log_integrand(t) - peak)

    # past t_hi the integrand is below exp(-800) relative to the peak
    t_hi = t_star + 1.0
    while log_integrand(t_hi) - peak > -800.0:
        t_hi = t_star + 2.0 * (t_hi - t_star)
    pieces = [0.0, t_star, t_hi] if t_star > 0 else [0.0, t_hi]
    total = 0.0
    err = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, e = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=rtol, limit=400)
        total += val
        err += e
    scale = math.exp(peak)
    return SpecFunResult(total * scale, err * scale)


def bessel_k(lam, z):
    """Modified Bessel function of the third kind K_lam(z), z > 0."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0)):
        raise DomainError("bessel_k requires z > 0")
    out = special.kv(np.abs(np.asarray(lam, dtype=float)), z_arr)
    return float(out) if np.ndim(out) == 0 else out


def bessel_k_scaled_power(lam, z):
    """K_lam(z) * z**lam, continuous at z = 0 where it equals Gamma(lam) 2**(lam-1).

    Evaluated in log space so that tiny z with large lam stays finite.
    """
    lam = float(lam)
    z = abs(float(z))
    if z == 0.0:
        if lam <= 0:
            raise DomainError("K_lam(z) z^lam has no finite limit at z=0 for lam <= 0")
        return math.exp(_lgamma(lam) + (lam - 1.0) * math.log(2.0))
    # kve(lam, z) = kv * e^z
    kve = special.kve(abs(lam), z)
    return math.exp(math.log(kve) - z + lam * math.log(z))


# ---------------------------------------------------------------- Bessel J


def bessel_j_quad(order, z, rtol=1e-12):
    """J_order(z) from the Bessel/Schlafli integral, as a ``SpecFunResult``.

    For integer order only the finite integral over [0, pi] contributes; for
    other orders the standard correction term over [0, inf) is added.
    """
    order = float(order)
    z = float(z)
    is_int = order == math.floor(order)
    if z < 0:
        if not is_int:
            raise DomainError("bessel_j of non-integer order is complex for z < 0")
        res = bessel_j_quad(order, -z, rtol)
        sign = -1.0 if int(order) % 2 else 1.0
        return SpecFunResult(sign * res.value, res.abs_error_bound)
    if z == 0.0:
        if order == 0:
            return SpecFunResult(1.0, 0.0)
        if order > 0 or is_int:
            return SpecFunResult(0.0, 0.0)
        raise DomainError("bessel_j of negative non-integer order diverges at z = 0")
    limit = max(200, int(4 * (abs(z) + abs(order))))
    val, err = integrate.quad(
        lambda th: math.cos(order * th - z * math.sin(th)), 0.0, math.pi, epsabs=1e-13, epsrel=rtol, limit=limit
    )
    val /= math.pi
    err /= math.pi
    if not is_int:
        # beyond t_max the integrand is below exp(-800)
        t_max = math.asinh(800.0 / z)
        tail, terr = integrate.quad(
            lambda t: math.exp(-z * math.sinh(t) - order * t), 0.0, t_max, epsabs=1e-14, epsrel=rtol, limit=200
        )
        s = math.sin(order * math.pi) / math.pi
        val -= s * tail
        err += abs(s) * terr
    return SpecFunResult(val, err)


def bessel_j(order, z):
    """Bessel function of the first kind J_order(z)."""
    order_arr = np.asarray(order, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    nonint = order_arr != np.floor(order_arr)
    if np.any(nonint & (z_arr < 0)):
        raise DomainError("bessel_j of non-integer order is complex for z < 0")
    out = special.jv(order_arr, z_arr)
    return float(out) if np.ndim(out) == 0 else out


FUNCTIONS = {
    "gamma": gamma,
    "lgamma": lgamma,
    "digamma": digamma,
    "trigamma": trigamma,
    "beta": beta,
    "bessel_k": bessel_k,
    "bessel_j": bessel_j,
    "bessel_k_quad": lambda lam, z: bessel_k_quad(lam, z).value,
    "bessel_j_quad": lambda order, z: bessel_j_quad(order, z).value,
}
