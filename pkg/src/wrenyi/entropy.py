"""Estimators for weighted entropies and divergences.

All functionals reduce to a handful of weighted integrals of the densities
involved.  Each integral is estimated either by adaptive quadrature (n <= 2)
or by Monte Carlo importance sampling, and every reported value carries an
error: a standard error for Monte Carlo, a quadrature error bound otherwise.
Errors of nonlinear combinations (logs, ratios, the three-term relative
entropy) are propagated with the delta method using the joint covariance of
the underlying sample means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import weightfn
from .distributions import (
    AffineDensity,
    MaximizerDensity,
    Mixture,
    PearsonDistribution,
    as_generator,
)
from .errors import EstimatorDiverged, ParameterError, SupportMismatch, ZeroIntegral

P_LIMIT_BAND = 1e-6

# role keys for the per-call random sub-streams
_STREAM_F = 1
_STREAM_G = 2


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings shared by all estimators.

    Parameters
    ----------
    samples : int
        Monte Carlo sample size.
    seed : int
        Root seed; every estimator draws from a sub-stream ``seed/keys/role``.
    method : {"auto", "monte_carlo", "quadrature"}
        ``auto`` uses quadrature in dimension 1 and Monte Carlo otherwise.
    quad_rtol : float
        Relative tolerance for adaptive quadrature.
    tail_safe : bool
        Replace the sampling density by a heavier-tailed proposal when the
        plain estimator would have infinite variance.
    keys : tuple of int
        Extra spawn key, used to give independent streams to sweep items.
    """

    samples: int = 100_000
    seed: int = 0
    method: str = "auto"
    quad_rtol: float = 1e-10
    tail_safe: bool = True
    keys: tuple = ()

    def __post_init__(self):
        if self.samples < 2:
            raise ParameterError("need at least two samples")
        if self.method not in ("auto", "monte_carlo", "quadrature"):
            raise ParameterError(f"unknown method {self.method!r}")

    def child(self, *keys) -> "EstimatorConfig":
        return replace(self, keys=tuple(self.keys) + tuple(int(k) for k in keys))

    def rng(self, role) -> np.random.Generator:
        return as_generator(self.seed, *self.keys, role)


@dataclass(frozen=True)
class EntropyEstimate:
    """A scalar estimate with its error.

    ``error`` is a standard error when ``method == "monte_carlo"`` and an
    absolute error bound for quadrature or closed forms.  ``count`` is the
    number of samples or function evaluations used.
    """

    value: float
    error: float
    method: str
    count: int = 0
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def std_error(self):
        return self.error

    def to_dict(self):
        return {"value": self.value, "error": self.error, "method": self.method, "count": self.count}


@dataclass(frozen=True)
class Expectation:
    """Joint estimate of several expectations from one sample."""

    mean: np.ndarray
    cov: np.ndarray
    count: int
    method: str

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


def _combine(value, grad, expectation: Expectation, method=None):
    """Delta-method estimate of a smooth function of the expectation vector."""
    g = np.asarray(grad, dtype=float)
    if expectation.method == "monte_carlo":
        err = float(math.sqrt(max(g @ expectation.cov @ g, 0.0)))
    else:
        err = float(np.abs(g) @ expectation.se)
    return EntropyEstimate(float(value), err, method or expectation.method, expectation.count)


# ---------------------------------------------------------------- proposals


def _with_mu(f, mu):
    """A copy of the heavy-tailed law ``f`` with its Pearson VII parameter replaced."""
    if isinstance(f, PearsonDistribution):
        return PearsonDistribution("VII", mu, f.n)
    if isinstance(f, MaximizerDensity):
        return AffineDensity(PearsonDistribution("VII", mu, f.n), math.sqrt(f.scale) * f.root)
    if isinstance(f, AffineDensity) and isinstance(f.base, PearsonDistribution):
        return AffineDensity(PearsonDistribution("VII", mu, f.dimension), f.matrix)
    if isinstance(f, Mixture):
        comps = tuple(_with_mu(c, mu) if c.tail_exponent is not None else c for c in f.components)
        if any(c is None for c in comps):
            return None
        return Mixture(comps, f.weights)
    return None


def tail_safe_proposal(f, power=1.0, weight_degree=0.0):
    """Sampling density for estimating the integral of phi f^power.

    Parameters
    ----------
    f : density
        The density being integrated.
    power : float
        Exponent applied to ``f`` in the integrand.
    weight_degree : float
        Polynomial growth degree of the weight.

    Returns
    -------
    density
        ``f`` itself when the importance ratio has finite variance (always
        for light tails), otherwise a Pearson VII law with the same scale
        matrix and tails heavy enough to make the variance finite.
    """
    d = f.tail_exponent
    if d is None:
        return f
    n = f.dimension
    decay = d * power - weight_degree
    if decay <= n:
        # the integral itself diverges; nothing to fix
        return f
    if 2 * decay - d > n:
        return f
    mu_h = 0.5 * (n / 2 + decay / 2)
    h = _with_mu(f, mu_h)
    return f if h is None else h


# ---------------------------------------------------------------- Monte Carlo core


def _check_terms(values, count):
    if not np.all(np.isfinite(values)):
        raise EstimatorDiverged("non-finite terms in the Monte Carlo average")
    if count >= 1000:
        mags = np.abs(values).sum(axis=0)
        top = np.abs(values).max(axis=0)
        if np.any((mags > 0) & (top > 0.5 * mags)):
            raise EstimatorDiverged("a single sample dominates the Monte Carlo average (heavy tails?)")


def mc_expectation(f, func: Callable, cfg: EstimatorConfig, role=_STREAM_F, proposal=None) -> Expectation:
    """Estimate E_f[func(X)] jointly for every column of ``func``.

    ``func(x, log_f)`` receives sample rows and log f at those rows and
    returns an array of shape (m,) or (m, k).  With a ``proposal`` h the
    draws come from h and are reweighted by f/h.
    """
    h = f if proposal is None else proposal
    x = h.sample(cfg.rng(role), cfg.samples)
    logf = np.asarray(f.logpdf(x))
    vals = np.asarray(func(x, logf))
    vals = vals.reshape(len(x), -1)
    if h is not f:
        vals = vals * np.exp(logf - np.asarray(h.logpdf(x)))[:, None]
    _check_terms(vals, len(x))
    mean = vals.mean(axis=0)
    cov = np.atleast_2d(np.cov(vals, rowvar=False)) / len(x)
    return Expectation(mean, cov, len(x), "monte_carlo")


# ---------------------------------------------------------------- quadrature core


def _bounds(f):
    """Bounding box of the support, or infinite limits."""
    n = f.dimension
    if hasattr(f, "bounds"):
        return f.bounds()
    if isinstance(f, MaximizerDensity) and not f.is_gaussian and f.p > 1:
        r = np.sqrt(f.scale * np.diag(f.C))
        return [(-ri, ri) for ri in r]
    if isinstance(f, PearsonDistribution) and f.family == "II":
        return [(-1.0, 1.0)] * n
    if isinstance(f, AffineDensity) and isinstance(f.base, PearsonDistribution) and f.base.family == "II":
        r = np.sqrt(np.sum(f.matrix**2, axis=1))
        return [(-ri, ri) for ri in r]
    return [(-math.inf, math.inf)] * n


def quad_integral(f, integrand: Callable, cfg: EstimatorConfig):
    """Integrate ``integrand(x_row)`` over the support of ``f`` (n <= 2).

    Returns
    -------
    (value, abs_error, evaluations)
    """
    n = f.dimension
    box = _bounds(f)
    calls = [0]

    def fn1(t):
        calls[0] += 1
        return float(integrand(np.array([[t]]))[0])

    if n == 1:
        a, b = box[0]
        pieces = [(a, 0.0), (0.0, b)]
        total, err = 0.0, 0.0
        for lo, hi in pieces:
            val, e = integrate.quad(fn1, lo, hi, epsabs=1e-13, epsrel=cfg.quad_rtol, limit=400)
            total += val
            err += e
        return total, err, calls[0]
    if n == 2:
        (a0, b0), (a1, b1) = box

        def fn2(y, x):
            calls[0] += 1
            return float(integrand(np.array([[x, y]]))[0])

        val, err = integrate.dblquad(fn2, a0, b0, a1, b1, epsabs=1e-11, epsrel=max(cfg.quad_rtol, 1e-8))
        return val, err, calls[0]
    raise ParameterError("quadrature estimators are limited to n <= 2")


def _use_quadrature(f, cfg):
    if cfg.method == "quadrature":
        return True
    return cfg.method == "auto" and f.dimension == 1


def quad_expectation(f, func: Callable, cfg: EstimatorConfig, k: int) -> Expectation:
    """Quadrature analogue of ``mc_expectation`` for k simultaneous integrals."""
    means, errs, calls = [], [], 0
    for j in range(k):

        def integrand(x, j=j):
            logf = np.asarray(f.logpdf(x))
            if not np.isfinite(logf[0]):
                return np.zeros(1)
            vals = np.asarray(func(x, logf)).reshape(1, -1)[:, j]
            return vals * np.exp(logf)

        val, err, c = quad_integral(f, integrand, cfg)
        means.append(val)
        errs.append(err)
        calls += c
    errs = np.asarray(errs)
    return Expectation(np.asarray(means), np.diag(errs**2), calls, "quadrature")


def expectation(f, func: Callable, cfg: EstimatorConfig, k=1, role=_STREAM_F, power=1.0, weight_degree=0.0):
    """E_f[func] by quadrature or Monte Carlo, picking a tail-safe proposal.

    ``power`` and ``weight_degree`` describe the integrand
    f * func ~ phi f^power for the proposal choice.
    """
    if _use_quadrature(f, cfg):
        return quad_expectation(f, func, cfg, k)
    proposal = tail_safe_proposal(f, power, weight_degree) if cfg.tail_safe else f
    return mc_expectation(f, func, cfg, role=role, proposal=proposal)


# ---------------------------------------------------------------- functionals


def _phi(w, x):
    return np.asarray(weightfn.evaluate(w, x), dtype=float)


_LOG_HUGE = 700.0


def _plogf(p, logf):
    """f^(p-1) with the 0 * inf convention at the edge of the support.

    The exponent is capped at e^700: larger values only occur far in the
    tails, where the density multiplying this factor underflows, and the cap
    keeps that product finite instead of inf * 0.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(np.minimum((p - 1.0) * logf, _LOG_HUGE))
    return np.where(np.isfinite(logf), out, 0.0)


def weighted_power_integral(f, w, p, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """Estimate the integral of phi f^p (an entropy building block)."""
    weightfn.require_real(w)
    ex = expectation(f, lambda x, lf: _phi(w, x) * _plogf(p, lf), cfg, power=p, weight_degree=w.growth_degree)
    return EntropyEstimate(float(ex.mean[0]), float(ex.se[0]), ex.method, ex.count)


def weighted_entropy(f, w, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """h^w(f) = -int phi f log f."""
    weightfn.require_real(w)

    def term(x, lf):
        return np.where(np.isfinite(lf), -_phi(w, x) * np.where(np.isfinite(lf), lf, 0.0), 0.0)

    ex = expectation(f, term, cfg, weight_degree=w.growth_degree)
    return _combine(ex.mean[0], [1.0], ex)


def _limit_wre(f, w, cfg):
    """p -> 1 limit of the weighted Renyi entropy: h^w(f) / E_f[phi]."""

    def terms(x, lf):
        ph = _phi(w, x)
        safe = np.where(np.isfinite(lf), lf, 0.0)
        return np.column_stack([-ph * safe, ph])

    ex = expectation(f, terms, cfg, k=2, weight_degree=w.growth_degree)
    a, b = ex.mean
    if b <= 0:
        raise ZeroIntegral("E_f[phi] vanishes")
    return _combine(a / b, [1.0 / b, -a / b**2], ex)


def weighted_renyi_entropy(f, w, p, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """h^w_p(f) = log(int phi f^p) / (1-p); the limit h^w(f)/E_f[phi] near p = 1."""
    weightfn.require_real(w)
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p}")
    if abs(p - 1.0) < P_LIMIT_BAND:
        return _limit_wre(f, w, cfg)
    ex = expectation(
        f, lambda x, lf: _phi(w, x) * _plogf(p, lf), cfg, power=p, weight_degree=w.growth_degree
    )
    integral = ex.mean[0]
    if not integral > 0:
        raise ZeroIntegral(f"integral of phi f^p is {integral:g}")
    value = math.log(integral) / (1.0 - p)
    return _combine(value, [1.0 / ((1.0 - p) * integral)], ex)


def _log_g_on(g, x, lf):
    lg = np.asarray(g.logpdf(x))
    if np.any(np.isfinite(lf) & ~np.isfinite(lg)):
        raise SupportMismatch("reference density vanishes where the first density has mass")
    return lg


def relative_weighted_entropy(f, g, w, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """int phi f log(f/g); the Kullback-Leibler divergence when phi = 1."""
    weightfn.require_real(w)

    def term(x, lf):
        lg = _log_g_on(g, x, lf)
        ph = _phi(w, x)
        return np.where(np.isfinite(lf), ph * (np.where(np.isfinite(lf), lf, 0.0) - np.where(np.isfinite(lg), lg, 0.0)), 0.0)

    ex = expectation(f, term, cfg, weight_degree=w.growth_degree)
    return _combine(ex.mean[0], [1.0], ex)


def _relative_limit(f, g, w, cfg):
    def terms(x, lf):
        lg = _log_g_on(g, x, lf)
        ph = _phi(w, x)
        d = np.where(np.isfinite(lf), np.where(np.isfinite(lf), lf, 0.0) - np.where(np.isfinite(lg), lg, 0.0), 0.0)
        return np.column_stack([ph * d, ph])

    ex = expectation(f, terms, cfg, k=2, weight_degree=w.growth_degree)
    a, b = ex.mean
    if b <= 0:
        raise ZeroIntegral("E_f[phi] vanishes")
    return _combine(a / b, [1.0 / b, -a / b**2], ex)


def relative_weighted_renyi(f, g, w, p, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """D^w_p(f||g) = log(I1)/(1-p) + log(Ig)/p - log(If)/(p(1-p)).

    I1 = int phi g^(p-1) f, Ig = int phi g^p and If = int phi f^p.  This is
    the three-term decomposition into the cross integral and the weighted
    Renyi entropies of g and f.  Near p = 1 the limit D^w(f||g)/E_f[phi] is
    returned.  ``extras["power"]`` holds exp(D), the relative Renyi power.
    """
    weightfn.require_real(w)
    if not p > 0:
        raise ParameterError(f"p must be positive, got {p}")
    if abs(p - 1.0) < P_LIMIT_BAND:
        est = _relative_limit(f, g, w, cfg)
        return replace(est, extras={"power": _exp(est.value)})
    deg = w.growth_degree

    def f_terms(x, lf):
        ph = _phi(w, x)
        lg = np.asarray(g.logpdf(x))
        if p < 1 and np.any(np.isfinite(lf) & ~np.isfinite(lg) & (ph != 0)):
            raise SupportMismatch("g vanishes where f has mass, so g^(p-1) is infinite")
        return np.column_stack([ph * _plogf(p, lg), ph * _plogf(p, lf)])

    ex_f = expectation(f, f_terms, cfg, k=2, role=_STREAM_F, power=p, weight_degree=deg)
    ex_g = expectation(g, lambda x, lg: _phi(w, x) * _plogf(p, lg), cfg, role=_STREAM_G, power=p, weight_degree=deg)
    i1, i_f = ex_f.mean
    i_g = ex_g.mean[0]
    if min(i1, i_f, i_g) <= 0:
        raise ZeroIntegral("a weighted integral in the relative entropy vanishes")
    value = math.log(i1) / (1 - p) + math.log(i_g) / p - math.log(i_f) / (p * (1 - p))
    g_f = np.array([1.0 / ((1 - p) * i1), -1.0 / (p * (1 - p) * i_f)])
    g_g = 1.0 / (p * i_g)
    if ex_f.method == "monte_carlo" or ex_g.method == "monte_carlo":
        var = float(g_f @ ex_f.cov @ g_f) + g_g**2 * float(ex_g.cov[0, 0])
        err = math.sqrt(max(var, 0.0))
        method = "monte_carlo"
    else:
        err = float(np.abs(g_f) @ ex_f.se + abs(g_g) * ex_g.se[0])
        method = "quadrature"
    return EntropyEstimate(
        value,
        err,
        method,
        ex_f.count + ex_g.count,
        extras={"power": _exp(value), "cross": i1, "integral_f": i_f, "integral_g": i_g},
    )


def _exp(x):
    # a divergent cross integral shows up as a huge divergence; its power is inf
    return math.exp(x) if x < 709.0 else math.inf


def weighted_renyi_power(f, g, w, p, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """N^w_p(f, g) = exp(D^w_p(f||g)), error by the delta method."""
    d = relative_weighted_renyi(f, g, w, p, cfg)
    v = _exp(d.value)
    return EntropyEstimate(v, v * d.error, d.method, d.count)


def csiszar_weighted_divergence(f, g, w, p, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """sign(p-1) int phi (f^p/p + (p-1)/p g^p - f g^(p-1))."""
    weightfn.require_real(w)
    if not p > 0 or p == 1:
        raise ParameterError("p must be positive and different from 1")
    deg = w.growth_degree

    def f_terms(x, lf):
        ph = _phi(w, x)
        lg = np.asarray(g.logpdf(x))
        if p < 1 and np.any(np.isfinite(lf) & ~np.isfinite(lg) & (ph != 0)):
            raise SupportMismatch("g vanishes where f has mass, so g^(p-1) is infinite")
        return ph * (_plogf(p, lf) / p - _plogf(p, lg))

    ex_f = expectation(f, f_terms, cfg, role=_STREAM_F, power=p, weight_degree=deg)
    ex_g = expectation(g, lambda x, lg: _phi(w, x) * _plogf(p, lg), cfg, role=_STREAM_G, power=p, weight_degree=deg)
    sign = 1.0 if p > 1 else -1.0
    value = sign * (ex_f.mean[0] + (p - 1) / p * ex_g.mean[0])
    if ex_f.method == "monte_carlo" or ex_g.method == "monte_carlo":
        err = math.sqrt(ex_f.se[0] ** 2 + ((p - 1) / p) ** 2 * ex_g.se[0] ** 2)
        method = "monte_carlo"
    else:
        err = ex_f.se[0] + abs((p - 1) / p) * ex_g.se[0]
        method = "quadrature"
    return EntropyEstimate(float(value), float(err), method, ex_f.count + ex_g.count)


def weighted_mean(f, w, cfg: EstimatorConfig = EstimatorConfig(), role=_STREAM_F) -> EntropyEstimate:
    """E_f[phi]."""
    ex = expectation(f, lambda x, lf: _phi(w, x), cfg, role=role, weight_degree=w.growth_degree)
    return EntropyEstimate(float(ex.mean[0]), float(ex.se[0]), ex.method, ex.count)


__all__ = [
    "EstimatorConfig",
    "EntropyEstimate",
    "Expectation",
    "tail_safe_proposal",
    "mc_expectation",
    "quad_expectation",
    "expectation",
    "quad_integral",
    "weighted_power_integral",
    "weighted_entropy",
    "weighted_renyi_entropy",
    "relative_weighted_entropy",
    "relative_weighted_renyi",
    "weighted_renyi_power",
    "csiszar_weighted_divergence",
    "weighted_mean",
]
