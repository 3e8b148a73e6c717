"""Closed forms for the maximizer family g_{p,C}.

For g = g_{p,C} and a weight phi,

    int phi g^q = varpi(p, q, n) * det(C)^((1-q)/2) * alpha,

where ``varpi`` is a ratio of gamma functions and ``alpha`` is the
expectation of phi(sqrt(s) C^{1/2} Y) under the q-escort Pearson law of
g.  The scale s is 2p/(1-p) - n for p<1 and 2p/(p-1) + n for p>1.  Exact
``alpha`` paths exist for constant, quadratic, product-of-quadratic and
exponential-phase weights; everything else falls back to the estimators of
:mod:`wrenyi.entropy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import specfun, weightfn
from .distributions import (
    MaximizerDensity,
    PearsonDistribution,
    check_spd,
    is_gaussian_exponent,
    min_exponent,
    scale_param,
    sqrtm_spd,
)
from .entropy import P_LIMIT_BAND, EntropyEstimate, EstimatorConfig, expectation
from .errors import DomainError, EstimatorDiverged, ParameterError

_LOG_PI = math.log(math.pi)
_LOG_2 = math.log(2.0)


# ---------------------------------------------------------------- parameters


def epsilon_n(p, n):
    """2(p/(1-p) - n/2), the squared scale of g_{p,C} for p < 1."""
    return 2.0 * (p / (1.0 - p) - n / 2.0)


def xi_n(p, n):
    """2(p/(p-1) + n/2), the squared scale of g_{p,C} for p > 1."""
    return 2.0 * (p / (p - 1.0) + n / 2.0)


def _check_heavy(p, q, n):
    if not min_exponent(n) < p < 1:
        raise ParameterError(f"need n/(n+2) < p < 1, got p={p}, n={n}")
    if not q > (1.0 - p) * n / 2.0:
        raise ParameterError(f"need q > (1-p)n/2 = {(1 - p) * n / 2:.6g}, got q={q}")


def _check_light(p, q):
    if not p > 1:
        raise ParameterError(f"need p > 1, got {p}")
    if not q > 0:
        raise ParameterError(f"need q > 0, got {q}")


def log_varpi_star(p, q, n):
    _check_heavy(p, q, n)
    a = 1.0 / (1.0 - p)
    b = 1.0 / (2.0 * p - n * (1.0 - p))
    return (
        q * specfun.lgamma(a)
        + 0.5 * n * (q - 1) * math.log(b * (1 - p))
        + specfun.lgamma(q * a - n / 2)
        - q * specfun.lgamma(a - n / 2)
        - 0.5 * n * (q - 1) * _LOG_PI
        - specfun.lgamma(q * a)
    )


def varpi_star(p, q, n):
    """Gamma-ratio constant of int g_{p,C}^q for n/(n+2) < p < 1 (``q=p`` gives the shorthand)."""
    return math.exp(log_varpi_star(p, q, n))


def log_varpi(p, q, n):
    _check_light(p, q)
    a = p / (p - 1.0)
    b = 1.0 / (2.0 * p - n * (1.0 - p))
    c = q / (p - 1.0)
    return (
        q * specfun.lgamma(a + n / 2)
        + 0.5 * n * (q - 1) * math.log(b * (p - 1))
        + specfun.lgamma(c + 1)
        - q * specfun.lgamma(a)
        - 0.5 * n * (q - 1) * _LOG_PI
        - specfun.lgamma(n / 2 + c + 1)
    )


def varpi(p, q, n):
    """Gamma-ratio constant of int g_{p,C}^q for p > 1."""
    return math.exp(log_varpi(p, q, n))


def log_varpi_gauss(q, n):
    """Constant of int g_{1,C}^q = (2 pi)^(n(1-q)/2) q^(-n/2) det(C)^((1-q)/2)."""
    if not q > 0:
        raise ParameterError("need q > 0")
    return 0.5 * n * (1 - q) * math.log(2 * math.pi) - 0.5 * n * math.log(q)


def log_varpi_any(p, q, n):
    if is_gaussian_exponent(p):
        return log_varpi_gauss(q, n)
    return log_varpi_star(p, q, n) if p < 1 else log_varpi(p, q, n)


def chi_star_n(p, n):
    """varpi*_n(p) / (Gamma(eps/2) 2^(eps/2 - 1))."""
    e = epsilon_n(p, n)
    return math.exp(log_varpi_star(p, p, n) - specfun.lgamma(e / 2) - (e / 2 - 1) * _LOG_2)


def chi_n(p, n):
    """2^(xi/2) Gamma(xi/2 + 1) varpi_n(p)."""
    x = xi_n(p, n)
    return math.exp(x / 2 * _LOG_2 + specfun.lgamma(x / 2 + 1) + log_varpi(p, p, n))


@dataclass(frozen=True)
class ClosedFormContext:
    """Parameters (p, q, n, C) with the derived scale constants."""

    p: float
    q: float
    n: int
    C: Optional[np.ndarray] = None

    def __post_init__(self):
        if is_gaussian_exponent(self.p):
            if not self.q > 0:
                raise ParameterError("need q > 0")
        elif self.p < 1:
            _check_heavy(self.p, self.q, self.n)
        else:
            _check_light(self.p, self.q)
        if self.C is not None:
            C = check_spd(self.C)
            if C.shape[0] != self.n:
                raise ParameterError("C does not match the dimension")
            object.__setattr__(self, "C", C)

    @property
    def epsilon_n(self):
        return epsilon_n(self.p, self.n)

    @property
    def xi_n(self):
        return xi_n(self.p, self.n)

    @property
    def chi_star_n(self):
        return chi_star_n(self.p, self.n)

    @property
    def chi_n(self):
        return chi_n(self.p, self.n)

    @property
    def log_varpi(self):
        return log_varpi_any(self.p, self.q, self.n)


# ---------------------------------------------------------------- exact alpha helpers


def _hafnian(S, idx):
    """E[prod_k Z_{idx[k]}] for Z ~ N(0, S), by Isserlis' theorem."""
    if not idx:
        return 1.0
    if len(idx) % 2:
        return 0.0
    first, rest = idx[0], idx[1:]
    total = 0.0
    for j in range(len(rest)):
        c = S[first, rest[j]]
        if c != 0.0:
            total += c * _hafnian(S, rest[:j] + rest[j + 1 :])
    return total


def _quadratic_product_moment(S, coords):
    """E[prod_{i in coords} Z_i^2] for Z ~ N(0, S)."""
    idx = tuple(i for i in coords for _ in range(2))
    return _hafnian(S, idx)


def _exact_alpha(w, law: Optional[PearsonDistribution], M, q_gauss=None):
    """Exact E[phi(M Y)] when the weight has a structural closed form, else None.

    ``law`` is the Pearson law of Y; when it is None, Y ~ N(0, I/q_gauss).
    """
    n = M.shape[0]
    if w.kind == "constant":
        return w.params["c"]
    if w.kind == "exp_phase":
        t = w.params["t"]
        z = float(np.linalg.norm(M.T @ t))
        if law is None:
            return math.exp(-0.5 * z * z / q_gauss)
        return _char_function(law, z)
    if w.kind == "product" and all(f.kind == "exp_phase" for f in w.factors):
        return _exact_alpha(weightfn.exp_phase(np.concatenate([f.params["t"] for f in w.factors])), law, M, q_gauss)
    sigma = M @ M.T
    if w.kind == "quadratic":
        tr = float(np.trace(sigma))
        if law is None:
            return tr / q_gauss
        m2 = law.second_moment()
        return math.inf if math.isinf(m2) else tr * m2
    if w.kind == "product" and all(
        f.dimension == 1 and f.kind in ("constant", "quadratic") for f in w.factors
    ):
        coords = [i for i, f in enumerate(w.factors) if f.kind == "quadratic"]
        const = math.prod(f.params["c"] for f in w.factors if f.kind == "constant")
        r = len(coords)
        gauss_moment = _quadratic_product_moment(sigma, coords)
        if law is None:
            return const * gauss_moment / q_gauss**r
        if law.family == "VII":
            half = law.mu - n / 2.0
            if half <= r:
                return math.inf
            inv_moment = math.exp(specfun.lgamma(half - r) - r * _LOG_2 - specfun.lgamma(half))
            return const * gauss_moment * inv_moment
        half = (n + 2 * law.mu + 2) / 2.0
        q_moment = math.exp(r * _LOG_2 + specfun.lgamma(half + r) - specfun.lgamma(half))
        return const * gauss_moment / q_moment
    return None


def _char_function(law: PearsonDistribution, z):
    """E[exp(i s.Y)] for |s| = z under a spherical Pearson law."""
    n = law.n
    if law.family == "VII":
        nu = law.mu - n / 2.0
        if z == 0.0:
            return 1.0
        return specfun.bessel_k_scaled_power(nu, z) / math.exp(specfun.lgamma(nu) + (nu - 1) * _LOG_2)
    nu = law.mu + n / 2.0
    if z == 0.0:
        return 1.0
    return math.exp(specfun.lgamma(nu + 1) + nu * (_LOG_2 - math.log(z))) * specfun.bessel_j(nu, z)


# ---------------------------------------------------------------- alpha


def escort_law(p, q, n) -> Optional[PearsonDistribution]:
    """The Pearson law of the standardized variable under g_{p,C}^q (None for p=1)."""
    if is_gaussian_exponent(p):
        return None
    if p < 1:
        return PearsonDistribution("VII", q / (1.0 - p), n)
    return PearsonDistribution("II", q / (p - 1.0), n)


def escort_expectation(w, p, C, q=None, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """alpha: E[phi(sqrt(s) C^{1/2} Y)] with Y from the q-escort law of g_{p,C}.

    For p = 1 this is E[phi(X)] with X ~ N(0, C/q).  Exact for structural
    weights, otherwise estimated.  Exponential-phase weights give real values
    (characteristic functions of symmetric laws), so only the real part is
    estimated on the Monte Carlo path.
    """
    C = check_spd(C)
    n = C.shape[0]
    if w.dimension != n:
        raise ParameterError(f"weight dimension {w.dimension} does not match C ({n})")
    q = p if q is None else q
    law = escort_law(p, q, n)
    M = sqrtm_spd(C) * (1.0 if law is None else math.sqrt(scale_param(p, n)))
    exact = _exact_alpha(w, law, M, q_gauss=q)
    if exact is not None:
        return EntropyEstimate(float(exact), 0.0, "closed_form", 0)
    if law is None:
        base = MaximizerDensity.gaussian(np.eye(n) / q)
    else:
        base = law
        if law.family == "VII" and 2 * law.mu - w.growth_degree <= n:
            raise EstimatorDiverged("the weight's expectation under the escort law is infinite")

    def func(y, _):
        return np.real(weightfn.evaluate(w, y @ M.T))

    ex = expectation(base, func, cfg, weight_degree=w.growth_degree)
    return EntropyEstimate(float(ex.mean[0]), float(ex.se[0]), ex.method, ex.count)


def alpha_star(w, p, C, cfg: EstimatorConfig = EstimatorConfig(), q=None) -> EntropyEstimate:
    """alpha* for n/(n+2) < p < 1 (Pearson VII escort law)."""
    n = np.atleast_2d(C).shape[0]
    _check_heavy(p, p if q is None else q, n)
    return escort_expectation(w, p, C, q, cfg)


def alpha(w, p, C, cfg: EstimatorConfig = EstimatorConfig(), q=None) -> EntropyEstimate:
    """alpha for p > 1 (Pearson II escort law)."""
    _check_light(p, p if q is None else q)
    return escort_expectation(w, p, C, q, cfg)


def alpha_star_bessel(t, p, C, q=None):
    """alpha* for phi(x) = exp(i t.x): K_nu(z) z^nu / (Gamma(nu) 2^(nu-1)).

    z = |sqrt(eps) C^{1/2} t| and nu = q/(1-p) - n/2 (eps/2 when q = p).
    """
    C = check_spd(C)
    n = C.shape[0]
    q = p if q is None else q
    _check_heavy(p, q, n)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (n,):
        raise ParameterError("t must have one entry per dimension")
    z = float(np.linalg.norm(math.sqrt(epsilon_n(p, n)) * (sqrtm_spd(C) @ t)))
    return _char_function(PearsonDistribution("VII", q / (1 - p), n), z)


def alpha_bessel_j(t, p, C, q=None):
    """alpha for phi(x) = exp(i t.x): Gamma(nu+1) 2^nu J_nu(z) z^-nu.

    z = |sqrt(xi) C^{1/2} t| and nu = q/(p-1) + n/2 (xi/2 when q = p).
    """
    C = check_spd(C)
    n = C.shape[0]
    q = p if q is None else q
    _check_light(p, q)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (n,):
        raise ParameterError("t must have one entry per dimension")
    z = float(np.linalg.norm(math.sqrt(xi_n(p, n)) * (sqrtm_spd(C) @ t)))
    return _char_function(PearsonDistribution("II", q / (p - 1), n), z)


# ---------------------------------------------------------------- eta


def eta_star_quadratic(mu, n):
    """E[x^T x log(1 + x^T x)] under Pearson VII(mu), mu > n/2 + 1."""
    if not mu > n / 2 + 1:
        raise ParameterError(f"need mu > n/2 + 1 = {n / 2 + 1}, got {mu}")
    return n / (2 * mu - n - 2) * (specfun.digamma(mu) - specfun.digamma(mu - n / 2 - 1))


def eta_quadratic(mu, n):
    """E[x^T x log(1 - x^T x)] under Pearson II(mu), mu > -1 (negative)."""
    if not mu > -1:
        raise ParameterError(f"need mu > -1, got {mu}")
    return n / (2 * mu + n + 2) * (specfun.digamma(mu + 1) - specfun.digamma(mu + n / 2 + 2))


def eta_log(mu, n):
    """E[log(x^T x) log(1 - x^T x)] under Pearson II(mu), mu > -1."""
    if not mu > -1:
        raise ParameterError(f"need mu > -1, got {mu}")
    a = specfun.digamma(mu + n / 2 + 1)
    return (specfun.digamma(mu + 1) - a) * (specfun.digamma(n / 2) - a) - specfun.trigamma(mu + n / 2 + 1)


def eta_star_constant(mu, n):
    """E[log(1 + x^T x)] under Pearson VII(mu)."""
    if not mu > n / 2:
        raise ParameterError(f"need mu > n/2, got {mu}")
    return specfun.digamma(mu) - specfun.digamma(mu - n / 2)


def eta_constant(mu, n):
    """E[log(1 - x^T x)] under Pearson II(mu)."""
    if not mu > -1:
        raise ParameterError(f"need mu > -1, got {mu}")
    return specfun.digamma(mu + 1) - specfun.digamma(mu + n / 2 + 1)


def eta_mc(w, law: PearsonDistribution, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """E[phi(Y) log(1 +- Y^T Y)] under a Pearson law, by the generic estimator."""
    sign = 1.0 if law.family == "VII" else -1.0

    def func(y, _):
        t = np.einsum("ij,ij->i", y, y)
        with np.errstate(divide="ignore"):
            return np.real(weightfn.evaluate(w, y)) * np.log1p(sign * t)

    ex = expectation(law, func, cfg, weight_degree=w.growth_degree + 0.5)
    return EntropyEstimate(float(ex.mean[0]), float(ex.se[0]), ex.method, ex.count)


def eta_scaled(w, p, C, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """E[rho(Y) log(1 +- Y^T Y)] with rho(y) = phi(sqrt(s) C^{1/2} y), Y ~ the law of g_{p,C}.

    This is the eta term with the rescaled weight; exact for constant and
    quadratic weights.
    """
    C = check_spd(C)
    n = C.shape[0]
    if is_gaussian_exponent(p):
        raise ParameterError("eta terms are defined for p != 1")
    s = scale_param(p, n)
    law = PearsonDistribution("VII", 1 / (1 - p), n) if p < 1 else PearsonDistribution("II", 1 / (p - 1), n)
    if w.kind == "constant":
        c = w.params["c"]
        v = eta_star_constant(law.mu, n) if p < 1 else eta_constant(law.mu, n)
        return EntropyEstimate(c * v, 0.0, "closed_form", 0)
    if w.kind == "quadratic":
        if p < 1 and not law.mu > n / 2 + 1:
            return EntropyEstimate(math.inf, 0.0, "closed_form", 0)
        v = eta_star_quadratic(law.mu, n) if p < 1 else eta_quadratic(law.mu, n)
        return EntropyEstimate(s * float(np.trace(C)) / n * v, 0.0, "closed_form", 0)
    rho = weightfn.scaled_weight(w, s, sqrtm_spd(C))
    return eta_mc(rho, law, cfg)


# ---------------------------------------------------------------- closed-form WRE


def log_weighted_integral(w, p, q, C, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """log of int phi g_{p,C}^q = log varpi + (1-q)/2 log det C + log alpha."""
    C = check_spd(C)
    n = C.shape[0]
    lv = log_varpi_any(p, q, n)
    a = escort_expectation(w, p, C, q, cfg)
    if not a.value > 0:
        raise DomainError(f"alpha = {a.value:g} is not positive; the log is undefined")
    logdet = float(np.linalg.slogdet(C)[1])
    value = lv + 0.5 * (1 - q) * logdet + math.log(a.value)
    return EntropyEstimate(value, a.error / a.value, a.method, a.count, extras={"alpha": a, "log_varpi": lv})


def wre_closed(w, p, q, C, cfg: EstimatorConfig = EstimatorConfig(), n=None) -> EntropyEstimate:
    """Weighted Renyi entropy of order q of g_{p,C} from the closed form.

    (1/(1-q)) log varpi + (1/2) log det C + (1/(1-q)) log alpha.  For
    |q - 1| < 1e-6 the limit h^w(g)/E_g[phi] is returned.
    """
    weightfn.require_real(w)
    C = check_spd(C)
    if n is not None and n != C.shape[0]:
        raise ParameterError("n does not match C")
    if abs(q - 1.0) < P_LIMIT_BAND:
        return _wre_closed_limit(w, p, C, cfg)
    li = log_weighted_integral(w, p, q, C, cfg)
    value = li.value / (1 - q)
    return EntropyEstimate(value, li.error / abs(1 - q), li.method, li.count, extras=li.extras)


def _wre_closed_limit(w, p, C, cfg):
    g = MaximizerDensity(p, C)
    n = g.n
    if is_gaussian_exponent(p):
        if w.kind == "constant":
            return EntropyEstimate(-g.log_normalizer + n / 2, 0.0, "closed_form", 0)
        from .entropy import weighted_renyi_entropy

        return weighted_renyi_entropy(g, w, 1.0, cfg)
    a = escort_expectation(w, p, C, 1.0, cfg)
    eta = eta_scaled(w, p, C, cfg)
    if p < 1:
        value = -g.log_normalizer + eta.value / ((1 - p) * a.value)
    else:
        value = -g.log_normalizer - eta.value / ((p - 1) * a.value)
    err = abs(1 / ((1 - p) * a.value)) * eta.error + abs(eta.value / ((1 - p) * a.value**2)) * a.error
    method = "closed_form" if a.method == eta.method == "closed_form" else "monte_carlo"
    return EntropyEstimate(value, err, method, a.count + eta.count)


def wre_is_finite(w, p, q, n):
    """Whether int phi g_{p,C}^q is finite for a weight of polynomial growth."""
    if is_gaussian_exponent(p) or p > 1:
        return True
    mu = q / (1 - p)
    return 2 * mu - w.growth_degree > n


__all__ = [
    "ClosedFormContext",
    "epsilon_n",
    "xi_n",
    "chi_star_n",
    "chi_n",
    "varpi_star",
    "varpi",
    "log_varpi_star",
    "log_varpi",
    "log_varpi_gauss",
    "log_varpi_any",
    "escort_law",
    "escort_expectation",
    "alpha_star",
    "alpha",
    "alpha_star_bessel",
    "alpha_bessel_j",
    "eta_star_quadratic",
    "eta_quadratic",
    "eta_log",
    "eta_star_constant",
    "eta_constant",
    "eta_mc",
    "eta_scaled",
    "log_weighted_integral",
    "wre_closed",
    "wre_is_finite",
]
