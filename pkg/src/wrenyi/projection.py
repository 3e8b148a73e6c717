"""Closest Student-type maximizer to a mixture of maximizers.

A degree-nu component is the spherical density proportional to
(1 + z^T z)^{-(nu+n)/2}, i.e. Pearson VII with parameter (nu+n)/2.  For it
E[log(1 + Z^T Z)] = Delta_n(nu), which is what makes the root solve below
meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import specfun, weightfn
from .distributions import Mixture, PearsonDistribution, validate_simplex
from .entropy import EntropyEstimate, EstimatorConfig, expectation
from .errors import BracketError, ParameterError

P_MIN, P_MAX = 1e-8, 1e8
MAX_ITER = 200
RESIDUAL_TOL = 1e-10


def delta_n(p, n: int) -> float:
    """Digamma difference psi((p+n)/2) - psi(p/2).

    Whole steps of the recurrence psi(x+1) = psi(x) + 1/x are summed
    directly, so even n needs no digamma at all and odd n only one
    half-step difference.
    """
    p = float(p)
    if not p > 0:
        raise ParameterError(f"delta_n needs p > 0, got {p}")
    n = int(n)
    if n < 1:
        raise ParameterError("dimension must be positive")
    half = 0.0
    x = p / 2
    if n % 2:
        half = specfun.digamma.scalar(x + 0.5) - specfun.digamma.scalar(x)
        x += 0.5
    steps = n // 2
    return half + math.fsum(1.0 / (x + j) for j in range(steps))


def delta_n_derivative(p, n: int) -> float:
    """d/dp Delta_n(p) = (psi'((p+n)/2) - psi'(p/2)) / 2, which is negative."""
    p = float(p)
    if not p > 0:
        raise ParameterError(f"delta_n needs p > 0, got {p}")
    x = p / 2
    half = 0.0
    if n % 2:
        half = 0.5 * (specfun.trigamma.scalar(x + 0.5) - specfun.trigamma.scalar(x))
        x += 0.5
    return half - 0.5 * math.fsum(1.0 / (x + j) ** 2 for j in range(n // 2))


def degree_to_exponent(p_x: int, n: int) -> float:
    """Renyi exponent (p_x + n - 2)/(p_x + n) of the maximizer behind a degree-p_x law."""
    if int(p_x) != p_x or p_x % 2 != 1 or p_x < 3:
        raise ParameterError(f"degree must be an odd integer >= 3, got {p_x}")
    if n < 1:
        raise ParameterError("dimension must be positive")
    return (p_x + n - 2) / (p_x + n)


def degree_component(nu, n) -> PearsonDistribution:
    """Unscaled degree-nu law, proportional to (1 + z^T z)^{-(nu+n)/2}."""
    if not nu > 0:
        raise ParameterError("degree must be positive")
    return PearsonDistribution("VII", (nu + n) / 2, n)


@dataclass(frozen=True)
class MixtureSpec:
    """Mixture sum_k weights[k] g_{degrees[k]} of unscaled degree laws in dimension n."""

    weights: tuple
    degrees: tuple
    dimension: int

    def __post_init__(self):
        w = validate_simplex(self.weights)
        d = tuple(int(v) for v in self.degrees)
        if len(d) != len(w):
            raise ParameterError("weights and degrees differ in length")
        for v, raw in zip(d, self.degrees):
            if v != raw or v < 1 or v % 2 != 1:
                raise ParameterError(f"component degrees must be odd positive integers, got {raw}")
        if int(self.dimension) < 1:
            raise ParameterError("dimension must be positive")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "degrees", d)
        object.__setattr__(self, "dimension", int(self.dimension))

    @classmethod
    def single(cls, degree, n):
        return cls((1.0,), (degree,), n)

    def components(self):
        return [degree_component(v, self.dimension) for v in self.degrees]

    def density(self) -> Mixture:
        return Mixture(tuple(self.components()), np.asarray(self.weights))

    @classmethod
    def from_dict(cls, spec):
        return cls(tuple(spec["weights"]), tuple(spec["degrees"]), spec["dimension"])

    def to_dict(self):
        return {"weights": list(self.weights), "degrees": list(self.degrees), "dimension": self.dimension}


def _log1p_norm(x):
    return np.log1p(np.einsum("ij,ij->i", x, x))


def _ratio(num, den, var_num, var_den, cov):
    r = num / den
    var = (var_num - 2 * r * cov + r * r * var_den) / den**2
    return r, math.sqrt(max(var, 0.0))


def mixture_target(mix: MixtureSpec, w, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """sum_k a_k E_k[phi log(1+Z^T Z)] / sum_k a_k E_k[phi], one sample stream per component."""
    weightfn.require_real(w)
    if w.dimension != mix.dimension:
        raise ParameterError("weight dimension does not match the mixture")

    def terms(z, _):
        ph = np.asarray(weightfn.evaluate(w, z), dtype=float)
        return np.column_stack([ph, ph * _log1p_norm(z)])

    mean = np.zeros(2)
    cov = np.zeros((2, 2))
    count = 0
    method = "quadrature"
    for k, (a, comp) in enumerate(zip(mix.weights, mix.components())):
        if a == 0:
            continue
        ex = expectation(comp, terms, cfg.child(k), k=2, weight_degree=w.growth_degree + 0.5)
        mean += a * ex.mean
        cov += a * a * ex.cov
        count += ex.count
        if ex.method == "monte_carlo":
            method = "monte_carlo"
    value, err = _ratio(mean[1], mean[0], cov[1, 1], cov[0, 0], cov[0, 1])
    return EntropyEstimate(value, err, method, count, {"weight_mass": mean[0], "weighted_log_moment": mean[1]})


def equivalent_target(mix: MixtureSpec, w, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """E_{g_Z}[phi log(1+Z^T Z)] / E_{g_Z}[phi] integrated against the mixture density as a whole.

    The balance E_{g_p*}[log(1+X^T X)] E_{g_Z}[phi] = E_{g_Z}[phi log(1+X^T X)]
    is this ratio set equal to Delta_n(p*).
    """
    weightfn.require_real(w)

    def terms(z, _):
        ph = np.asarray(weightfn.evaluate(w, z), dtype=float)
        return np.column_stack([ph, ph * _log1p_norm(z)])

    ex = expectation(mix.density(), terms, cfg, k=2, weight_degree=w.growth_degree + 0.5)
    value, err = _ratio(ex.mean[1], ex.mean[0], ex.cov[1, 1], ex.cov[0, 0], ex.cov[0, 1])
    return EntropyEstimate(value, err, ex.method, ex.count)


def optimality_residual(p_star, mix: MixtureSpec, w, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """E_{g_p*}[log(1+X^T X)] E_{g_Z}[phi] - E_{g_Z}[phi log(1+X^T X)], every term estimated."""
    n = mix.dimension
    log_moment = expectation(degree_component(p_star, n), lambda x, _: _log1p_norm(x), cfg.child(1), weight_degree=0.5)

    def terms(z, _):
        ph = np.asarray(weightfn.evaluate(w, z), dtype=float)
        return np.column_stack([ph, ph * _log1p_norm(z)])

    ex = expectation(mix.density(), terms, cfg.child(2), k=2, weight_degree=w.growth_degree + 0.5)
    lm = float(log_moment.mean[0])
    value = lm * ex.mean[0] - ex.mean[1]
    g = np.array([lm, -1.0])
    var = float(g @ ex.cov @ g) + (ex.mean[0] * log_moment.se[0]) ** 2
    return EntropyEstimate(value, math.sqrt(max(var, 0.0)), ex.method, ex.count + log_moment.count)


@dataclass(frozen=True)
class PStarResult:
    p_star: float
    target: float
    residual: float
    iterations: int
    p_star_error: float = 0.0
    target_error: float = 0.0

    def to_dict(self):
        return {
            "p_star": self.p_star,
            "p_star_error": self.p_star_error,
            "target": self.target,
            "target_error": self.target_error,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def solve_p_star(target, n: int, target_error: float = 0.0) -> PStarResult:
    """Unique p* with Delta_n(p*) = target, by bisection on log p.

    The bracket starts at [1/2, 2] and is widened by factors of ten up to
    [1e-8, 1e8].  A standard error for the target is propagated through
    the derivative of Delta_n.
    """
    t = float(target)
    if not (t > 0 and math.isfinite(t)):
        raise BracketError(f"target must be positive and finite, got {target}")
    lo, hi = 0.5, 2.0
    while delta_n(lo, n) < t:
        if lo <= P_MIN:
            raise BracketError(f"target {t} exceeds Delta_{n}({P_MIN})")
        lo = max(lo / 10, P_MIN)
    while delta_n(hi, n) > t:
        if hi >= P_MAX:
            raise BracketError(f"target {t} is below Delta_{n}({P_MAX})")
        hi = min(hi * 10, P_MAX)
    a, b = math.log(lo), math.log(hi)
    it = 0
    while it < MAX_ITER:
        it += 1
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        if delta_n(math.exp(m), n) > t:
            a = m
        else:
            b = m
    candidates = [math.exp(a), math.exp(b)]
    p = min(candidates, key=lambda v: abs(delta_n(v, n) - t))
    residual = abs(delta_n(p, n) - t)
    if residual > RESIDUAL_TOL * max(1.0, t):
        raise BracketError(f"bisection stalled with residual {residual:.3e}")
    err = abs(target_error / delta_n_derivative(p, n)) if target_error else 0.0
    return PStarResult(p, t, residual, it, err, float(target_error))


def closest_degree(mix: MixtureSpec, w, cfg: EstimatorConfig = EstimatorConfig()) -> PStarResult:
    """mixture_target followed by solve_p_star."""
    est = mixture_target(mix, w, cfg)
    return solve_p_star(est.value, mix.dimension, est.error)


__all__ = [
    "delta_n",
    "delta_n_derivative",
    "degree_to_exponent",
    "degree_component",
    "MixtureSpec",
    "mixture_target",
    "equivalent_target",
    "optimality_residual",
    "PStarResult",
    "solve_p_star",
    "closest_degree",
]
