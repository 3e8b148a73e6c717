"""Checks for the maximum weighted Renyi entropy theorems.

Every check returns an :class:`InequalityReport` whose margin is positive
when the asserted inequality holds.  The comparison density ``f`` is any
density object (see :mod:`wrenyi.distributions`); the maximizer is
g_{p,C} with the same covariance matrix C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import closedforms, weightfn
from .distributions import (
    AffineDensity,
    MaximizerDensity,
    Mixture,
    PearsonDistribution,
    check_spd,
    is_gaussian_exponent,
    sqrtm_spd,
)
from .entropy import EntropyEstimate, EstimatorConfig, expectation, weighted_entropy, weighted_renyi_entropy
from .errors import ParameterError
from .reports import K_DEFAULT, InequalityReport, conjunction

_F, _G = 11, 12


@dataclass(frozen=True)
class MomentMatrix:
    """Weighted second moments psi_ij = E_f[x_i x_j phi] with per-entry errors."""

    entries: np.ndarray
    errors: np.ndarray
    method: str

    @property
    def asymmetry(self):
        return float(np.abs(self.entries - self.entries.T).max())


def _phi(w, x):
    return np.asarray(weightfn.evaluate(w, x), dtype=float)


def moment_matrix(f, w, cfg: EstimatorConfig = EstimatorConfig()) -> MomentMatrix:
    weightfn.require_real(w)
    n = f.dimension

    def func(x, _):
        ph = _phi(w, x)
        return (x[:, :, None] * x[:, None, :]).reshape(len(x), -1) * ph[:, None]

    ex = expectation(f, func, cfg, k=n * n, weight_degree=w.growth_degree + 2)
    return MomentMatrix(ex.mean.reshape(n, n), ex.se.reshape(n, n), ex.method)


def _two_sample(f, g, f_func, g_func, k, cfg, deg):
    ex_f = expectation(f, f_func, cfg, k=k, role=_F, weight_degree=deg)
    ex_g = expectation(g, g_func, cfg, k=k, role=_G, weight_degree=deg)
    return ex_f, ex_g


def _lin(ex, coef):
    c = np.asarray(coef, dtype=float)
    val = float(c @ ex.mean)
    var = float(c @ ex.cov @ c) if ex.method == "monte_carlo" else float(np.abs(c) @ ex.se) ** 2
    return val, var


def _maximizer(p, C):
    return MaximizerDensity(p, check_spd(C))


def check_condition_1(f, w, p, C, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """int_S phi (f - g) + (1-p) beta tr[C^-1 (Psi^f - Psi^g)], <= 0 for p<1 and >= 0 for p>1.

    The f-side integrals are restricted to the support S of g_{p,C}, as in
    the argument that turns this condition into the entropy bound; this is
    the same as the unrestricted form whenever f lives inside S.
    """
    weightfn.require_real(w)
    if is_gaussian_exponent(p):
        raise ParameterError("condition 1 is for p != 1; use check_condition_2")
    g = _maximizer(p, C)
    a = (1 - p) * g.beta

    def terms(x, _):
        ph = _phi(w, x) * g.in_support(x)
        return np.column_stack([ph, ph * g.mahalanobis(x)])

    ex_f, ex_g = _two_sample(f, g, terms, terms, 2, cfg, w.growth_degree + 2)
    vf, var_f = _lin(ex_f, [1.0, a])
    vg, var_g = _lin(ex_g, [1.0, a])
    value = vf - vg
    unc = math.sqrt(var_f + var_g)
    margin = -value if p < 1 else value
    first = ex_f.mean[0] - ex_g.mean[0]
    trace = ex_f.mean[1] - ex_g.mean[1]
    return InequalityReport(
        "condition_1",
        lhs=value,
        rhs=0.0,
        margin=margin,
        uncertainty=unc,
        k=k,
        details={"weight_mass_difference": first, "trace_difference": trace, "coefficient": a, "p": p},
    )


def check_condition_2(f, w, C, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """Both Gaussian-branch conditions: int phi (f - g) >= 0 and int phi log g (f - g) >= 0."""
    weightfn.require_real(w)
    g = MaximizerDensity.gaussian(C)

    def terms(x, _):
        ph = _phi(w, x)
        return np.column_stack([ph, ph * g.logpdf(x)])

    ex_f, ex_g = _two_sample(f, g, terms, terms, 2, cfg, w.growth_degree + 2)
    clauses = []
    for j, name in enumerate(("weight_mass", "weighted_log_density")):
        v = ex_f.mean[j] - ex_g.mean[j]
        unc = math.sqrt(ex_f.se[j] ** 2 + ex_g.se[j] ** 2)
        clauses.append(InequalityReport(name, v, 0.0, v, unc, k=k))
    return conjunction("condition_2", clauses, k=k)


def gaussian_weighted_entropy(w, C, cfg: EstimatorConfig = EstimatorConfig()) -> EntropyEstimate:
    """h^w(N(0, C)) = E[phi] (1/2) log((2 pi)^n det C) + (1/2) E[phi x^T C^-1 x]."""
    C = check_spd(C)
    n = C.shape[0]
    base = 0.5 * (n * math.log(2 * math.pi) + np.linalg.slogdet(C)[1])
    if w.kind == "constant":
        c = w.params["c"]
        return EntropyEstimate(c * (base + n / 2), 0.0, "closed_form", 0)
    if w.kind == "quadratic":
        tr = float(np.trace(C))
        # E[x^T x] = tr C and E[x^T x x^T C^-1 x] = n tr C + 2 tr C
        return EntropyEstimate(tr * base + 0.5 * (n + 2) * tr, 0.0, "closed_form", 0)
    return weighted_entropy(MaximizerDensity.gaussian(C), w, cfg.child(_G))


def check_max_wre(f, w, p, C, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """h^w_p(f) <= h^w_p(g_{p,C}) for p != 1 and h^w(f) <= h^w(g_{1,C}) for p = 1."""
    weightfn.require_real(w)
    C = check_spd(C)
    if is_gaussian_exponent(p):
        lhs = weighted_entropy(f, w, cfg.child(_F))
        rhs = gaussian_weighted_entropy(w, C, cfg)
    else:
        lhs = weighted_renyi_entropy(f, w, p, cfg.child(_F))
        rhs = closedforms.wre_closed(w, p, p, C, cfg.child(_G))
    unc = math.hypot(lhs.error, rhs.error)
    return InequalityReport(
        "max_wre",
        lhs.value,
        rhs.value,
        rhs.value - lhs.value,
        unc,
        k=k,
        details={"lhs_method": lhs.method, "rhs_method": rhs.method, "p": p},
    )


def check_theorem_2_2(f, w, p, C, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """Constraint set under which g_{p,C} maximizes the weighted entropy.

    Clause 1: E_g[phi] <= E_f[phi].
    Clause 2: int_S phi f log(1 + (1-p) beta x^T C^-1 x) compared with
    eta + (1-p) log(A_p) (E_f[phi] - E_g[phi]), <= for p<1 and >= for p>1,
    where eta is the expectation of the rescaled weight times the log term
    under the Pearson law of g_{p,C}.
    """
    weightfn.require_real(w)
    if is_gaussian_exponent(p):
        raise ParameterError("the constraint set is stated for p != 1")
    g = _maximizer(p, C)
    a = (1 - p) * g.beta

    def f_terms(x, _):
        ph = _phi(w, x)
        inside = g.in_support(x)
        arg = np.where(inside, 1.0 + a * g.mahalanobis(x), 1.0)
        with np.errstate(divide="ignore"):
            lg = np.log(arg)
        lg = np.where(np.isfinite(lg), lg, 0.0)
        return np.column_stack([ph, ph * inside * lg])

    ex_f = expectation(f, f_terms, cfg, k=2, role=_F, weight_degree=w.growth_degree + 0.5)
    ex_g = expectation(g, lambda x, _: _phi(w, x), cfg, role=_G, weight_degree=w.growth_degree)
    eta = closedforms.eta_scaled(w, p, C, cfg.child(_G))
    log_a = g.log_normalizer

    e_f, e_g = ex_f.mean[0], ex_g.mean[0]
    d_e = e_f - e_g
    unc_e = math.sqrt(ex_f.se[0] ** 2 + ex_g.se[0] ** 2)
    clause1 = InequalityReport("mean_weight", e_g, e_f, d_e, unc_e, k=k)

    lhs = ex_f.mean[1]
    rhs = eta.value + (1 - p) * log_a * d_e
    # lhs - rhs as a linear function of (E_f phi, E_f[phi log], E_g phi, eta)
    c = (1 - p) * log_a
    var = float(np.array([-c, 1.0]) @ ex_f.cov @ np.array([-c, 1.0])) if ex_f.method == "monte_carlo" else (
        abs(c) * ex_f.se[0] + ex_f.se[1]
    ) ** 2
    var += (c * ex_g.se[0]) ** 2 + eta.error**2
    diff = lhs - rhs
    margin = -diff if p < 1 else diff
    clause2 = InequalityReport("log_moment", lhs, rhs, margin, math.sqrt(var), k=k, details={"eta": eta.value})
    return conjunction(
        "theorem_2_2",
        [clause1, clause2],
        k=k,
        details={"log_normalizer": log_a, "p": p},
        notes=["right side grouped as eta + (1-p) * log(A_p) * (E_f[phi] - E_g[phi])"],
    )


def mixture_lower_bound(
    components: Sequence, weights, w, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT
) -> InequalityReport:
    """h^w_p(sum_i s_i f_i) >= min_i h^w_p(f_i)."""
    mix = Mixture(tuple(components), np.asarray(weights, dtype=float))
    h_mix = weighted_renyi_entropy(mix, w, p, cfg.child(0))
    parts = [weighted_renyi_entropy(c, w, p, cfg.child(i + 1)) for i, c in enumerate(mix.components)]
    worst = min(parts, key=lambda e: e.value)
    return InequalityReport(
        "mixture_lower_bound",
        h_mix.value,
        worst.value,
        h_mix.value - worst.value,
        math.hypot(h_mix.error, worst.error),
        k=k,
        details={"component_values": [e.value for e in parts]},
    )


# ---------------------------------------------------------------- comparison densities


def matched_pearson(family, mu, C) -> AffineDensity:
    """Spherical Pearson law linearly rescaled to have covariance exactly C."""
    C = check_spd(C)
    law = PearsonDistribution(family, mu, C.shape[0])
    m2 = law.second_moment()
    if not math.isfinite(m2):
        raise ParameterError("the Pearson law has no finite covariance")
    return AffineDensity(law, sqrtm_spd(C) / math.sqrt(m2))


def matched_scale_mixture(scales, weights, C) -> Mixture:
    """Gaussian scale mixture sum_k w_k N(0, s_k C) renormalized to covariance C."""
    s = np.asarray(scales, dtype=float)
    wt = np.asarray(weights, dtype=float)
    s = s / float(wt @ s)
    C = check_spd(C)
    return Mixture(tuple(MaximizerDensity.gaussian(si * C) for si in s), wt)


__all__ = [
    "MomentMatrix",
    "moment_matrix",
    "check_condition_1",
    "check_condition_2",
    "check_max_wre",
    "check_theorem_2_2",
    "mixture_lower_bound",
    "gaussian_weighted_entropy",
    "matched_pearson",
    "matched_scale_mixture",
]
