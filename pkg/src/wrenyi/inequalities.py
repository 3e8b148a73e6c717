"""Determinant inequalities obtained from weighted Renyi entropy bounds.

Every check returns a report whose margin is positive when the asserted
inequality holds.  Closed-form terms carry zero uncertainty; Monte Carlo
terms carry their standard errors through the delta method.  When a check
has a hypothesis, the headline verdict is the conclusion's and the
hypothesis is reported as a clause.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import closedforms as cf
from . import specfun, weightfn
from .distributions import (
    MaximizerDensity,
    PearsonDistribution,
    check_spd,
    is_gaussian_exponent,
    marginal_of,
    marginal_params,
    min_exponent,
    scale_param,
    sqrtm_spd,
)
from .entropy import EntropyEstimate, EstimatorConfig, expectation, mc_expectation, weighted_renyi_entropy, _bounds
from .errors import DegenerateInput, DomainError, ParameterError, RankError
from .reports import K_DEFAULT, InequalityReport

_LOG_2 = math.log(2.0)

# p = 2/3, n = 2 constant on the right of the 2x2 Bessel inequality
BESSEL_2X2_CONSTANT = math.log(3 * math.pi ** (2 / 3) / 4)


@dataclass(frozen=True)
class BlockPartition:
    """Split of n coordinates into a leading block of n1 and a trailing block of n2."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ParameterError("both blocks must be nonempty")

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def first(self):
        return list(range(self.n1))

    @property
    def second(self):
        return list(range(self.n1, self.n))

    def blocks(self, C):
        C = np.asarray(C, dtype=float)
        if C.shape != (self.n, self.n):
            raise ParameterError(f"matrix shape {C.shape} does not match the partition ({self.n})")
        a, b = self.n1, self.n
        return C[:a, :a], C[:a, a:b], C[a:b, :a], C[a:b, a:b]

    def diagonal_blocks(self, C):
        c11, _, _, c22 = self.blocks(C)
        return c11, c22

    def split(self, x):
        x = np.asarray(x)
        return x[..., : self.n1], x[..., self.n1 :]


@dataclass
class HadamardReport(InequalityReport):
    """Inequality report with the named additive terms of the Hadamard-type bound."""

    terms: dict = field(default_factory=dict)

    @property
    def total_margin(self):
        return self.margin

    def to_dict(self):
        out = super().to_dict()
        out["terms"] = {k: float(v) for k, v in self.terms.items()}
        return out


def _log_alpha(est: EntropyEstimate, label):
    if math.isinf(est.value):
        raise DomainError(f"{label} is infinite: the weight's moment does not exist under this law")
    if not est.value > 0:
        raise DomainError(f"{label} = {est.value:g} is not positive; its log is undefined")
    return math.log(est.value), est.error / est.value


def _branch_alpha(w, p, C, cfg, q=None):
    return cf.alpha_star(w, p, C, cfg, q) if p < 1 else cf.alpha(w, p, C, cfg, q)


def _joint_weight(factors):
    factors = list(factors)
    if all(f.kind == "exp_phase" for f in factors):
        return weightfn.exp_phase(np.concatenate([f.params["t"] for f in factors]))
    if all(f.kind == "constant" for f in factors):
        return weightfn.constant(math.prod(f.params["c"] for f in factors), sum(f.dimension for f in factors))
    return weightfn.product(factors)


def _check_branch(p, n):
    if is_gaussian_exponent(p):
        raise ParameterError("the bound is stated for p != 1")
    if p < 1 and not max(1 / 3, min_exponent(n)) < p:
        raise ParameterError(f"p must lie in (max(1/3, n/(n+2)), 1), got {p}")


# ---------------------------------------------------------------- Hadamard


def hadamard_terms(C, w_factors: Sequence, p, cfg: EstimatorConfig = EstimatorConfig()):
    """The four additive terms of the Hadamard-type bound, with their variances."""
    C = check_spd(C)
    n = C.shape[0]
    factors = list(w_factors)
    if len(factors) != n or any(f.dimension != 1 for f in factors):
        raise ParameterError("one univariate weight factor per coordinate is required")
    _check_branch(p, n)
    lv1 = cf.log_varpi_star(p, p, 1) if p < 1 else cf.log_varpi(p, p, 1)
    lvn = cf.log_varpi_star(p, p, n) if p < 1 else cf.log_varpi(p, p, n)
    diag = np.diag(C)
    marg, var = 0.0, 0.0
    for i, f in enumerate(factors):
        a = _branch_alpha(f, p, diag[i : i + 1, None], cfg.child(i + 1))
        la, rel = _log_alpha(a, f"marginal alpha {i}")
        marg += lv1 + la
        var += rel**2
    joint = _branch_alpha(_joint_weight(factors), p, C, cfg.child(0))
    lj, rel = _log_alpha(joint, "joint alpha")
    var += rel**2
    logdet = float(np.linalg.slogdet(C)[1])
    terms = {
        "log_diagonal": 0.5 * (1 - p) * float(np.sum(np.log(diag))),
        "marginal_terms": marg,
        "log_det": -0.5 * (1 - p) * logdet,
        "joint_term": -(lvn + lj),
    }
    return terms, var


def check_hadamard(C, w_factors: Sequence, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> HadamardReport:
    """Weighted Hadamard-type bound for g_{p,C} and its one-dimensional counterparts.

    The sum of the four terms is asserted to be >= 0 for p < 1.  For p > 1
    the same expression with type II quantities is <= 0 (the entropy
    inequality is multiplied by 1 - p < 0), so the margin is minus the sum.
    Equality is asserted for diagonal C.
    """
    terms, var = hadamard_terms(C, w_factors, p, cfg)
    total = math.fsum(terms.values())
    margin = total if p < 1 else -total
    n = np.shape(C)[0]
    lv1 = cf.log_varpi_star(p, p, 1) if p < 1 else cf.log_varpi(p, p, 1)
    lvn = cf.log_varpi_star(p, p, n) if p < 1 else cf.log_varpi(p, p, n)
    return HadamardReport(
        "hadamard",
        lhs=total,
        rhs=0.0,
        margin=margin,
        uncertainty=math.sqrt(var),
        k=k,
        terms=terms,
        details={"p": p, "constant_gap": n * lv1 - lvn},
    )


def _bessel_log_factor(p, n, z):
    """log(varpi alpha) for a phase weight with |argument| = z, via the Bessel closed forms."""
    if p < 1:
        nu = cf.epsilon_n(p, n) / 2
        log_chi = cf.log_varpi_star(p, p, n) - specfun.lgamma.scalar(nu) - (nu - 1) * _LOG_2
        if z == 0.0:
            return log_chi + specfun.lgamma.scalar(nu) + (nu - 1) * _LOG_2
        val = specfun.bessel_k_scaled_power(nu, z)
        return log_chi + math.log(val)
    nu = cf.xi_n(p, n) / 2
    log_chi = nu * _LOG_2 + specfun.lgamma.scalar(nu + 1) + cf.log_varpi(p, p, n)
    if z == 0.0:
        return log_chi - nu * _LOG_2 - specfun.lgamma.scalar(nu + 1)
    j = specfun.bessel_j(nu, z)
    if not j > 0:
        raise DomainError(f"J_{nu:g}({z:g}) = {j:g} is not positive; the log is undefined")
    return log_chi + math.log(j) - nu * math.log(z)


def check_hadamard_bessel(C, t, p, k=K_DEFAULT) -> InequalityReport:
    """Hadamard-type bound for phase weights exp(i t_j x_j), evaluated through Bessel functions.

    p < 1 uses chi* K_{eps/2}(z) z^{eps/2}; p > 1 uses chi J_{xi/2}(z) z^{-xi/2}.
    Non-positive J values make the bound undefined and raise DomainError.
    """
    C = check_spd(C)
    n = C.shape[0]
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (n,) or not np.all(np.isfinite(t)):
        raise ParameterError("t must be a finite vector with one entry per dimension")
    _check_branch(p, n)
    diag = np.diag(C)
    s1, sn = scale_param(p, 1), scale_param(p, n)
    marg = 0.0
    for i in range(n):
        z = math.sqrt(s1 * diag[i]) * abs(t[i])
        try:
            marg += _bessel_log_factor(p, 1, z)
        except DomainError as exc:
            raise DomainError(f"marginal factor {i}: {exc}") from None
    z = float(np.linalg.norm(math.sqrt(sn) * (sqrtm_spd(C) @ t)))
    try:
        joint = _bessel_log_factor(p, n, z)
    except DomainError as exc:
        raise DomainError(f"joint factor: {exc}") from None
    logdet = float(np.linalg.slogdet(C)[1])
    terms = {
        "log_diagonal": 0.5 * (1 - p) * float(np.sum(np.log(diag))),
        "marginal_terms": marg,
        "log_det": -0.5 * (1 - p) * logdet,
        "joint_term": -joint,
    }
    total = math.fsum(terms.values())
    return HadamardReport(
        "hadamard_bessel",
        lhs=total,
        rhs=0.0,
        margin=total if p < 1 else -total,
        uncertainty=0.0,
        k=k,
        terms=terms,
        details={"p": p, "t": t.tolist()},
    )


def bessel_2x2_inequality(C, t, k=K_DEFAULT) -> InequalityReport:
    """The 2x2 instance at p = 2/3 with its stated right-hand constant log(3 pi^(2/3) / 4).

    Left side: (1/6) log(C11 C22 / det C)
    + log[prod_i K_{3/2}(sqrt(3 C_ii)|t_i|) (sqrt(3 C_ii)|t_i|)^{3/2}
          / (K_1(|sqrt(2) C^{1/2} t|) |sqrt(2) C^{1/2} t|)].
    """
    C = check_spd(C)
    if C.shape != (2, 2):
        raise ParameterError("the 2x2 instance needs a 2x2 matrix")
    t = np.asarray(t, dtype=float).reshape(2)
    lhs = math.log(C[0, 0] * C[1, 1] / np.linalg.det(C)) / 6
    for i in range(2):
        z = math.sqrt(3 * C[i, i]) * abs(t[i])
        lhs += math.log(specfun.bessel_k_scaled_power(1.5, z)) if z > 0 else math.log(math.sqrt(math.pi / 2))
    z = float(np.linalg.norm(math.sqrt(2) * (sqrtm_spd(C) @ t)))
    lhs -= math.log(specfun.bessel_k_scaled_power(1.0, z)) if z > 0 else 0.0
    general = check_hadamard_bessel(C, t, 2 / 3, k=k)
    return InequalityReport(
        "hadamard_bessel_2x2",
        lhs=lhs,
        rhs=BESSEL_2X2_CONSTANT,
        margin=lhs - BESSEL_2X2_CONSTANT,
        uncertainty=0.0,
        k=k,
        details={"general_margin": general.margin, "assembly_gap": (lhs - BESSEL_2X2_CONSTANT) - general.margin},
    )


# ---------------------------------------------------------------- subadditivity


def _wre(f, w, p, cfg):
    if isinstance(f, MaximizerDensity):
        return cf.wre_closed(w, f.p, p, f.C, cfg)
    return weighted_renyi_entropy(f, w, p, cfg)


def check_subadditivity(f, marginals, w_product, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """h_p(f) <= sum_i h_p(f_i) for a product weight, with the hypothesis integral as a clause.

    The hypothesis is int prod_i phi_i f_i^{p-1} (f - prod_i f_i) <= 0
    (>= 0 for p > 1); its second part factorizes into one-dimensional
    integrals.  Missing marginals are taken from the family when it
    provides them and otherwise integrated out numerically (n <= 3).
    """
    n = f.dimension
    factors = list(weightfn.product_factors(w_product))
    if len(factors) != n or any(fac.dimension != 1 for fac in factors):
        raise ParameterError("the weight must be a product of n univariate factors")
    if is_gaussian_exponent(p):
        raise ParameterError("subadditivity is checked for p != 1")
    if marginals is None:
        box = _bounds(f)
        marginals = [marginal_of(f, i, box) for i in range(n)]
    marginals = list(marginals)
    if len(marginals) != n:
        raise ParameterError("one marginal per coordinate is required")

    # hypothesis
    tails = [m.tail_exponent for m in marginals if m.tail_exponent is not None]
    extra = (1 - p) * sum(tails) if p < 1 else 0.0

    def joint_terms(x, _):
        val = np.ones(len(x))
        for i, (fac, m) in enumerate(zip(factors, marginals)):
            xi = x[:, i : i + 1]
            val = val * np.real(weightfn.evaluate(fac, xi)) * np.exp((p - 1) * np.asarray(m.logpdf(xi)))
        return val

    ex = expectation(f, joint_terms, cfg.child(0), weight_degree=w_product.growth_degree + extra)
    prod_val, prod_rel2 = 1.0, 0.0
    parts = []
    for i, (fac, m) in enumerate(zip(factors, marginals)):
        a = expectation(m, lambda x, lf, fac=fac: np.real(weightfn.evaluate(fac, x)) * np.exp((p - 1) * lf),
                        cfg.child(10 + i), power=p, weight_degree=fac.growth_degree)
        parts.append(float(a.mean[0]))
        prod_val *= a.mean[0]
        prod_rel2 += (a.se[0] / a.mean[0]) ** 2 if a.mean[0] else 0.0
    hyp_value = float(ex.mean[0] - prod_val)
    hyp_unc = math.sqrt(ex.se[0] ** 2 + prod_val**2 * prod_rel2)
    hypothesis = InequalityReport(
        "hypothesis", ex.mean[0], prod_val, -hyp_value if p < 1 else hyp_value, hyp_unc, k=k
    )

    lhs = _wre(f, w_product, p, cfg.child(1))
    rhs_parts = [_wre(m, fac, p, cfg.child(20 + i)) for i, (fac, m) in enumerate(zip(factors, marginals))]
    rhs = math.fsum(r.value for r in rhs_parts)
    unc = math.sqrt(lhs.error**2 + sum(r.error**2 for r in rhs_parts))
    conclusion = InequalityReport("conclusion", lhs.value, rhs, rhs - lhs.value, unc, k=k)
    notes = []
    if hypothesis.verdict == "holds" and conclusion.verdict == "violated":
        notes.append("hypothesis holds but the conclusion fails")
    return InequalityReport(
        "subadditivity",
        lhs.value,
        rhs,
        conclusion.margin,
        conclusion.uncertainty,
        k=k,
        clauses=[hypothesis, conclusion],
        details={"p": p, "marginal_entropies": [r.value for r in rhs_parts]},
        notes=notes,
    )


def check_block_subadditivity(
    C, partition: BlockPartition, w1, w2, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT
) -> InequalityReport:
    """h_p(g_{p,C}) <= h_p(g_{p_1,C_11}) + h_p(g_{p_2,C_22}), all from the closed forms.

    The blocks of X ~ g_{p,C} follow g_{p_j, C_jj} with p_j from
    marginal_params; each block entropy has order p.
    """
    C = check_spd(C)
    if C.shape[0] != partition.n:
        raise ParameterError("partition does not match C")
    if w1.dimension != partition.n1 or w2.dimension != partition.n2:
        raise ParameterError("block weights do not match the partition")
    if is_gaussian_exponent(p):
        raise ParameterError("block subadditivity is checked for p != 1")
    n = partition.n
    c11, c22 = partition.diagonal_blocks(C)
    p1 = marginal_params(p, n, partition.n1)
    p2 = marginal_params(p, n, partition.n2)
    lhs = cf.wre_closed(_joint_weight([w1, w2]), p, p, C, cfg.child(0))
    r1 = cf.wre_closed(w1, p1, p, c11, cfg.child(1))
    r2 = cf.wre_closed(w2, p2, p, c22, cfg.child(2))
    rhs = r1.value + r2.value
    unc = math.sqrt(lhs.error**2 + r1.error**2 + r2.error**2)
    return InequalityReport(
        "block_subadditivity",
        lhs.value,
        rhs,
        rhs - lhs.value,
        unc,
        k=k,
        details={"p": p, "block_exponents": [p1, p2], "block_entropies": [r1.value, r2.value]},
    )


# ---------------------------------------------------------------- block matrices


def zeta(p_prime, n1, n2):
    """(zeta, p'_1, p'_2): varpi*_{n1}(p'_1, p') varpi*_{n2}(p'_2, p') / varpi*_{n1+n2}(p')."""
    n = n1 + n2
    p1 = marginal_params(p_prime, n, n1)
    p2 = marginal_params(p_prime, n, n2)
    for pi, ni in ((p1, n1), (p2, n2)):
        if not min_exponent(ni) < pi < 1:
            raise ParameterError(f"block exponent {pi:g} outside ({ni}/({ni}+2), 1)")
        if not p_prime > (1 - pi) * ni / 2:
            raise ParameterError("p' must exceed (1 - p'_i) n'_i / 2")
    log_z = cf.log_varpi_star(p1, p_prime, n1) + cf.log_varpi_star(p2, p_prime, n2) - cf.log_varpi_star(p_prime, p_prime, n)
    return math.exp(log_z), p1, p2


def check_block_matrix_bound(
    B, C, partition: BlockPartition, w1, w2, p_prime, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT
) -> InequalityReport:
    """(det C' / (det C'_1 det C'_2))^{1-p'} (alpha*(C') / (alpha*_1 alpha*_2))^2 against zeta.

    C' = B C B^T with diagonal blocks C'_1, C'_2 given by ``partition``
    (which splits the n' output coordinates).  The entropy argument bounds
    the left side by zeta^2; that is the verdict.  The comparison with
    zeta itself is kept in ``details``.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = check_spd(C)
    if B.shape[1] != C.shape[0]:
        raise ParameterError("B must have as many columns as C has rows")
    if B.shape[0] != partition.n:
        raise ParameterError("partition does not match the rows of B")
    n_out = partition.n
    if not min_exponent(n_out) < p_prime < 1:
        raise ParameterError(f"p' must lie in ({n_out}/({n_out}+2), 1)")
    Cp = B @ C @ B.T
    Cp = 0.5 * (Cp + Cp.T)
    try:
        Cp = check_spd(Cp, "B C B^T")
    except Exception as exc:
        raise ParameterError(f"B C B^T is not positive definite: {exc}") from None
    c1, c2 = partition.diagonal_blocks(Cp)
    z, p1, p2 = zeta(p_prime, partition.n1, partition.n2)

    a = cf.alpha_star(_joint_weight([w1, w2]), p_prime, Cp, cfg.child(0))
    a1 = cf.escort_expectation(w1, p1, c1, p_prime, cfg.child(1))
    a2 = cf.escort_expectation(w2, p2, c2, p_prime, cfg.child(2))
    la, ra = _log_alpha(a, "alpha*(C')")
    l1, r1 = _log_alpha(a1, "alpha*_1(C'_1)")
    l2, r2 = _log_alpha(a2, "alpha*_2(C'_2)")
    log_det_ratio = float(np.linalg.slogdet(Cp)[1] - np.linalg.slogdet(c1)[1] - np.linalg.slogdet(c2)[1])
    log_lhs = (1 - p_prime) * log_det_ratio + 2 * (la - l1 - l2)
    unc = 2 * math.sqrt(ra**2 + r1**2 + r2**2)
    margin = 2 * math.log(z) - log_lhs
    return InequalityReport(
        "block_matrix_bound",
        lhs=log_lhs,
        rhs=2 * math.log(z),
        margin=margin,
        uncertainty=unc,
        k=k,
        details={
            "zeta": z,
            "block_exponents": [p1, p2],
            "log_det_ratio": log_det_ratio,
            "margin_against_zeta": math.log(z) - log_lhs,
        },
    )


def _abs_moment(law: PearsonDistribution, lam, cfg):
    ex = mc_expectation(law, lambda y, _: np.abs(y @ lam), cfg)
    return float(ex.mean[0]), float(ex.se[0])


def check_corollary_abs(lambdas, partition: BlockPartition, p_prime, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """E^2|lambda^T Y*| <= eta(lambda) E^2|lambda_1^T Y*_1| E^2|lambda_2^T Y*_2|.

    Y* ~ VII(p'/(1-p')) in n' dimensions, Y*_j ~ VII(p'/(1-p'_j)) in n'_j
    dimensions.  eta(lambda) = (|l|^2 / (|l_1|^2 |l_2|^2))^{p'-1} zeta
    (2 (p'_1/(1-p'_1) - n'_1/2)(p'_2/(1-p'_2) - n'_2/2) / (p'/(1-p') - n'/2)),
    grouped exactly as displayed.  The three expectations are estimated by
    Monte Carlo.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size != partition.n:
        raise ParameterError("one lambda per coordinate is required")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ParameterError("lambdas must be finite and nonnegative")
    lam1, lam2 = partition.split(lam)
    if not np.any(lam1) or not np.any(lam2):
        raise DegenerateInput("a block of lambdas is entirely zero, so its absolute moment vanishes")
    n, n1, n2 = partition.n, partition.n1, partition.n2
    if not min_exponent(n) < p_prime < 1:
        raise ParameterError(f"p' must lie in ({n}/({n}+2), 1)")
    z, p1, p2 = zeta(p_prime, n1, n2)
    laws = [
        PearsonDistribution("VII", p_prime / (1 - p_prime), n),
        PearsonDistribution("VII", p_prime / (1 - p1), n1),
        PearsonDistribution("VII", p_prime / (1 - p2), n2),
    ]
    for law in laws:
        if not law.mu - law.n / 2 > 0.5:
            raise ParameterError("absolute moment is infinite for these exponents")
    m, s = _abs_moment(laws[0], lam, cfg.child(0))
    m1, s1 = _abs_moment(laws[1], lam1, cfg.child(1))
    m2, s2 = _abs_moment(laws[2], lam2, cfg.child(2))
    sq, sq1, sq2 = float(lam @ lam), float(lam1 @ lam1), float(lam2 @ lam2)
    factor = 2 * (p1 / (1 - p1) - n1 / 2) * (p2 / (1 - p2) - n2 / 2) / (p_prime / (1 - p_prime) - n / 2)
    eta = (sq / (sq1 * sq2)) ** (p_prime - 1) * z * factor
    log_lhs = 2 * math.log(m)
    log_rhs = math.log(eta) + 2 * math.log(m1) + 2 * math.log(m2)
    unc = 2 * math.sqrt((s / m) ** 2 + (s1 / m1) ** 2 + (s2 / m2) ** 2)
    return InequalityReport(
        "corollary_abs",
        lhs=log_lhs,
        rhs=log_rhs,
        margin=log_rhs - log_lhs,
        uncertainty=unc,
        k=k,
        details={"eta": eta, "zeta": z, "moments": [m, m1, m2], "block_exponents": [p1, p2]},
        notes=["the integral hypothesis on g_{p',Lambda} is not evaluated; only the conclusion is checked"],
    )


# ---------------------------------------------------------------- matrix sums


def _matrix_sum_setup(A, B, p):
    A = check_spd(A, "A")
    B = np.asarray(B, dtype=float)
    if B.shape != A.shape:
        raise ParameterError("A and B must have the same shape")
    if not np.allclose(B, B.T, rtol=0, atol=1e-12 * max(1.0, np.abs(B).max())):
        raise ParameterError("B must be symmetric")
    try:
        AB = check_spd(A + B, "A + B")
    except Exception as exc:
        raise ParameterError(f"A + B is not positive definite: {exc}") from None
    if is_gaussian_exponent(p):
        raise ParameterError("the matrix-sum bound is stated for p != 1")
    return A, 0.5 * (B + B.T), AB


def _matrix_sum_sample(A, AB, extra, w, p, cfg):
    """Joint Monte Carlo sample under g_{p,A} of phi, phi x^T A^-1 x, phi x^T (A+B)^-1 x and extras."""
    g = MaximizerDensity(p, A)
    inv_a, inv_ab = np.linalg.inv(A), np.linalg.inv(AB)
    mats = [inv_a, inv_ab] + list(extra)

    def terms(x, _):
        ph = np.real(weightfn.evaluate(w, x))
        cols = [ph] + [ph * np.einsum("ij,jk,ik->i", x, M, x) for M in mats]
        return np.column_stack(cols)

    return g, expectation(g, terms, cfg.child(0), k=len(mats) + 1, weight_degree=w.growth_degree + 2)


def _linear(ex, coef):
    c = np.asarray(coef, dtype=float)
    val = float(c @ ex.mean)
    if ex.method == "monte_carlo":
        return val, math.sqrt(max(float(c @ ex.cov @ c), 0.0))
    return val, float(np.abs(c) @ ex.se)


def check_matrix_sum(A, B, w, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """Hypothesis on g_{p,A} and the alpha / determinant conclusion for A + B.

    Hypothesis: d_{A+B} {E phi + c E phi*_{A+B}} <= d_A {E phi + c E phi*_A}
    for p < 1 (>= for p > 1), with d_M = det(M)^{(1-p)/2}, c = (1-p) beta,
    phi*_M(x) = phi(x) x^T M^-1 x and expectations under g_{p,A}.

    Conclusion: it gives h_p(g_{p,A+B}) >= h_p(g_{p,A}) for p < 1 (<= for
    p > 1), i.e. (1/(1-p)) log(alpha(A+B)/alpha(A)) + (1/2) log(det(A+B)/det A)
    is >= 0 (<= 0).  The headline verdict is the conclusion's; the
    alpha-ratio-versus-determinant-ratio form is reported in ``details``.
    """
    weightfn.require_real(w)
    A, B, AB = _matrix_sum_setup(A, B, p)
    g, ex = _matrix_sum_sample(A, AB, [], w, p, cfg)
    c = (1 - p) * g.beta
    ld_a, ld_ab = float(np.linalg.slogdet(A)[1]), float(np.linalg.slogdet(AB)[1])
    d_a, d_ab = math.exp(0.5 * (1 - p) * ld_a), math.exp(0.5 * (1 - p) * ld_ab)
    # R - L as a linear form in (E phi, E phi*_A, E phi*_{A+B})
    coef = np.array([d_a - d_ab, c * d_a, -c * d_ab])
    diff, diff_unc = _linear(ex, coef)
    lhs_h = d_ab * (ex.mean[0] + c * ex.mean[2])
    rhs_h = d_a * (ex.mean[0] + c * ex.mean[1])
    hypothesis = InequalityReport("hypothesis", lhs_h, rhs_h, diff if p < 1 else -diff, diff_unc, k=k)

    a_ab = _branch_alpha(w, p, AB, cfg.child(1))
    a_a = _branch_alpha(w, p, A, cfg.child(2))
    l_ab, r_ab = _log_alpha(a_ab, "alpha(A+B)")
    l_a, r_a = _log_alpha(a_a, "alpha(A)")
    log_alpha_ratio = l_ab - l_a
    half_log_det = 0.5 * (ld_ab - ld_a)
    entropy_gap = log_alpha_ratio / (1 - p) + half_log_det
    unc = math.sqrt(r_ab**2 + r_a**2) / abs(1 - p)
    conclusion = InequalityReport(
        "conclusion", entropy_gap, 0.0, entropy_gap if p < 1 else -entropy_gap, unc, k=k
    )
    displayed = log_alpha_ratio / (1 - p) - half_log_det
    notes = []
    if hypothesis.verdict == "holds" and conclusion.verdict == "violated":
        notes.append("hypothesis holds but the conclusion fails")
    return InequalityReport(
        "matrix_sum",
        conclusion.lhs,
        conclusion.rhs,
        conclusion.margin,
        conclusion.uncertainty,
        k=k,
        clauses=[hypothesis, conclusion],
        details={
            "p": p,
            "log_alpha_ratio": log_alpha_ratio,
            "half_log_det_ratio": half_log_det,
            "alpha_vs_det_form": displayed if p < 1 else -displayed,
        },
        notes=notes,
    )


RANK_TOL = 1e-10


def sherman_morrison_condition(A, B, w, p, cfg: EstimatorConfig = EstimatorConfig(), k=K_DEFAULT) -> InequalityReport:
    """Matrix-sum hypothesis for rank-one B, rewritten with (A+B)^-1 = A^-1 - B_A/(1+kappa).

    With kappa = tr(B A^-1) and B_A = A^-1 B A^-1 the hypothesis becomes
    (d_{A+B} - d_A)(E phi + c E phi*_A) <= (c/(1+kappa)) d_{A+B} E[phi x^T B_A x]
    for p < 1 (>= for p > 1).  The margin is computed from the same sample
    as the direct form, and the two are compared in ``details``.
    """
    weightfn.require_real(w)
    A, B, AB = _matrix_sum_setup(A, B, p)
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[0] == 0.0 or (len(sv) > 1 and sv[1] > RANK_TOL * sv[0]):
        raise RankError(f"B must have numerical rank one (singular values {sv[:2].tolist()})")
    inv_a = np.linalg.inv(A)
    kappa = float(np.trace(B @ inv_a))
    if abs(1 + kappa) < 1e-12:
        raise ParameterError("kappa = -1: A + B is singular")
    b_a = inv_a @ B @ inv_a
    g, ex = _matrix_sum_sample(A, AB, [b_a], w, p, cfg)
    c = (1 - p) * g.beta
    ld_a, ld_ab = float(np.linalg.slogdet(A)[1]), float(np.linalg.slogdet(AB)[1])
    d_a, d_ab = math.exp(0.5 * (1 - p) * ld_a), math.exp(0.5 * (1 - p) * ld_ab)
    # columns: phi, phi*_A, phi*_{A+B}, phi x^T B_A x
    lhs_coef = np.array([d_ab - d_a, c * (d_ab - d_a), 0.0, 0.0])
    rhs_coef = np.array([0.0, 0.0, 0.0, c / (1 + kappa) * d_ab])
    lhs, _ = _linear(ex, lhs_coef)
    rhs, _ = _linear(ex, rhs_coef)
    diff, unc = _linear(ex, rhs_coef - lhs_coef)
    direct, _ = _linear(ex, np.array([d_a - d_ab, c * d_a, -c * d_ab, 0.0]))
    scale = max(abs(lhs), abs(rhs), abs(direct), 1e-300)
    displayed_lhs = (d_ab - d_a) * (c + 1) * ex.mean[0]
    margin = diff if p < 1 else -diff
    return InequalityReport(
        "sherman_morrison",
        lhs,
        rhs,
        margin,
        unc,
        k=k,
        details={
            "kappa": kappa,
            "direct_margin": direct if p < 1 else -direct,
            "equivalence_gap": abs(diff - direct) / scale,
            "displayed_form_margin": (rhs - displayed_lhs) if p < 1 else (displayed_lhs - rhs),
        },
    )


__all__ = [
    "BlockPartition",
    "HadamardReport",
    "BESSEL_2X2_CONSTANT",
    "hadamard_terms",
    "check_hadamard",
    "check_hadamard_bessel",
    "bessel_2x2_inequality",
    "check_subadditivity",
    "check_block_subadditivity",
    "zeta",
    "check_block_matrix_bound",
    "check_corollary_abs",
    "check_matrix_sum",
    "sherman_morrison_condition",
]
