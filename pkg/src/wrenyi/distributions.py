"""Pearson type II/VII laws, the maximizer family g_{p,C}, and their samplers.

Every density object in this module exposes the same small interface, which
is what the estimators in :mod:`wrenyi.entropy` consume:

``dimension``
    Ambient dimension n.
``logpdf(x)`` / ``pdf(x)``
    Evaluated on a single point of shape (n,) or a batch of shape (m, n).
``sample(seed, count)``
    ``count`` i.i.d. draws, deterministic given the seed.
``tail_exponent``
    Decay power d such that the density behaves like |x|^-d at infinity, or
    ``None`` for light (Gaussian or compact) tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from . import specfun
from .errors import DimensionMismatch, DomainError, ParameterError

P_ONE_BAND = 1e-12
MAX_CONDITION = 1e12


# ---------------------------------------------------------------- utilities


def as_generator(seed, *keys) -> np.random.Generator:
    """Generator for ``seed`` or for the counter-based sub-stream ``seed/keys``.

    ``seed`` may be an integer, a ``SeedSequence`` or an existing
    ``Generator`` (returned unchanged when no keys are given).
    """
    if isinstance(seed, np.random.Generator):
        if not keys:
            return seed
        seed = int(seed.integers(2**63))
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    else:
        ss = np.random.SeedSequence(0 if seed is None else int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def check_spd(C, name="C") -> np.ndarray:
    """Validate a symmetric positive-definite matrix and return it as floats."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ParameterError(f"{name} has non-finite entries")
    scale = max(np.abs(C).max(), 1e-300)
    if np.abs(C - C.T).max() > 1e-10 * scale:
        raise ParameterError(f"{name} is not symmetric")
    C = 0.5 * (C + C.T)
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        raise ParameterError(f"{name} is not positive definite") from None
    if np.linalg.cond(C) > MAX_CONDITION:
        raise ParameterError(f"{name} is numerically singular (condition number > {MAX_CONDITION:g})")
    return C


def sqrtm_spd(C) -> np.ndarray:
    """Symmetric square root via the eigendecomposition."""
    vals, vecs = np.linalg.eigh(C)
    return (vecs * np.sqrt(vals)) @ vecs.T


def as_rows(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    rows = x.reshape(1, -1) if single else x
    if rows.shape[1] != n:
        raise DimensionMismatch(f"expected points of dimension {n}, got {rows.shape[1]}")
    return rows, single


def _finish(vals, single):
    return float(vals[0]) if single else vals


def is_gaussian_exponent(p) -> bool:
    return abs(p - 1.0) < P_ONE_BAND


def min_exponent(n) -> float:
    """Lower bound n/(n+2) on admissible exponents in dimension n."""
    return n / (n + 2.0)


# ---------------------------------------------------------------- Pearson II / VII


@dataclass(frozen=True)
class PearsonDistribution:
    """Spherical Pearson law: type II on the unit ball, type VII on R^n.

    Type II has density proportional to (1 - x^T x)^mu, type VII to
    (1 + x^T x)^-mu.
    """

    family: str
    mu: float
    n: int

    def __post_init__(self):
        if self.family not in ("II", "VII"):
            raise ParameterError(f"family must be 'II' or 'VII', got {self.family!r}")
        if self.n < 1:
            raise ParameterError("dimension must be positive")
        if self.family == "II" and not self.mu > -1:
            raise ParameterError(f"type II requires mu > -1, got {self.mu}")
        if self.family == "VII" and not self.mu > self.n / 2:
            raise ParameterError(f"type VII requires mu > n/2 = {self.n / 2}, got {self.mu}")

    @property
    def dimension(self):
        return self.n

    @property
    def log_normalizer(self):
        n, mu = self.n, self.mu
        if self.family == "II":
            return specfun.lgamma(n / 2 + mu + 1) - specfun.lgamma(mu + 1) - 0.5 * n * math.log(math.pi)
        return specfun.lgamma(mu) - specfun.lgamma(mu - n / 2) - 0.5 * n * math.log(math.pi)

    @property
    def tail_exponent(self):
        return 2.0 * self.mu if self.family == "VII" else None

    def logpdf(self, x):
        rows, single = as_rows(x, self.n)
        t = np.einsum("ij,ij->i", rows, rows)
        if self.family == "VII":
            out = self.log_normalizer - self.mu * np.log1p(t)
        else:
            out = np.full(t.shape, -np.inf)
            inside = t <= 1.0
            with np.errstate(divide="ignore"):
                out[inside] = self.log_normalizer + self.mu * np.log1p(-t[inside])
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        rng = as_generator(seed)
        n, mu = self.n, self.mu
        if self.family == "VII":
            z = rng.standard_normal((count, n))
            s = rng.chisquare(2 * mu - n, size=count)
            # tiny degrees of freedom can underflow to exactly 0
            zero = s == 0.0
            while np.any(zero):
                s[zero] = rng.chisquare(2 * mu - n, size=int(zero.sum()))
                zero = s == 0.0
            return z / np.sqrt(s)[:, None]
        g = rng.standard_normal((count, n))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
        r2 = rng.beta(n / 2, mu + 1, size=count)
        return direction * np.sqrt(r2)[:, None]

    def radial_law(self):
        """Law of T = x^T x as a frozen ``scipy.stats`` distribution."""
        if self.family == "VII":
            return stats.betaprime(self.n / 2, self.mu - self.n / 2)
        return stats.beta(self.n / 2, self.mu + 1)

    def radial_statistic(self, x):
        rows, _ = as_rows(x, self.n)
        return np.einsum("ij,ij->i", rows, rows)

    def second_moment(self):
        """E[x x^T] = c I; returns c (inf when it does not exist)."""
        if self.family == "VII":
            return 1.0 / (2 * self.mu - self.n - 2) if self.mu > self.n / 2 + 1 else math.inf
        return 1.0 / (2 * self.mu + self.n + 2)

    def marginal(self, indices):
        """Law of the coordinates ``indices`` (again Pearson of the same type)."""
        k = len(indices)
        if self.family == "VII":
            return PearsonDistribution("VII", self.mu - (self.n - k) / 2, k)
        return PearsonDistribution("II", self.mu + (self.n - k) / 2, k)


def density_pearson(d: PearsonDistribution, x):
    return d.pdf(x)


def sample_pearson(d: PearsonDistribution, rng_seed, count):
    return d.sample(rng_seed, count)


# ---------------------------------------------------------------- g_{p,C}


def beta_param(p, n):
    """beta = 1/(2p - n(1-p))."""
    return 1.0 / (2.0 * p - n * (1.0 - p))


def scale_param(p, n):
    """Squared radial scale: 2p/(1-p) - n for p<1, 2p/(p-1) + n for p>1, 1 for p=1."""
    if is_gaussian_exponent(p):
        return 1.0
    if p < 1:
        return 2.0 * p / (1.0 - p) - n
    return 2.0 * p / (p - 1.0) + n


def standard_pearson(p, n, q=None) -> PearsonDistribution:
    """The Pearson law behind g_{p,C}, or its q-escort when ``q`` is given.

    g_{p,C} is the law of sqrt(scale) C^{1/2} Y with Y ~ VII(1/(1-p)) for
    p<1 and Y ~ II(1/(p-1)) for p>1.  Raising the density to the power q
    gives, after normalization, the same construction with q/(1-p) or
    q/(p-1) as parameter.
    """
    q = 1.0 if q is None else q
    if p < 1:
        return PearsonDistribution("VII", q / (1.0 - p), n)
    return PearsonDistribution("II", q / (p - 1.0), n)


@dataclass(frozen=True, eq=False)
class MaximizerDensity:
    """The Renyi-entropy maximizer g_{p,C} with mean zero and covariance C."""

    p: float
    C: np.ndarray
    _root: np.ndarray = field(init=False, repr=False)
    _inv: np.ndarray = field(init=False, repr=False)
    _logdet: float = field(init=False, repr=False)

    def __post_init__(self):
        C = check_spd(self.C)
        n = C.shape[0]
        p = float(self.p)
        if not p > min_exponent(n):
            raise ParameterError(f"exponent p must exceed n/(n+2) = {min_exponent(n):.6g}, got {p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "_root", sqrtm_spd(C))
        object.__setattr__(self, "_inv", np.linalg.inv(C))
        object.__setattr__(self, "_logdet", float(np.linalg.slogdet(C)[1]))

    @classmethod
    def gaussian(cls, C):
        return cls(1.0, C)

    @property
    def n(self):
        return self.C.shape[0]

    @property
    def dimension(self):
        return self.n

    @property
    def is_gaussian(self):
        return is_gaussian_exponent(self.p)

    @property
    def beta(self):
        return beta_param(self.p, self.n)

    @property
    def scale(self):
        return scale_param(self.p, self.n)

    @property
    def root(self):
        return self._root

    @property
    def inv(self):
        return self._inv

    @property
    def logdet(self):
        return self._logdet

    @property
    def tail_exponent(self):
        if self.is_gaussian or self.p > 1:
            return None
        return 2.0 / (1.0 - self.p)

    @property
    def support_radius2(self):
        """Bound on x^T C^-1 x (inf unless p > 1)."""
        return self.scale if (not self.is_gaussian and self.p > 1) else math.inf

    @property
    def log_normalizer(self):
        """log A_p, including the det C factor."""
        p, n = self.p, self.n
        if self.is_gaussian:
            return -0.5 * (n * math.log(2 * math.pi) + self._logdet)
        b = self.beta
        if p < 1:
            a = 1.0 / (1.0 - p)
            val = specfun.lgamma(a) + 0.5 * n * math.log(b * (1 - p)) - specfun.lgamma(a - n / 2)
        else:
            a = p / (p - 1.0)
            val = specfun.lgamma(a + n / 2) + 0.5 * n * math.log(b * (p - 1)) - specfun.lgamma(a)
        return val - 0.5 * n * math.log(math.pi) - 0.5 * self._logdet

    @property
    def standard(self) -> Optional[PearsonDistribution]:
        return None if self.is_gaussian else standard_pearson(self.p, self.n)

    def mahalanobis(self, rows):
        return np.einsum("ij,jk,ik->i", rows, self._inv, rows)

    def logpdf(self, x):
        rows, single = as_rows(x, self.n)
        t = self.mahalanobis(rows)
        if self.is_gaussian:
            return _finish(self.log_normalizer - 0.5 * t, single)
        arg = (1.0 - self.p) * self.beta * t
        if self.p < 1:
            out = self.log_normalizer - np.log1p(arg) / (1.0 - self.p)
        else:
            out = np.full(t.shape, -np.inf)
            inside = arg > -1.0
            out[inside] = self.log_normalizer + np.log1p(arg[inside]) / (self.p - 1.0)
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        rng = as_generator(seed)
        if self.is_gaussian:
            y = rng.standard_normal((count, self.n))
            return y @ self._root.T
        y = self.standard.sample(rng, count)
        return math.sqrt(self.scale) * (y @ self._root.T)

    def radial_statistic(self, x):
        """x^T C^-1 x divided by the squared scale; distributed as ``radial_law()``."""
        rows, _ = as_rows(x, self.n)
        return self.mahalanobis(rows) / self.scale

    def radial_law(self):
        if self.is_gaussian:
            return stats.chi2(self.n)
        return self.standard.radial_law()

    def marginal(self, indices) -> "MaximizerDensity":
        """Law of the sub-vector ``x[indices]``: g_{p_j, C_jj}."""
        idx = list(indices)
        pj = marginal_params(self.p, self.n, len(idx))
        return MaximizerDensity(pj, self.C[np.ix_(idx, idx)])

    def in_support(self, x):
        rows, _ = as_rows(x, self.n)
        return self.mahalanobis(rows) <= self.support_radius2 * (1 + 1e-12)


def gaussian(C) -> MaximizerDensity:
    return MaximizerDensity.gaussian(C)


def density_gpc(d: MaximizerDensity, x):
    return d.pdf(x)


def sample_gpc(d: MaximizerDensity, rng_seed, count):
    return d.sample(rng_seed, count)


def marginal_params(p, n, n_i):
    """Exponent of an ``n_i``-dimensional marginal of an n-dimensional g_p.

    Solves 1/(1-p_i) = 1/(1-p) - (n - n_i)/2.  The marginal stays on the
    branch of p, and ``n_i == n`` returns p itself.
    """
    if not (isinstance(n, (int, np.integer)) and isinstance(n_i, (int, np.integer))):
        raise ParameterError("dimensions must be integers")
    if not 0 < n_i <= n:
        raise ParameterError(f"need 0 < n_i <= n, got n_i={n_i}, n={n}")
    if not p > min_exponent(n):
        raise ParameterError(f"p must exceed n/(n+2) = {min_exponent(n):.6g}")
    if is_gaussian_exponent(p) or n_i == n:
        return 1.0 if is_gaussian_exponent(p) else float(p)
    inv = 1.0 / (1.0 - p) - (n - n_i) / 2.0
    pj = 1.0 - 1.0 / inv
    ok = (min_exponent(n_i) < pj < 1) if p < 1 else pj > 1
    if not ok:
        raise ParameterError(f"marginal exponent {pj} leaves the branch of p={p}")
    return pj


# ---------------------------------------------------------------- generic densities


@dataclass(frozen=True, eq=False)
class AffineDensity:
    """Law of M Y for a base law Y and an invertible matrix M."""

    base: object
    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape != (self.base.dimension, self.base.dimension):
            raise DimensionMismatch("matrix shape does not match the base dimension")
        sign, logdet = np.linalg.slogdet(m)
        if sign == 0:
            raise ParameterError("affine map must be invertible")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_inv", np.linalg.inv(m))
        object.__setattr__(self, "_logdet", logdet)

    @property
    def dimension(self):
        return self.base.dimension

    @property
    def tail_exponent(self):
        return self.base.tail_exponent

    def logpdf(self, x):
        rows, single = as_rows(x, self.dimension)
        out = np.asarray(self.base.logpdf(rows @ self._inv.T)) - self._logdet
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        return self.base.sample(seed, count) @ self.matrix.T


def scaled_pearson(d: PearsonDistribution, matrix) -> AffineDensity:
    return AffineDensity(d, matrix)


def validate_simplex(weights, tol=1e-12) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ParameterError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > tol:
        raise ParameterError(f"weights must sum to 1 (got {w.sum():.15g})")
    return w


@dataclass(frozen=True, eq=False)
class Mixture:
    """Finite mixture sum_k w_k f_k of densities of a common dimension."""

    components: tuple
    weights: np.ndarray

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ParameterError("mixture needs at least one component")
        dims = {c.dimension for c in comps}
        if len(dims) != 1:
            raise DimensionMismatch("mixture components differ in dimension")
        w = validate_simplex(self.weights, tol=1e-10)
        if w.size != len(comps):
            raise ParameterError("one weight per component required")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

    @property
    def dimension(self):
        return self.components[0].dimension

    @property
    def tail_exponent(self):
        tails = [c.tail_exponent for c, w in zip(self.components, self.weights) if w > 0]
        heavy = [t for t in tails if t is not None]
        return min(heavy) if heavy else None

    def logpdf(self, x):
        rows, single = as_rows(x, self.dimension)
        with np.errstate(divide="ignore"):
            logs = np.stack(
                [np.asarray(c.logpdf(rows)) + math.log(w) for c, w in zip(self.components, self.weights) if w > 0]
            )
        top = logs.max(axis=0)
        safe = np.where(np.isfinite(top), top, 0.0)
        out = safe + np.log(np.exp(logs - safe).sum(axis=0))
        out = np.where(np.isfinite(top), out, -np.inf)
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        rng = as_generator(seed)
        labels = rng.choice(len(self.components), size=count, p=self.weights)
        out = np.empty((count, self.dimension))
        for k, comp in enumerate(self.components):
            idx = np.flatnonzero(labels == k)
            if idx.size:
                out[idx] = comp.sample(as_generator(rng, k), idx.size)
        return out

    def marginal(self, indices):
        return Mixture(tuple(c.marginal(indices) for c in self.components), self.weights)


@dataclass(frozen=True, eq=False)
class ProductDensity:
    """Independent blocks: f(x) = prod_j f_j(x_j) over consecutive coordinates."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ParameterError("product density needs at least one block")

    @property
    def dimension(self):
        return sum(b.dimension for b in self.blocks)

    @property
    def tail_exponent(self):
        heavy = [b.tail_exponent for b in self.blocks if b.tail_exponent is not None]
        return min(heavy) if heavy else None

    def _slices(self):
        start = 0
        for b in self.blocks:
            yield b, slice(start, start + b.dimension)
            start += b.dimension

    def logpdf(self, x):
        rows, single = as_rows(x, self.dimension)
        out = sum(np.asarray(b.logpdf(rows[:, s])) for b, s in self._slices())
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        rng = as_generator(seed)
        return np.hstack([b.sample(as_generator(rng, j), count) for j, b in enumerate(self.blocks)])

    def marginal(self, indices):
        idx = list(indices)
        for b, s in self._slices():
            if idx == list(range(s.start, s.stop)):
                return b
        raise DomainError("product marginals are available for whole blocks only")


class NumericalMarginal:
    """Marginal of one coordinate of an n <= 3 density, by integrating out the rest.

    Density values come from adaptive quadrature over the remaining
    coordinates; samples are projections of samples of the joint law.
    """

    def __init__(self, joint, index, box=None, rtol=1e-10):
        n = joint.dimension
        if n > 3:
            raise ParameterError("numerical marginalization is limited to n <= 3")
        if not 0 <= index < n:
            raise DimensionMismatch(f"coordinate {index} out of range for dimension {n}")
        self.joint = joint
        self.index = int(index)
        self.rtol = rtol
        self._box = box if box is not None else [(-math.inf, math.inf)] * n

    @property
    def dimension(self):
        return 1

    @property
    def tail_exponent(self):
        d = self.joint.tail_exponent
        return None if d is None else d - (self.joint.dimension - 1)

    def bounds(self):
        return [self._box[self.index]]

    def _density_at(self, t):
        n = self.joint.dimension
        others = [j for j in range(n) if j != self.index]

        def point(*ys):
            x = np.empty((1, n))
            x[0, self.index] = t
            x[0, others] = ys
            return float(np.exp(self.joint.logpdf(x))[0])

        if n == 1:
            return point()
        (a, b) = self._box[others[0]]
        if n == 2:
            return integrate.quad(point, a, b, epsabs=1e-14, epsrel=self.rtol, limit=200)[0]
        (c, d) = self._box[others[1]]
        return integrate.dblquad(lambda z, y: point(y, z), a, b, c, d, epsabs=1e-13, epsrel=max(self.rtol, 1e-8))[0]

    def logpdf(self, x):
        rows, single = as_rows(x, 1)
        lo, hi = self._box[self.index]
        vals = np.array([self._density_at(t) if lo <= t <= hi else 0.0 for t in rows[:, 0]])
        with np.errstate(divide="ignore"):
            out = np.log(vals)
        return _finish(out, single)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, seed, count):
        return self.joint.sample(seed, count)[:, [self.index]]


def marginal_of(f, index, box=None):
    """One-coordinate marginal: analytic when the family provides it, else numerical."""
    if hasattr(f, "marginal"):
        try:
            return f.marginal([index])
        except DomainError:
            pass
    return NumericalMarginal(f, index, box)


# ---------------------------------------------------------------- convolutions


def _chi(rng, dof, size):
    return np.sqrt(rng.chisquare(dof, size=size))


def convolve_p(x_samples, y_samples, C_X, C_Y, p, rng_seed):
    """Samples of the p-convolution of X ~ g_{p,C_X} and Y ~ g_{p,C_Y}, p > 1.

    With S = U_X X + U_Y Y and U_X, U_Y ~ chi(m), m = n + 2p/(p-1), the
    output is S / sqrt(S^T (m C)^-1 S + V^2) where C = C_X + C_Y and
    V ~ chi(2p/(p-1)).  The result is distributed as g_{p, C_X + C_Y}.
    """
    if not p > 1:
        raise ParameterError(f"convolve_p requires p > 1, got {p}")
    x = np.atleast_2d(np.asarray(x_samples, dtype=float))
    y = np.atleast_2d(np.asarray(y_samples, dtype=float))
    if x.shape != y.shape:
        raise DimensionMismatch("sample sets must have the same shape")
    count, n = x.shape
    C = check_spd(C_X) + check_spd(C_Y)
    if C.shape != (n, n):
        raise DimensionMismatch("covariance shape does not match the samples")
    rng = as_generator(rng_seed)
    k = 2.0 * p / (p - 1.0)
    m = n + k
    s = _chi(rng, m, count)[:, None] * x + _chi(rng, m, count)[:, None] * y
    v = _chi(rng, k, count)
    quad = np.einsum("ij,jk,ik->i", s, np.linalg.inv(m * C), s)
    return s / np.sqrt(quad + v**2)[:, None]


def theta(x, D):
    """Theta_D(x) = x / sqrt(1 + x^T D^-1 x), mapping R^n into an ellipsoid."""
    rows, single = as_rows(x, np.shape(D)[0])
    q = np.einsum("ij,jk,ik->i", rows, np.linalg.inv(D), rows)
    out = rows / np.sqrt(1.0 + q)[:, None]
    return out[0] if single else out


def theta_inverse(x, D):
    """Theta_D^-1(x) = x / sqrt(1 - x^T D^-1 x); requires x^T D^-1 x < 1."""
    rows, single = as_rows(x, np.shape(D)[0])
    q = np.einsum("ij,jk,ik->i", rows, np.linalg.inv(D), rows)
    if np.any(q >= 1.0):
        bad = int(np.argmax(q >= 1.0))
        raise DomainError(f"theta_inverse: point {bad} has x^T D^-1 x = {q[bad]:.6g} >= 1")
    out = rows / np.sqrt(1.0 - q)[:, None]
    return out[0] if single else out


def circ_params(p, n):
    """(m, p~) for the circle convolution: m = 2/(1-p) - n and 1/(p~-1) = m/2 - 1."""
    if not min_exponent(n) < p < 1:
        raise ParameterError(f"circle convolution requires n/(n+2) < p < 1, got {p}")
    m = 2.0 / (1.0 - p) - n
    return m, 1.0 + 1.0 / (m / 2.0 - 1.0)


def convolve_circ(x_samples, y_samples, C_X, C_Y, p, rng_seed):
    """Samples of the circle convolution of X ~ g_{p,C_X} and Y ~ g_{p,C_Y}, p < 1.

    Each input is mapped by Theta_{(m-2)C} onto a type II law g_{p~, C'},
    the two are combined with the p~-convolution, and Theta^-1 with
    D = (m-2)(C_X + C_Y) maps the result back.  Output is g_{p, C_X + C_Y}.
    """
    x = np.atleast_2d(np.asarray(x_samples, dtype=float))
    y = np.atleast_2d(np.asarray(y_samples, dtype=float))
    n = x.shape[1]
    m, p_tilde = circ_params(p, n)
    C_X = check_spd(C_X)
    C_Y = check_spd(C_Y)
    tx = theta(x, (m - 2.0) * C_X)
    ty = theta(y, (m - 2.0) * C_Y)
    shrink = (m - 2.0) / (m + n)
    inner = convolve_p(tx, ty, shrink * C_X, shrink * C_Y, p_tilde, rng_seed)
    return theta_inverse(inner, (m - 2.0) * (C_X + C_Y))


# ---------------------------------------------------------------- JSON specs


def from_dict(spec) -> object:
    """Build a density from its JSON description (see the CLI schemas)."""
    fam = spec["family"]
    if fam == "gpc":
        return MaximizerDensity(float(spec["p"]), np.asarray(spec["C"], dtype=float))
    if fam == "gaussian":
        return gaussian(np.asarray(spec["C"], dtype=float))
    if fam == "pearson":
        return PearsonDistribution(spec["type"], float(spec["mu"]), int(spec["n"]))
    if fam == "affine":
        return AffineDensity(from_dict(spec["base"]), np.asarray(spec["matrix"], dtype=float))
    if fam == "mixture":
        return Mixture(tuple(from_dict(c) for c in spec["components"]), np.asarray(spec["weights"], dtype=float))
    if fam == "product":
        return ProductDensity(tuple(from_dict(b) for b in spec["blocks"]))
    raise ParameterError(f"unknown density family {fam!r}")


def random_spd(rng, n, low=0.1, high=10.0) -> np.ndarray:
    """Q diag(lambda) Q^T with Haar-like Q and log-uniform eigenvalues."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    lam = np.exp(rng.uniform(math.log(low), math.log(high), size=n))
    c = (q * lam) @ q.T
    return 0.5 * (c + c.T)


__all__: Sequence[str] = [
    "as_generator",
    "check_spd",
    "sqrtm_spd",
    "PearsonDistribution",
    "MaximizerDensity",
    "AffineDensity",
    "Mixture",
    "ProductDensity",
    "NumericalMarginal",
    "marginal_of",
    "gaussian",
    "density_gpc",
    "density_pearson",
    "sample_gpc",
    "sample_pearson",
    "marginal_params",
    "standard_pearson",
    "beta_param",
    "scale_param",
    "convolve_p",
    "convolve_circ",
    "theta",
    "theta_inverse",
    "circ_params",
    "random_spd",
    "from_dict",
]
