"""Weight functions phi: R^n -> scalars.

A ``WeightFunction`` is an immutable value with a structural ``kind`` so that
closed forms can dispatch on shape (constant, quadratic, exponential phase,
products) while ``custom`` covers everything else.  Evaluation is vectorized
over the rows of an ``(m, n)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError, NonRealWeight, ParameterError

KINDS = ("constant", "quadratic", "log_quadratic", "abs_linear", "exp_phase", "product", "linear_map", "custom")


@dataclass(frozen=True, eq=False)
class WeightFunction:
    kind: str
    dimension: int
    params: dict = field(default_factory=dict)
    factors: tuple = ()
    func: Optional[Callable] = None
    codomain: str = "real_nonneg"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown weight kind {self.kind!r}")
        if self.dimension < 1:
            raise ParameterError("dimension must be positive")
        if self.kind == "product":
            if sum(f.dimension for f in self.factors) != self.dimension:
                raise DimensionMismatch("product factor dimensions must add up to the total dimension")

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def is_real(self):
        return self.codomain != "complex"

    @property
    def growth_degree(self):
        """Polynomial degree bounding |phi(x)| as |x| grows (0 for bounded or log growth)."""
        if self.kind == "quadratic":
            return 2.0
        if self.kind == "abs_linear":
            return 1.0
        if self.kind == "product":
            return float(sum(f.growth_degree for f in self.factors))
        if self.kind == "linear_map":
            return self.params["inner"].growth_degree
        if self.kind == "custom":
            return float(self.params.get("degree", 0.0))
        return 0.0

    def to_dict(self):
        if self.kind == "constant":
            params = {"c": self.params["c"]}
        elif self.kind == "exp_phase":
            params = {"t": list(map(float, self.params["t"]))}
        elif self.kind == "product":
            params = {"factors": [f.to_dict() for f in self.factors]}
        elif self.kind in ("custom", "linear_map"):
            raise DomainError(f"{self.kind} weights are not serializable")
        else:
            params = {}
        return {"kind": self.kind, "dimension": self.dimension, "params": params}


# ---------------------------------------------------------------- constructors


def constant(c=1.0, dimension=1):
    if c < 0:
        raise DomainError("constant weight must be nonnegative")
    return WeightFunction("constant", dimension, {"c": float(c)})


def quadratic(dimension=1):
    """x -> x^T x."""
    return WeightFunction("quadratic", dimension)


def log_quadratic(dimension=1):
    """x -> log x^T x (negative inside the unit ball, -inf at the origin)."""
    return WeightFunction("log_quadratic", dimension, codomain="real")


def abs_linear(dimension=1):
    """x -> |x| (Euclidean norm of the block)."""
    return WeightFunction("abs_linear", dimension)


def exp_phase(t):
    """x -> exp(i t.x); complex valued."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return WeightFunction("exp_phase", t.size, {"t": t}, codomain="complex")


def product(factors):
    """phi(x) = prod_i phi_i(x_i) over consecutive coordinate blocks."""
    factors = tuple(factors)
    if not factors:
        raise ParameterError("product needs at least one factor")
    dim = sum(f.dimension for f in factors)
    codomain = "complex" if any(f.codomain == "complex" for f in factors) else (
        "real" if any(f.codomain == "real" for f in factors) else "real_nonneg"
    )
    return WeightFunction("product", dim, factors=factors, codomain=codomain)


def custom(func, dimension, codomain="real_nonneg", degree=0.0):
    """Wrap ``func`` mapping an ``(m, n)`` array to ``m`` values."""
    return WeightFunction("custom", dimension, {"degree": float(degree)}, func=func, codomain=codomain)


def scaled_weight(w, scale, root_matrix):
    """The weight y -> phi(sqrt(scale) * root_matrix @ y)."""
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    root_matrix = np.atleast_2d(np.asarray(root_matrix, dtype=float))
    if root_matrix.shape != (w.dimension, w.dimension):
        raise DimensionMismatch("root matrix shape does not match weight dimension")
    if w.kind == "constant":
        return w
    m = np.sqrt(scale) * root_matrix
    return WeightFunction("linear_map", w.dimension, {"inner": w, "matrix": m}, codomain=w.codomain)


# ---------------------------------------------------------------- evaluation


def _as_rows(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    x = x.reshape(1, -1) if single else x
    if x.shape[1] != n:
        raise DimensionMismatch(f"expected points of dimension {n}, got {x.shape[1]}")
    return x, single


def _eval_rows(w, x):
    kind = w.kind
    if kind == "constant":
        return np.full(x.shape[0], w.params["c"])
    if kind == "quadratic":
        return np.einsum("ij,ij->i", x, x)
    if kind == "log_quadratic":
        with np.errstate(divide="ignore"):
            return np.log(np.einsum("ij,ij->i", x, x))
    if kind == "abs_linear":
        return np.sqrt(np.einsum("ij,ij->i", x, x))
    if kind == "exp_phase":
        return np.exp(1j * (x @ w.params["t"]))
    if kind == "product":
        out = np.ones(x.shape[0], dtype=complex if w.codomain == "complex" else float)
        start = 0
        for f in w.factors:
            out = out * _eval_rows(f, x[:, start : start + f.dimension])
            start += f.dimension
        return out
    if kind == "linear_map":
        return _eval_rows(w.params["inner"], x @ w.params["matrix"].T)
    return np.asarray(w.func(x))


def evaluate(w, x):
    """phi(x) for a point ``x`` of shape (n,) or a batch of shape (m, n)."""
    rows, single = _as_rows(x, w.dimension)
    out = _eval_rows(w, rows)
    return out[0] if single else out


def require_real(w):
    if not w.is_real:
        raise NonRealWeight(f"{w.kind} weight is complex valued; entropy functionals need a real weight")


def product_factors(w):
    """Factors of ``w`` viewed as a product (a non-product weight is its own single factor)."""
    return w.factors if w.kind == "product" else (w,)


def from_dict(spec, dimension=None):
    """Build a weight from its JSON form ``{"kind": ..., "params": {...}}``."""
    kind = spec.get("kind")
    params = spec.get("params", {}) or {}
    dim = spec.get("dimension", dimension)
    if kind == "exp_phase":
        return exp_phase(params["t"])
    if kind == "product":
        return product([from_dict(f, 1) for f in params["factors"]])
    if dim is None:
        raise ParameterError("weight dimension missing")
    if kind == "constant":
        return constant(params.get("c", 1.0), dim)
    if kind == "quadratic":
        return quadratic(dim)
    if kind == "log_quadratic":
        return log_quadratic(dim)
    if kind == "abs_linear":
        return abs_linear(dim)
    raise ParameterError(f"weight kind {kind!r} cannot be built from JSON")
