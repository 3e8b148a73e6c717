"""Weighted Renyi entropy: maximizers, closed forms, estimators and matrix inequalities."""

from .distributions import MaximizerDensity, PearsonDistribution
from .entropy import EntropyEstimate, EstimatorConfig
from .errors import WrenyiError
from .reports import InequalityReport
from .weightfn import WeightFunction

__version__ = "0.1.0"

__all__ = [
    "MaximizerDensity",
    "PearsonDistribution",
    "EntropyEstimate",
    "EstimatorConfig",
    "WrenyiError",
    "InequalityReport",
    "WeightFunction",
]
