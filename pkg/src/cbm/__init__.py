"""Exact and Monte Carlo moments of traces for circular beta-ensembles."""

from .errors import CacheError, CapacityError, CbmError, ConfigError, DomainError
from .jack import build_jack_table, c_lambda, big_theta, theta, verify_orthogonality
from .moments import EnsembleParams, exact_moment, i_of, moment_report
from .partitions import conjugate, dominance_leq, enumerate_partitions, z_of

__version__ = "0.1.0"

__all__ = [
    "CacheError",
    "CapacityError",
    "CbmError",
    "ConfigError",
    "DomainError",
    "EnsembleParams",
    "big_theta",
    "build_jack_table",
    "c_lambda",
    "conjugate",
    "dominance_leq",
    "enumerate_partitions",
    "exact_moment",
    "i_of",
    "moment_report",
    "theta",
    "verify_orthogonality",
    "z_of",
]
