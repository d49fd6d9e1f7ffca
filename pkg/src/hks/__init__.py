"""Higher-order Kolmogorov-Smirnov two-sample tests."""

from .core import NumericalError, PooledSample, SampleFormatError, TwoSamples, ingest_samples, pool_and_sort
from .distributions import DistributionSpec, parse_spec
from .nulls import NullDistribution, asymptotic_null, decision_threshold, gp_covariance, permutation_null, permutation_test
from .statistic import (
    HksConfig,
    TestResult,
    grid_error_bound,
    hks_aggregate,
    hks_exact,
    hks_grid,
    hks_wang,
    ks_classic,
)

__version__ = "0.1.0"

__all__ = [
    "DistributionSpec",
    "HksConfig",
    "NullDistribution",
    "NumericalError",
    "PooledSample",
    "SampleFormatError",
    "TestResult",
    "TwoSamples",
    "asymptotic_null",
    "decision_threshold",
    "gp_covariance",
    "grid_error_bound",
    "hks_aggregate",
    "hks_exact",
    "hks_grid",
    "hks_wang",
    "ingest_samples",
    "ks_classic",
    "parse_spec",
    "permutation_null",
    "permutation_test",
    "pool_and_sort",
]
