"""Simulator for group-level privacy-enhancing aggregation of IoT time series.

Suppliers summarize their series with exact 1D k-means, report through
groups, and a consumer aggregates the group reports. The package measures
how grouping trades privacy (local group error) against accuracy (global
error) and runs reproducible parameter sweeps.
"""

__version__ = "0.1.0"

from .aggregate import aggregate, aggregate_epoch, distributed_share, group_aggregate, recombine_shares
from .core import (
    AggregationFunction,
    Group,
    GroupPartition,
    MetricRecord,
    SummarizationPolicy,
    SummarizedSeries,
    SupplierSeries,
)
from .errors import (
    ConfigError,
    DatasetError,
    InsufficientData,
    InvalidInput,
    InvalidParameter,
    ParseError,
    PGAError,
)
from .grouping import GroupingStrategy, SizeDistribution, SizeKind, equal_partition, partition, sample_sizes
from .metrics import (
    global_error,
    local_error,
    local_error_term,
    local_group_error,
    mape_global_error,
    mape_local_error,
    privacy_correlation,
    total_group_error,
)
from .summarize import disperse_levels, kmeans_1d, summarize, summarize_values, transfer_centroids

__all__ = [
    "AggregationFunction", "ConfigError", "DatasetError", "Group", "GroupPartition",
    "GroupingStrategy", "InsufficientData", "InvalidInput", "InvalidParameter", "MetricRecord",
    "PGAError", "ParseError", "SizeDistribution", "SizeKind", "SummarizationPolicy",
    "SummarizedSeries", "SupplierSeries", "aggregate", "aggregate_epoch", "disperse_levels",
    "distributed_share", "equal_partition", "global_error", "group_aggregate", "kmeans_1d",
    "local_error", "local_error_term", "local_group_error", "mape_global_error",
    "mape_local_error", "partition", "privacy_correlation", "recombine_shares", "sample_sizes",
    "summarize", "summarize_values", "total_group_error", "transfer_centroids",
]
