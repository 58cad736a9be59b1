"""Spatial fairness auditing with a Bernoulli scan statistic."""

from ._core import (
    DataError,
    Dataset,
    Region,
    audit,
    critical_value,
    dataset_from_columns,
    gen_fair_bernoulli,
    gen_planted,
    gen_uniform_split,
    global_p_value,
    kmeans_centers,
    llr_from_counts,
    load_dataset,
    log_lik_null_max,
    mean_var,
    random_partitionings,
    range_count,
    regular_grid,
)

__all__ = [
    "DataError",
    "Dataset",
    "Region",
    "audit",
    "critical_value",
    "dataset_from_columns",
    "gen_fair_bernoulli",
    "gen_planted",
    "gen_uniform_split",
    "global_p_value",
    "kmeans_centers",
    "llr_from_counts",
    "load_dataset",
    "log_lik_null_max",
    "mean_var",
    "random_partitionings",
    "range_count",
    "regular_grid",
]
