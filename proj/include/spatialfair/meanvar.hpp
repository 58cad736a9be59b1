#pragma once

// MeanVar baseline: mean over partitionings of the population variance of
// per-partition positive rates. Empty partitions are left out.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialfair/region_gen.hpp"
#include "spatialfair/spatial_index.hpp"

namespace spatialfair {

struct Contribution {
    Region region;
    RegionCounts counts;
    double local_rate = 0.0;
    double contribution = 0.0;  // (rate - mean rate of its partitioning)^2
    std::size_t partitioning = 0;
};

struct PartitioningVariance {
    std::string provenance;
    double variance = 0.0;
    std::size_t nonempty = 0;
};

struct MeanVarReport {
    double mean_var = 0.0;
    std::vector<PartitioningVariance> per_partitioning;
    std::vector<Contribution> top_contributors;
};

double partitioning_variance(const SpatialIndex& ix, const Partitioning& part);

// Nonempty partitions ranked by squared deviation from the partitioning's
// unweighted mean rate, largest first; at most k.
std::vector<Contribution> top_contributions(const SpatialIndex& ix, const Partitioning& part, std::size_t k);

// Pools the contributions of every partitioning when ranking the top k.
MeanVarReport mean_var(const SpatialIndex& ix, std::span<const Partitioning> parts, std::size_t top_k = 0);

nlohmann::json to_json(const MeanVarReport& report);

}  // namespace spatialfair
