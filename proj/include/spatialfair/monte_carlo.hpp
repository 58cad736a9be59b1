#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialfair/scan_statistic.hpp"
#include "spatialfair/spatial_index.hpp"

namespace spatialfair {

// Max-llr values of the w - 1 simulated fair worlds, sorted descending.
struct MaxStatDistribution {
    std::vector<double> values;
    std::int64_t worlds = 0;  // w, counting the real world
    std::uint64_t seed = 0;
    Direction direction = Direction::two_sided;
};

struct AuditVerdict {
    double tau_log = 0.0;
    double p_value = 1.0;
    double alpha = 0.005;
    bool fair = true;
    double critical_llr = 0.0;
    std::int64_t worlds = 0;
};

struct SimulationOptions {
    std::int64_t num_worlds = 999;  // simulated worlds, w - 1
    std::uint64_t seed = 0;
    Direction direction = Direction::two_sided;
    unsigned threads = 0;  // 0 = hardware concurrency
};

// World j relabels the real locations with i.i.d. Bernoulli(rho) outcomes
// drawn from stream j of the seed and records the max llr over `regions`.
// The result does not depend on the thread count.
MaxStatDistribution simulate_worlds(const SpatialIndex& ix, std::span<const Region> regions, double rho,
                                    const SimulationOptions& opts);
// Same, for regions already compiled against `ix`.
MaxStatDistribution simulate_worlds(const SpatialIndex& ix, const CompiledRegions& compiled, double rho,
                                    const SimulationOptions& opts);

// k / w where k = 1 + #{simulated values >= tau_log}.
double global_p_value(double tau_log, const MaxStatDistribution& dist);

// floor(alpha * w)-th largest simulated max. Throws when alpha * w < 1.
double critical_value(const MaxStatDistribution& dist, double alpha);

AuditVerdict make_verdict(double tau_log, const MaxStatDistribution& dist, double alpha);

// Regions with n > 0 and llr > cutoff, sorted by llr descending (stable), each
// with its p-value against the max-statistic distribution.
std::vector<ScoredRegion> significant_regions(std::span<const ScoredRegion> scored, double cutoff,
                                              const MaxStatDistribution& dist);

nlohmann::json to_json(const MaxStatDistribution& dist);
MaxStatDistribution null_distribution_from_json(const nlohmann::json& j);

}  // namespace spatialfair
