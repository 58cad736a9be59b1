#pragma once

// Bernoulli scan statistic: log-likelihood ratio of "one positive rate inside
// the region, another outside" against "a single rate everywhere".

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spatialfair/geometry.hpp"
#include "spatialfair/spatial_index.hpp"

namespace spatialfair {

enum class Direction { two_sided, higher_inside, lower_inside };

std::string_view to_string(Direction dir);
// Accepts two-sided / higher-inside / lower-inside and the underscore forms.
Direction parse_direction(std::string_view text);

struct ScoredRegion {
    Region region;
    RegionCounts counts;
    double local_rate = 0.0;  // p / n, 0 for empty regions
    double llr = 0.0;
    std::optional<double> p_value;
};

// P ln(P/N) + (N-P) ln(1 - P/N) with 0 ln 0 = 0.
double log_lik_null_max(std::int64_t N, std::int64_t P);

// ln L1max - ln L0max for a region holding n observations and p positives out
// of N and P overall. Zero when the region is empty, covers everything, has
// exactly the outside rate, or points the wrong way for a one-sided test.
// Throws std::logic_error when the counts are inconsistent.
double llr_from_counts(std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P,
                       Direction dir = Direction::two_sided);

// Same statistic for a fixed (N, P) using a table of x ln x, 0 <= x <= N.
// Used on the hot path of the Monte Carlo simulation.
class LlrEvaluator {
public:
    LlrEvaluator(std::int64_t N, std::int64_t P, Direction dir);
    // Shares the x ln x table of `base` with a different positive total.
    LlrEvaluator(const LlrEvaluator& base, std::int64_t P);

    double operator()(std::int64_t n, std::int64_t p) const;

    std::int64_t total() const { return N_; }
    std::int64_t positives() const { return P_; }

private:
    std::int64_t N_;
    std::int64_t P_;
    Direction dir_;
    double null_term_;
    std::shared_ptr<const std::vector<double>> xlogx_;
};

struct ScanResult {
    std::vector<ScoredRegion> scored;  // same order as the input regions
    double tau_log = 0.0;              // max llr
};

ScanResult scan_regions(const SpatialIndex& ix, std::span<const Region> regions,
                        Direction dir = Direction::two_sided);

// Max llr over the compiled regions under the labeling of `ix`. `p_scratch`
// must have compiled.size() entries.
double max_llr(const SpatialIndex& ix, const CompiledRegions& compiled, const LlrEvaluator& llr,
               std::span<std::int64_t> p_scratch);

}  // namespace spatialfair
