#pragma once

// Synthetic audit datasets. Every generator is deterministic under its seed.

#include <cstdint>
#include <span>
#include <vector>

#include "spatialfair/core.hpp"
#include "spatialfair/geometry.hpp"

namespace spatialfair {

// n/2 points uniform in each half of `rect` (split at the x midpoint) and
// exactly n/2 positives: round(2/3 of them) on the left, the rest on the
// right, placed on uniformly chosen points of each half. n must be even.
Dataset gen_uniform_split(std::int64_t n, const Region& rect, std::uint64_t seed);

// i.i.d. Bernoulli(rho) outcomes at the given locations.
Dataset gen_fair_bernoulli(std::span<const Point> locations, double rho, std::uint64_t seed);

// Exactly `positives` positive outcomes on a uniformly random subset of the
// locations; fair by construction with a fixed total.
Dataset gen_fair_exact(std::span<const Point> locations, std::int64_t positives, std::uint64_t seed);

// Uniform locations in `rect`; Bernoulli(rho_in) inside `plant`,
// Bernoulli(rho_bg) elsewhere.
Dataset gen_planted(std::int64_t n, const Region& rect, const Region& plant, double rho_bg, double rho_in,
                    std::uint64_t seed);

std::vector<Point> uniform_locations(std::int64_t n, const Region& rect, std::uint64_t seed);

// Gaussian clusters with uniformly placed centers plus a uniform background
// share; points falling outside `rect` are redrawn.
std::vector<Point> clustered_locations(std::int64_t n, const Region& rect, int clusters, double spread,
                                       double background_share, std::uint64_t seed);

// `count` locations drawn without replacement.
std::vector<Point> sample_locations(std::span<const Point> pool, std::int64_t count, std::uint64_t seed);

}  // namespace spatialfair
