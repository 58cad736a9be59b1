#pragma once

// Candidate region families: regular grids, random rectangular
// partitionings and square scan sets around k-means centers.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialfair/core.hpp"
#include "spatialfair/geometry.hpp"

namespace spatialfair {

struct RegularProvenance {
    int mx = 1;
    int my = 1;
};

struct RandomProvenance {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;  // stream index under `seed`
    int horizontal_splits = 0;
    int vertical_splits = 0;
};

using PartitioningProvenance = std::variant<RegularProvenance, RandomProvenance>;

std::string describe(const PartitioningProvenance& prov);

// Disjoint cover of a bounding box, row-major (y outer, x inner).
struct Partitioning {
    std::vector<Region> regions;
    PartitioningProvenance provenance;
};

Partitioning regular_grid(const Region& bbox, int mx, int my);

// Each partitioning draws its horizontal and vertical split counts
// independently and uniformly from [min_splits, max_splits], then places the
// splits uniformly inside the bbox. Partitioning i uses its own PRNG stream,
// so partitioning i is the same whatever `count` is.
std::vector<Partitioning> random_partitionings(const Region& bbox, int count, int min_splits = 10,
                                               int max_splits = 40, std::uint64_t seed = 0);

struct KMeansResult {
    std::vector<Point> centers;
    std::vector<double> inertia_trace;  // inertia after every assignment step
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding on all locations (duplicates act as
// weights). Stops when no assignment changes or after max_iters.
KMeansResult kmeans(std::span<const Point> points, int k, std::uint64_t seed, int max_iters = 100);
std::vector<Point> kmeans_centers(const Dataset& d, int k, std::uint64_t seed, int max_iters = 100);

// 0.1, 0.2, ..., 2.0
std::vector<double> default_side_lengths();
// `count` evenly spaced values from `first` to `last` inclusive.
std::vector<double> linspace_sides(double first, double last, int count);

// |centers| * |sides| squares centered on each center, tagged with the
// center's position in `centers`. Squares are not clipped to any bbox.
std::vector<Region> square_scan_set(std::span<const Point> centers, std::span<const double> side_lengths);

// Every partition of every partitioning, in order. Each partition gets its
// own center_id so that non-overlap selection treats them independently.
std::vector<Region> flatten(std::span<const Partitioning> parts);

// Replayable region family documents.
struct RegionFamily {
    std::vector<Region> regions;
    // {"kind": "regular" | "random" | "squares" | ..., plus the parameters}
    nlohmann::json provenance = nlohmann::json::object();
};

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);
nlohmann::json region_family_to_json(const RegionFamily& family);
RegionFamily region_family_from_json(const nlohmann::json& j);
RegionFamily load_region_family(const std::string& path);
void save_region_family(const std::string& path, const RegionFamily& family);

}  // namespace spatialfair
