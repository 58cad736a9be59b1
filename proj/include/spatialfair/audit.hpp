#pragma once

// End-to-end audit: load, index, generate candidate regions, scan the real
// outcomes, simulate fair worlds, decide, and collect evidence.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spatialfair/core.hpp"
#include "spatialfair/monte_carlo.hpp"
#include "spatialfair/region_gen.hpp"
#include "spatialfair/scan_statistic.hpp"
#include "spatialfair/spatial_index.hpp"

namespace spatialfair {

struct GridFamily {
    int mx = 1;
    int my = 1;
};

struct RandomPartitionFamily {
    int count = 100;
    int min_splits = 10;
    int max_splits = 40;
};

struct SquareFamily {
    int centers = 100;
    std::vector<double> sides = default_side_lengths();
    int kmeans_iters = 100;
};

struct FileFamily {
    std::string path;
};

using RegionFamilySpec = std::variant<GridFamily, RandomPartitionFamily, SquareFamily, FileFamily>;

struct AuditOptions {
    double alpha = 0.005;
    std::int64_t worlds = 1000;  // w, including the real world
    std::uint64_t seed = 0;      // master seed for regions and simulated worlds
    Direction direction = Direction::two_sided;
    unsigned threads = 0;
    std::optional<GridResolution> resolution;
    std::size_t top_k = 0;  // 0 keeps every significant region
};

struct AuditConfig {
    std::string data_path;
    MeasureMode mode = MeasureMode::statistical_parity;
    RegionFamilySpec family = GridFamily{};
    AuditOptions options;
};

// Throws std::invalid_argument describing the first problem found.
void validate(const AuditOptions& opts);
void validate(const AuditConfig& cfg);

nlohmann::json to_json(const AuditOptions& opts);
nlohmann::json to_json(const AuditConfig& cfg);
nlohmann::json to_json(const RegionFamilySpec& spec);

RegionFamily build_region_family(const Dataset& d, const RegionFamilySpec& spec, std::uint64_t seed);

struct AuditReport {
    AuditVerdict verdict;
    std::vector<ScoredRegion> evidence;         // significant, llr descending
    std::vector<ScoredRegion> non_overlapping;  // disjoint subset of evidence
    MaxStatDistribution null_distribution;
    nlohmann::json config;
    nlohmann::json region_provenance;
    std::size_t region_count = 0;
    std::size_t dataset_size = 0;
    std::int64_t dataset_positives = 0;
    double dataset_rho = 0.0;
    std::map<std::string, double> timings_ms;
};

// Keeps the best region per center_id (regions without one are their own
// center), then admits centers greedily by llr, skipping any region that
// overlaps one already admitted with positive area.
std::vector<ScoredRegion> select_non_overlapping(const std::vector<ScoredRegion>& evidence);

AuditReport run_audit(const Dataset& d, const RegionFamily& family, const AuditOptions& opts);
AuditReport audit(const AuditConfig& cfg);

nlohmann::json report_to_json(const AuditReport& r);
nlohmann::json report_geojson(const AuditReport& r);

// Writes report.json, regions.geojson and nulldist.json into `dir`.
void export_report(const AuditReport& r, const std::string& dir);

// Re-derives the verdict of a saved report from its null distribution.
AuditVerdict recompute_verdict(const nlohmann::json& report, const MaxStatDistribution& dist);

}  // namespace spatialfair
