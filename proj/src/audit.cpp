#include "spatialfair/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace spatialfair {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::size_t> non_overlapping_indices(const std::vector<ScoredRegion>& evidence) {
    // Best region per center, first occurrence wins ties.
    std::map<std::int64_t, std::size_t> best_by_center;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < evidence.size(); ++i) {
        const auto& id = evidence[i].region.center_id;
        if (!id) {
            candidates.push_back(i);
            continue;
        }
        auto [it, inserted] = best_by_center.try_emplace(*id, i);
        if (!inserted && evidence[i].llr > evidence[it->second].llr) it->second = i;
    }
    for (const auto& [id, i] : best_by_center) candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (evidence[a].llr != evidence[b].llr) return evidence[a].llr > evidence[b].llr;
        return a < b;
    });

    std::vector<std::size_t> kept;
    for (auto i : candidates) {
        const bool clash = std::any_of(kept.begin(), kept.end(),
                                       [&](std::size_t k) { return overlaps(evidence[i].region, evidence[k].region); });
        if (!clash) kept.push_back(i);
    }
    return kept;
}

nlohmann::json scored_to_json(const ScoredRegion& s, std::size_t rank) {
    nlohmann::json j{{"rank", rank},
                     {"region", region_to_json(s.region)},
                     {"n", s.counts.n},
                     {"p", s.counts.p},
                     {"rho", s.local_rate},
                     {"llr", s.llr}};
    j["p_value"] = s.p_value ? nlohmann::json(*s.p_value) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json verdict_to_json(const AuditVerdict& v) {
    return {{"fair", v.fair},          {"p_value", v.p_value}, {"tau_log", v.tau_log},
            {"alpha", v.alpha},        {"w", v.worlds},        {"critical_llr", v.critical_llr},
            {"label", v.fair ? "FAIR" : "UNFAIR"}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

void validate(const AuditOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (opts.worlds < 2) throw std::invalid_argument("need at least 2 worlds (one simulated)");
    if (std::floor(opts.alpha * static_cast<double>(opts.worlds) + 1e-9) < 1.0) {
        throw std::invalid_argument("alpha * w must be >= 1: " + std::to_string(opts.worlds) +
                                    " worlds cannot resolve alpha = " + std::to_string(opts.alpha));
    }
    if (opts.resolution && (opts.resolution->gx < 1 || opts.resolution->gy < 1))
        throw std::invalid_argument("index resolution must be at least 1x1");
}

void validate(const AuditConfig& cfg) {
    if (cfg.data_path.empty()) throw std::invalid_argument("no dataset path given");
    validate(cfg.options);
    std::visit(overloaded{
                   [](const GridFamily& g) {
                       if (g.mx < 1 || g.my < 1) throw std::invalid_argument("grid dimensions must be >= 1");
                   },
                   [](const RandomPartitionFamily& r) {
                       if (r.count < 1) throw std::invalid_argument("need at least one random partitioning");
                       if (r.min_splits < 1 || r.min_splits > r.max_splits)
                           throw std::invalid_argument("need 1 <= min splits <= max splits");
                   },
                   [](const SquareFamily& s) {
                       if (s.centers < 1) throw std::invalid_argument("need at least one center");
                       if (s.sides.empty()) throw std::invalid_argument("need at least one side length");
                   },
                   [](const FileFamily& f) {
                       if (f.path.empty()) throw std::invalid_argument("empty region file path");
                   },
               },
               cfg.family);
}

nlohmann::json to_json(const RegionFamilySpec& spec) {
    return std::visit(overloaded{
                          [](const GridFamily& g) -> nlohmann::json {
                              return {{"kind", "regular"}, {"mx", g.mx}, {"my", g.my}};
                          },
                          [](const RandomPartitionFamily& r) -> nlohmann::json {
                              return {{"kind", "random"},
                                      {"count", r.count},
                                      {"min_splits", r.min_splits},
                                      {"max_splits", r.max_splits}};
                          },
                          [](const SquareFamily& s) -> nlohmann::json {
                              return {{"kind", "squares"},
                                      {"centers", s.centers},
                                      {"sides", s.sides},
                                      {"kmeans_iters", s.kmeans_iters}};
                          },
                          [](const FileFamily& f) -> nlohmann::json { return {{"kind", "file"}, {"path", f.path}}; },
                      },
                      spec);
}

nlohmann::json to_json(const AuditOptions& opts) {
    nlohmann::json j{{"alpha", opts.alpha},
                     {"worlds", opts.worlds},
                     {"seed", opts.seed},
                     {"direction", std::string(to_string(opts.direction))},
                     {"threads", opts.threads},
                     {"top_k", opts.top_k}};
    j["resolution"] = opts.resolution ? nlohmann::json{opts.resolution->gx, opts.resolution->gy}
                                      : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const AuditConfig& cfg) {
    auto j = to_json(cfg.options);
    j["data"] = cfg.data_path;
    j["mode"] = std::string(to_string(cfg.mode));
    j["regions"] = to_json(cfg.family);
    return j;
}

RegionFamily build_region_family(const Dataset& d, const RegionFamilySpec& spec, std::uint64_t seed) {
    RegionFamily family;
    family.provenance = to_json(spec);
    std::visit(overloaded{
                   [&](const GridFamily& g) {
                       const Partitioning part = regular_grid(d.bbox(), g.mx, g.my);
                       family.regions = flatten(std::span(&part, 1));
                   },
                   [&](const RandomPartitionFamily& r) {
                       const auto parts = random_partitionings(d.bbox(), r.count, r.min_splits, r.max_splits, seed);
                       family.regions = flatten(parts);
                       family.provenance["seed"] = seed;
                   },
                   [&](const SquareFamily& s) {
                       const auto centers = kmeans_centers(d, s.centers, seed, s.kmeans_iters);
                       family.regions = square_scan_set(centers, s.sides);
                       family.provenance["seed"] = seed;
                   },
                   [&](const FileFamily& f) {
                       auto loaded = load_region_family(f.path);
                       family.regions = std::move(loaded.regions);
                       family.provenance["source"] = std::move(loaded.provenance);
                   },
               },
               spec);
    return family;
}

std::vector<ScoredRegion> select_non_overlapping(const std::vector<ScoredRegion>& evidence) {
    std::vector<ScoredRegion> out;
    for (auto i : non_overlapping_indices(evidence)) out.push_back(evidence[i]);
    return out;
}

AuditReport run_audit(const Dataset& d, const RegionFamily& family, const AuditOptions& opts) {
    validate(opts);
    if (family.regions.empty()) throw std::invalid_argument("region family is empty");

    AuditReport report;
    report.config = to_json(opts);
    report.region_provenance = family.provenance;
    report.region_count = family.regions.size();
    report.dataset_size = d.size();
    report.dataset_positives = d.positives();
    report.dataset_rho = d.rho();

    auto t = Clock::now();
    const auto ix = SpatialIndex::build(d, opts.resolution.value_or(GridResolution::default_for(d.size())));
    report.timings_ms["index"] = elapsed_ms(t);

    t = Clock::now();
    const auto scan = scan_regions(ix, family.regions, opts.direction);
    report.timings_ms["scan"] = elapsed_ms(t);

    t = Clock::now();
    const std::int64_t simulated = opts.worlds - 1;
    const auto N = static_cast<std::int64_t>(d.size());
    if (d.positives() == 0 || d.positives() == N) {
        // Every fair world equals the real one; all statistics are zero.
        report.null_distribution = {std::vector<double>(static_cast<std::size_t>(simulated), 0.0), opts.worlds,
                                    opts.seed, opts.direction};
    } else {
        const CompiledRegions compiled(ix, family.regions);
        SimulationOptions sim;
        sim.num_worlds = simulated;
        sim.seed = opts.seed;
        sim.direction = opts.direction;
        sim.threads = opts.threads;
        report.null_distribution = simulate_worlds(ix, compiled, d.rho(), sim);
    }
    report.timings_ms["simulate"] = elapsed_ms(t);

    report.verdict = make_verdict(scan.tau_log, report.null_distribution, opts.alpha);
    if (!report.verdict.fair) {
        report.evidence = significant_regions(scan.scored, report.verdict.critical_llr, report.null_distribution);
        if (opts.top_k > 0 && report.evidence.size() > opts.top_k) report.evidence.resize(opts.top_k);
        report.non_overlapping = select_non_overlapping(report.evidence);
    }
    return report;
}

AuditReport audit(const AuditConfig& cfg) {
    validate(cfg);
    auto t = Clock::now();
    const auto d = load_dataset(cfg.data_path, cfg.mode);
    const double load_ms = elapsed_ms(t);

    t = Clock::now();
    const auto family = build_region_family(d, cfg.family, cfg.options.seed);
    const double regions_ms = elapsed_ms(t);

    auto report = run_audit(d, family, cfg.options);
    report.config = to_json(cfg);
    report.timings_ms["load"] = load_ms;
    report.timings_ms["regions"] = regions_ms;
    return report;
}

nlohmann::json report_to_json(const AuditReport& r) {
    nlohmann::json evidence = nlohmann::json::array();
    for (std::size_t i = 0; i < r.evidence.size(); ++i) evidence.push_back(scored_to_json(r.evidence[i], i + 1));
    nlohmann::json disjoint = nlohmann::json::array();
    for (std::size_t i = 0; i < r.non_overlapping.size(); ++i)
        disjoint.push_back(scored_to_json(r.non_overlapping[i], i + 1));
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [phase, ms] : r.timings_ms) timings[phase] = ms;

    return {{"schema", 1},
            {"config", r.config},
            {"dataset", {{"N", r.dataset_size}, {"P", r.dataset_positives}, {"rho", r.dataset_rho}}},
            {"regions", {{"count", r.region_count}, {"provenance", r.region_provenance}}},
            {"verdict", verdict_to_json(r.verdict)},
            {"evidence", evidence},
            {"non_overlapping", disjoint},
            {"selection", "best region per center, then greedy by llr skipping overlaps"},
            {"timings", timings}};
}

nlohmann::json report_geojson(const AuditReport& r) {
    const auto kept = non_overlapping_indices(r.evidence);
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t i = 0; i < r.evidence.size(); ++i) {
        const auto& s = r.evidence[i];
        const auto& g = s.region;
        nlohmann::json ring = nlohmann::json::array(
            {{g.xmin, g.ymin}, {g.xmax, g.ymin}, {g.xmax, g.ymax}, {g.xmin, g.ymax}, {g.xmin, g.ymin}});
        nlohmann::json props{{"rank", i + 1},
                             {"n", s.counts.n},
                             {"p", s.counts.p},
                             {"rho", s.local_rate},
                             {"llr", s.llr},
                             {"non_overlapping", std::find(kept.begin(), kept.end(), i) != kept.end()}};
        props["p_value"] = s.p_value ? nlohmann::json(*s.p_value) : nlohmann::json(nullptr);
        if (g.center_id) props["center_id"] = *g.center_id;
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}},
                            {"properties", props}});
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

void export_report(const AuditReport& r, const std::string& dir) {
    std::filesystem::path out(dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
    write_json(out / "report.json", report_to_json(r));
    write_json(out / "regions.geojson", report_geojson(r));
    write_json(out / "nulldist.json", to_json(r.null_distribution));
}

AuditVerdict recompute_verdict(const nlohmann::json& report, const MaxStatDistribution& dist) {
    const auto& v = report.at("verdict");
    return make_verdict(v.at("tau_log").get<double>(), dist, v.at("alpha").get<double>());
}

}  // namespace spatialfair
