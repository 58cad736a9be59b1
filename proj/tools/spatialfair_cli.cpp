// spatialfair: audit spatial fairness of binary classifier outcomes.
//
//   spatialfair audit     --data FILE (--grid WxH | --random-partitionings K | --squares | --regions-file F)
//   spatialfair meanvar   --data FILE (--grid WxH | --random-partitionings K)
//   spatialfair gen-synth --kind uniform-split|fair|planted --out FILE
//   spatialfair regions   --data FILE (--grid WxH | --random-partitionings K | --squares) --out FILE

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spatialfair/audit.hpp"
#include "spatialfair/meanvar.hpp"
#include "spatialfair/synth.hpp"

namespace sf = spatialfair;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnfair = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<long long, long long> parse_pair(const std::string& text, const std::string& sep, const char* what) {
    const auto at = text.find(sep);
    try {
        if (at == std::string::npos) throw std::invalid_argument(what);
        std::size_t used_a = 0, used_b = 0;
        const auto a = std::stoll(text.substr(0, at), &used_a);
        const auto rest = text.substr(at + sep.size());
        const auto b = std::stoll(rest, &used_b);
        if (used_a != at || used_b != rest.size()) throw std::invalid_argument(what);
        return {a, b};
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    }
}

std::vector<double> parse_doubles(const std::string& text, char sep, std::size_t expected, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    try {
        while (std::getline(ss, item, sep)) {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(what);
        }
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    }
    if (out.size() != expected) throw UsageError(std::string("invalid ") + what + " '" + text + "'");
    return out;
}

sf::Region parse_rect(const std::string& text, const char* what) {
    const auto v = parse_doubles(text, ',', 4, what);
    sf::Region r{v[0], v[1], v[2], v[3], std::nullopt};
    if (!r.valid()) throw UsageError(std::string(what) + " must be xmin,ymin,xmax,ymax with min <= max");
    return r;
}

std::vector<double> parse_sides(const std::string& text) {
    const auto v = parse_doubles(text, ':', 3, "--sides (expected FIRST:LAST:COUNT)");
    if (v[2] < 1 || v[2] != static_cast<double>(static_cast<int>(v[2])))
        throw UsageError("--sides count must be a positive integer");
    return sf::linspace_sides(v[0], v[1], static_cast<int>(v[2]));
}

// Flags override the JSON config file; `key` is looked up in the config only
// when the flag was not given.
template <class T>
void merge(const CLI::App& app, const std::string& flag, const json& cfg, const char* key, T& value) {
    const auto* opt = app.get_option_no_throw(flag);
    if (opt == nullptr || opt->count() > 0 || !cfg.contains(key)) return;
    value = cfg.at(key).get<T>();
}

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
        auto j = json::parse(in);
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
}

// Options shared by subcommands that select a family of regions.
struct FamilyFlags {
    std::string grid;
    int random_partitionings = 0;
    std::string splits = "10..40";
    bool squares = false;
    int centers = 100;
    std::string sides = "0.1:2.0:20";
    std::string regions_file;

    void add_to(CLI::App& app, bool allow_squares, bool allow_file) {
        app.add_option("--grid", grid, "Regular grid partitioning, COLSxROWS (e.g. 100x50)");
        app.add_option("--random-partitionings", random_partitionings, "Number of random rectangular partitionings");
        app.add_option("--splits", splits, "Split-count range for random partitionings, MIN..MAX")
            ->capture_default_str();
        if (allow_squares) {
            app.add_flag("--squares", squares, "Square scan set around k-means centers");
            app.add_option("--centers", centers, "Number of k-means centers for --squares")->capture_default_str();
            app.add_option("--sides", sides, "Square side lengths FIRST:LAST:COUNT (degrees)")->capture_default_str();
        }
        if (allow_file) app.add_option("--regions-file", regions_file, "Region family JSON to scan");
    }

    void merge_config(const CLI::App& app, const json& cfg) {
        merge(app, "--grid", cfg, "grid", grid);
        merge(app, "--random-partitionings", cfg, "random_partitionings", random_partitionings);
        merge(app, "--splits", cfg, "splits", splits);
        merge(app, "--squares", cfg, "squares", squares);
        merge(app, "--centers", cfg, "centers", centers);
        merge(app, "--sides", cfg, "sides", sides);
        merge(app, "--regions-file", cfg, "regions_file", regions_file);
    }

    sf::RegionFamilySpec resolve() const {
        const int chosen = int(!grid.empty()) + int(random_partitionings > 0) + int(squares) +
                           int(!regions_file.empty());
        if (chosen != 1) {
            throw UsageError(
                "choose exactly one region family: --grid, --random-partitionings, --squares or --regions-file");
        }
        if (!grid.empty()) {
            const auto [mx, my] = parse_pair(grid, "x", "--grid (expected COLSxROWS)");
            if (mx < 1 || my < 1) throw UsageError("--grid dimensions must be >= 1");
            return sf::GridFamily{static_cast<int>(mx), static_cast<int>(my)};
        }
        if (random_partitionings > 0) {
            const auto [lo, hi] = parse_pair(splits, "..", "--splits (expected MIN..MAX)");
            return sf::RandomPartitionFamily{random_partitionings, static_cast<int>(lo), static_cast<int>(hi)};
        }
        if (squares) {
            sf::SquareFamily s;
            s.centers = centers;
            s.sides = parse_sides(sides);
            return s;
        }
        return sf::FileFamily{regions_file};
    }
};

std::optional<sf::GridResolution> parse_resolution(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto [gx, gy] = parse_pair(text, "x", "--resolution (expected GXxGY)");
    if (gx < 1 || gy < 1 || gx > 1 << 16 || gy > 1 << 16) throw UsageError("--resolution must be between 1 and 65536");
    return sf::GridResolution{static_cast<int>(gx), static_cast<int>(gy)};
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// audit

struct AuditFlags {
    std::string config;
    std::string data;
    std::string mode = "parity";
    FamilyFlags family;
    double alpha = 0.005;
    std::int64_t worlds = 999;
    std::uint64_t seed = 0;
    std::string direction = "two-sided";
    std::size_t top_k = 0;
    std::string out = "spatialfair-out";
    bool fail_on_unfair = false;
    unsigned threads = 0;
    std::string resolution;
};

void add_common(CLI::App& app, std::string& config, std::string& data, std::string& mode) {
    app.add_option("--config", config, "JSON config file; flags given on the command line take precedence");
    app.add_option("--data", data, "Input CSV with header id,lon,lat,outcome[,label]");
    app.add_option("--mode", mode, "Measure: parity, opportunity or predictive-equality")
        ->check(CLI::IsMember({"parity", "opportunity", "predictive-equality"}))
        ->capture_default_str();
}

void setup_audit(CLI::App& app, AuditFlags& f) {
    add_common(app, f.config, f.data, f.mode);
    f.family.add_to(app, true, true);
    app.add_option("--alpha", f.alpha, "Significance level")->capture_default_str();
    app.add_option("--worlds", f.worlds, "Number of simulated fair worlds (w - 1)")->capture_default_str();
    app.add_option("--seed", f.seed, "Master seed for regions and simulations")->capture_default_str();
    app.add_option("--direction", f.direction, "two-sided, higher-inside or lower-inside")
        ->check(CLI::IsMember({"two-sided", "higher-inside", "lower-inside"}))
        ->capture_default_str();
    app.add_option("--top-k", f.top_k, "Keep at most K evidence regions (0 = all)")->capture_default_str();
    app.add_option("--out", f.out, "Output directory for report.json, regions.geojson, nulldist.json")
        ->capture_default_str();
    app.add_flag("--fail-on-unfair", f.fail_on_unfair, "Exit with status 2 when the verdict is UNFAIR");
    app.add_option("--threads", f.threads, "Worker threads (0 = all cores); output does not depend on it")
        ->capture_default_str();
    app.add_option("--resolution", f.resolution, "Spatial index grid GXxGY (default ceil(sqrt(N)) per axis)");
}

int run_audit(const CLI::App& app, AuditFlags f) {
    const json cfg = read_config(f.config);
    merge(app, "--data", cfg, "data", f.data);
    merge(app, "--mode", cfg, "mode", f.mode);
    f.family.merge_config(app, cfg);
    merge(app, "--alpha", cfg, "alpha", f.alpha);
    merge(app, "--worlds", cfg, "worlds", f.worlds);
    merge(app, "--seed", cfg, "seed", f.seed);
    merge(app, "--direction", cfg, "direction", f.direction);
    merge(app, "--top-k", cfg, "top_k", f.top_k);
    merge(app, "--out", cfg, "out", f.out);
    merge(app, "--fail-on-unfair", cfg, "fail_on_unfair", f.fail_on_unfair);
    merge(app, "--threads", cfg, "threads", f.threads);
    merge(app, "--resolution", cfg, "resolution", f.resolution);
    if (f.data.empty()) throw UsageError("--data is required");
    if (f.worlds < 1) throw UsageError("--worlds must be >= 1");

    sf::AuditConfig config;
    config.data_path = f.data;
    config.mode = sf::parse_measure_mode(f.mode);
    config.family = f.family.resolve();
    config.options.alpha = f.alpha;
    config.options.worlds = f.worlds + 1;
    config.options.seed = f.seed;
    config.options.direction = sf::parse_direction(f.direction);
    config.options.threads = f.threads;
    config.options.top_k = f.top_k;
    config.options.resolution = parse_resolution(f.resolution);
    try {
        sf::validate(config);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::cerr << "resolved config: " << sf::to_json(config).dump() << '\n';

    const auto report = sf::audit(config);
    sf::export_report(report, f.out);
    const auto& v = report.verdict;
    if (v.fair) {
        std::cout << "FAIR p=" << format_number(v.p_value) << '\n';
    } else {
        std::cout << "UNFAIR p=" << format_number(v.p_value) << " tau_log=" << format_number(v.tau_log) << '\n';
    }
    std::cerr << "evidence regions: " << report.evidence.size()
              << ", non-overlapping: " << report.non_overlapping.size() << ", output: " << f.out << '\n';
    return (!v.fair && f.fail_on_unfair) ? kExitUnfair : kExitOk;
}

// ---------------------------------------------------------------------------
// meanvar

struct MeanVarFlags {
    std::string config;
    std::string data;
    std::string mode = "parity";
    FamilyFlags family;
    std::uint64_t seed = 0;
    std::size_t top_k = 50;
    std::string out = "spatialfair-out";
    std::string resolution;
};

void setup_meanvar(CLI::App& app, MeanVarFlags& f) {
    add_common(app, f.config, f.data, f.mode);
    f.family.add_to(app, false, false);
    app.add_option("--seed", f.seed, "Seed for random partitionings")->capture_default_str();
    app.add_option("--top-k", f.top_k, "Number of largest-contribution partitions to report")->capture_default_str();
    app.add_option("--out", f.out, "Output directory for meanvar.json")->capture_default_str();
    app.add_option("--resolution", f.resolution, "Spatial index grid GXxGY (default ceil(sqrt(N)) per axis)");
}

int run_meanvar(const CLI::App& app, MeanVarFlags f) {
    const json cfg = read_config(f.config);
    merge(app, "--data", cfg, "data", f.data);
    merge(app, "--mode", cfg, "mode", f.mode);
    f.family.merge_config(app, cfg);
    merge(app, "--seed", cfg, "seed", f.seed);
    merge(app, "--top-k", cfg, "top_k", f.top_k);
    merge(app, "--out", cfg, "out", f.out);
    merge(app, "--resolution", cfg, "resolution", f.resolution);
    if (f.data.empty()) throw UsageError("--data is required");
    const auto spec = f.family.resolve();

    json resolved{{"data", f.data}, {"mode", f.mode}, {"regions", sf::to_json(spec)}, {"seed", f.seed},
                  {"top_k", f.top_k}, {"out", f.out}};
    std::cerr << "resolved config: " << resolved.dump() << '\n';

    const auto d = sf::load_dataset(f.data, sf::parse_measure_mode(f.mode));
    std::vector<sf::Partitioning> parts;
    if (const auto* g = std::get_if<sf::GridFamily>(&spec)) {
        parts.push_back(sf::regular_grid(d.bbox(), g->mx, g->my));
    } else {
        const auto& r = std::get<sf::RandomPartitionFamily>(spec);
        parts = sf::random_partitionings(d.bbox(), r.count, r.min_splits, r.max_splits, f.seed);
    }
    const auto res = parse_resolution(f.resolution);
    const auto ix = sf::SpatialIndex::build(d, res.value_or(sf::GridResolution::default_for(d.size())));
    const auto report = sf::mean_var(ix, parts, f.top_k);

    auto j = sf::to_json(report);
    j["config"] = resolved;
    std::filesystem::create_directories(f.out);
    const auto path = std::filesystem::path(f.out) / "meanvar.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    std::cout << "MeanVar=" << format_number(report.mean_var) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gen-synth

struct SynthFlags {
    std::string kind;
    std::int64_t n = 10000;
    std::uint64_t seed = 0;
    double rho = 0.5;
    bool exact = false;
    std::string locations;
    std::string rect = "0,0,1,1";
    std::string plant;
    double rho_bg = 0.5;
    double rho_in = 0.8;
    int clusters = 20;
    double spread = 0.02;
    double background = 0.1;
    std::string out = "-";
};

void setup_gen_synth(CLI::App& app, SynthFlags& f) {
    app.add_option("--kind", f.kind, "uniform-split, fair or planted")
        ->required()
        ->check(CLI::IsMember({"uniform-split", "fair", "planted"}));
    app.add_option("--n", f.n, "Number of observations")->capture_default_str();
    app.add_option("--seed", f.seed, "Generator seed")->capture_default_str();
    app.add_option("--rho", f.rho, "Positive rate for --kind fair")->capture_default_str();
    app.add_flag("--exact", f.exact, "fair: exactly round(rho * n) positives instead of Bernoulli draws");
    app.add_option("--locations", f.locations,
                   "fair: CSV whose locations are sampled without replacement (default: synthetic clusters)");
    app.add_option("--rect", f.rect, "Bounding rectangle xmin,ymin,xmax,ymax")->capture_default_str();
    app.add_option("--plant", f.plant, "planted: region xmin,ymin,xmax,ymax with a different rate");
    app.add_option("--rho-bg", f.rho_bg, "planted: background positive rate")->capture_default_str();
    app.add_option("--rho-in", f.rho_in, "planted: positive rate inside the plant")->capture_default_str();
    app.add_option("--clusters", f.clusters, "fair without --locations: number of clusters")->capture_default_str();
    app.add_option("--spread", f.spread, "fair without --locations: cluster standard deviation")
        ->capture_default_str();
    app.add_option("--background", f.background, "fair without --locations: share of uniform background points")
        ->capture_default_str();
    app.add_option("--out", f.out, "Output CSV path ('-' for stdout)")->capture_default_str();
}

int run_gen_synth(const SynthFlags& f) {
    const auto rect = parse_rect(f.rect, "--rect");
    std::optional<sf::Dataset> d;
    if (f.kind == "uniform-split") {
        d = sf::gen_uniform_split(f.n, rect, f.seed);
    } else if (f.kind == "fair") {
        std::vector<sf::Point> locs;
        if (!f.locations.empty()) {
            const auto pool = sf::load_dataset(f.locations, sf::MeasureMode::statistical_parity).locations();
            const auto count = std::min<std::int64_t>(f.n, static_cast<std::int64_t>(pool.size()));
            locs = sf::sample_locations(pool, count, f.seed);
        } else {
            locs = sf::clustered_locations(f.n, rect, f.clusters, f.spread, f.background, f.seed);
        }
        if (f.exact) {
            const auto positives = static_cast<std::int64_t>(std::llround(f.rho * static_cast<double>(locs.size())));
            d = sf::gen_fair_exact(locs, positives, f.seed);
        } else {
            d = sf::gen_fair_bernoulli(locs, f.rho, f.seed);
        }
    } else {
        if (f.plant.empty()) throw UsageError("--kind planted requires --plant");
        d = sf::gen_planted(f.n, rect, parse_rect(f.plant, "--plant"), f.rho_bg, f.rho_in, f.seed);
    }
    if (f.out == "-") {
        sf::write_csv(std::cout, d->observations());
    } else {
        sf::save_dataset(f.out, *d);
        std::cerr << "wrote " << d->size() << " observations (" << d->positives() << " positive) to " << f.out
                  << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// regions

struct RegionFlags {
    std::string data;
    std::string mode = "parity";
    std::string config;
    FamilyFlags family;
    std::uint64_t seed = 0;
    std::string out = "regions.json";
};

void setup_regions(CLI::App& app, RegionFlags& f) {
    add_common(app, f.config, f.data, f.mode);
    f.family.add_to(app, true, false);
    app.add_option("--seed", f.seed, "Seed for random partitionings and k-means")->capture_default_str();
    app.add_option("--out", f.out, "Output region family JSON")->capture_default_str();
}

int run_regions(const CLI::App& app, RegionFlags f) {
    const json cfg = read_config(f.config);
    merge(app, "--data", cfg, "data", f.data);
    merge(app, "--mode", cfg, "mode", f.mode);
    f.family.merge_config(app, cfg);
    merge(app, "--seed", cfg, "seed", f.seed);
    merge(app, "--out", cfg, "out", f.out);
    if (f.data.empty()) throw UsageError("--data is required");
    const auto spec = f.family.resolve();
    std::cerr << "resolved config: "
              << json{{"data", f.data}, {"mode", f.mode}, {"regions", sf::to_json(spec)}, {"seed", f.seed},
                      {"out", f.out}}
                     .dump()
              << '\n';
    const auto d = sf::load_dataset(f.data, sf::parse_measure_mode(f.mode));
    const auto family = sf::build_region_family(d, spec, f.seed);
    sf::save_region_family(f.out, family);
    std::cout << "regions=" << family.regions.size() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial fairness auditing with a Bernoulli scan statistic", "spatialfair"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spatialfair 0.1.0");

    AuditFlags audit_flags;
    MeanVarFlags meanvar_flags;
    SynthFlags synth_flags;
    RegionFlags region_flags;

    auto* audit_cmd = app.add_subcommand("audit", "Test whether outcomes are independent of location");
    setup_audit(*audit_cmd, audit_flags);
    auto* meanvar_cmd = app.add_subcommand("meanvar", "Compute the MeanVar baseline over partitionings");
    setup_meanvar(*meanvar_cmd, meanvar_flags);
    auto* synth_cmd = app.add_subcommand("gen-synth", "Generate a synthetic dataset CSV");
    setup_gen_synth(*synth_cmd, synth_flags);
    auto* regions_cmd = app.add_subcommand("regions", "Write a candidate region family as JSON");
    setup_regions(*regions_cmd, region_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (audit_cmd->parsed()) return run_audit(*audit_cmd, audit_flags);
        if (meanvar_cmd->parsed()) return run_meanvar(*meanvar_cmd, meanvar_flags);
        if (synth_cmd->parsed()) return run_gen_synth(synth_flags);
        if (regions_cmd->parsed()) return run_regions(*regions_cmd, region_flags);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
