// Acceptance suite: one PASS/FAIL/SKIP line per criterion, exit status 1 if any
// criterion fails. Set SPATIALFAIR_LAR_CSV to a LAR-style CSV to run the
// optional full-scale LAR check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spatialfair/audit.hpp"
#include "spatialfair/meanvar.hpp"
#include "spatialfair/synth.hpp"

namespace sf = spatialfair;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    enum Kind { pass, fail, skip } kind;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const sf::Region unit{0, 0, 1, 1, std::nullopt};

sf::AuditOptions options(double alpha, std::int64_t w, std::uint64_t seed) {
    sf::AuditOptions o;
    o.alpha = alpha;
    o.worlds = w;
    o.seed = seed;
    return o;
}

// Direct evaluation of ln L1max - ln L0max from the MLE rates.
double direct_llr(std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P) {
    auto ll = [](double k, double m) {
        if (m == 0) return 0.0;
        double out = 0.0;
        if (k > 0) out += k * std::log(k / m);
        if (m - k > 0) out += (m - k) * std::log((m - k) / m);
        return out;
    };
    if (n == 0 || n == N || p * (N - n) == n * (P - p)) return 0.0;
    return ll(p, n) + ll(P - p, N - n) - ll(P, N);
}

Outcome c1_oracle() {
    std::mt19937_64 rng(1);
    const auto t = Clock::now();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto N = std::uniform_int_distribution<std::int64_t>(1, 10000)(rng);
        const auto P = std::uniform_int_distribution<std::int64_t>(0, N)(rng);
        const auto n = std::uniform_int_distribution<std::int64_t>(0, N)(rng);
        const auto p = std::uniform_int_distribution<std::int64_t>(std::max<std::int64_t>(0, n - (N - P)),
                                                                   std::min(n, P))(rng);
        worst = std::max(worst, std::abs(sf::llr_from_counts(n, p, N, P) - direct_llr(n, p, N, P)));
    }
    const double secs = seconds_since(t);
    return verdict(worst <= 1e-9 && secs < 1.0, fmt("max |diff| = %.3g over 1000 tuples, %.3f s", worst, secs));
}

Outcome c2_hand_value() {
    const double want = std::log((1.0 / 6.0) * std::pow(5.0 / 6.0, 5)) - 10.0 * std::log(0.5);
    const double got = sf::llr_from_counts(4, 4, 10, 5, sf::Direction::two_sided);
    return verdict(std::abs(got - want) <= 1e-6 && std::abs(got - 4.2282) <= 1e-4,
                   fmt("llr(4,4,10,5) = %.10f, closed form %.10f", got, want));
}

Outcome c3_verdicts() {
    int unfair_synth = 0, fair_semi = 0;
    double slowest = 0.0;
    const sf::RandomPartitionFamily family{100, 10, 40};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto synth = sf::gen_uniform_split(10000, unit, seed);
        const auto semi = sf::gen_fair_bernoulli(synth.locations(), 0.5, seed);
        for (const auto* d : {&synth, &semi}) {
            const auto t = Clock::now();
            const auto regions = sf::build_region_family(*d, family, seed);
            const auto r = sf::run_audit(*d, regions, options(0.005, 1000, seed));
            slowest = std::max(slowest, seconds_since(t));
            if (d == &synth && !r.verdict.fair) ++unfair_synth;
            if (d == &semi && r.verdict.fair) ++fair_semi;
        }
    }
    return verdict(unfair_synth == 10 && fair_semi >= 9,
                   fmt("uniform-split UNFAIR %d/10, fair Bernoulli FAIR %d/10, slowest audit %.1f s", unfair_synth,
                       fair_semi, slowest));
}

Outcome c4_meanvar_ordering() {
    int ordered = 0;
    double sum_fair = 0.0, sum_unfair = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto clustered = sf::clustered_locations(10000, unit, 20, 0.02, 0.1, seed);
        const auto fair = sf::gen_fair_exact(clustered, 5000, seed);
        const auto unfair = sf::gen_uniform_split(10000, unit, seed);
        auto mv = [&](const sf::Dataset& d) {
            const auto parts = sf::random_partitionings(d.bbox(), 100, 10, 40, seed);
            return sf::mean_var(sf::SpatialIndex::build(d), parts).mean_var;
        };
        const double a = mv(fair), b = mv(unfair);
        sum_fair += a;
        sum_unfair += b;
        if (a > b) ++ordered;
    }
    return verdict(ordered >= 8, fmt("MeanVar(fair-clustered) > MeanVar(unfair-uniform) in %d/10 seeds "
                                     "(means %.4f vs %.4f)",
                                     ordered, sum_fair / 10, sum_unfair / 10));
}

Outcome c5_planted_power() {
    const sf::Region rect{0, 0, 5, 5, std::nullopt};
    // 0.8 x 0.8 at 800 points per unit area: about 512 expected points.
    const sf::Region plant{1.6, 2.6, 2.4, 3.4, std::nullopt};
    int hits = 0, unfair = 0;
    double jac_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto d = sf::gen_planted(20000, rect, plant, 0.5, 0.8, seed);
        const auto family = sf::build_region_family(d, sf::SquareFamily{}, seed);
        const auto r = sf::run_audit(d, family, options(0.005, 1000, seed));
        if (r.verdict.fair || r.non_overlapping.empty()) continue;
        ++unfair;
        const double j = sf::jaccard(r.non_overlapping.front().region, plant);
        jac_sum += j;
        if (j >= 0.3) ++hits;
    }
    return verdict(hits >= 9, fmt("UNFAIR with top-1 Jaccard >= 0.3 in %d/10 seeds (UNFAIR %d/10, mean Jaccard %.2f)",
                                  hits, unfair, unfair ? jac_sum / unfair : 0.0));
}

Outcome c6_calibration() {
    const auto t = Clock::now();
    int rejected = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
        const auto seed = static_cast<std::uint64_t>(1000 + i);
        const auto d = sf::gen_fair_bernoulli(sf::uniform_locations(2000, unit, seed), 0.5, seed);
        const auto family = sf::build_region_family(d, sf::RandomPartitionFamily{5, 10, 40}, seed);
        if (!sf::run_audit(d, family, options(0.05, 200, seed)).verdict.fair) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / trials;
    return verdict(rate >= 0.01 && rate <= 0.10,
                   fmt("rejection rate %.3f (%d/%d) at alpha 0.05, %.1f s", rate, rejected, trials, seconds_since(t)));
}

Outcome c7_p_values() {
    sf::MaxStatDistribution a;
    a.worlds = 200;
    for (int i = 0; i < 199; ++i) a.values.push_back(50.0 - i * 0.1);
    sf::MaxStatDistribution b;
    b.worlds = 1000;
    for (int i = 0; i < 999; ++i) b.values.push_back(100.0 - i);
    const double pa = sf::global_p_value(60.0, a);  // rank 1
    const double pb = sf::global_p_value(91.5, b);  // 9 simulated values above: rank 10
    return verdict(pa == 0.005 && pb == 0.01, fmt("rank 1 of 200 -> %g, rank 10 of 1000 -> %g", pa, pb));
}

// Invariant suites, each returning the number of violations.
int llr_invariants() {
    int bad = 0;
    for (std::int64_t N = 1; N <= 30; ++N)
        for (std::int64_t P = 0; P <= N; ++P)
            for (std::int64_t n = 0; n <= N; ++n) {
                const auto lo = std::max<std::int64_t>(0, n - (N - P));
                const auto hi = std::min(n, P);
                const double prop = static_cast<double>(n) * static_cast<double>(P) / static_cast<double>(N);
                double prev = -1.0;
                for (auto p = lo; p <= hi; ++p) {
                    const double v = sf::llr_from_counts(n, p, N, P);
                    const double up = sf::llr_from_counts(n, p, N, P, sf::Direction::higher_inside);
                    const double down = sf::llr_from_counts(n, p, N, P, sf::Direction::lower_inside);
                    bad += v < 0.0;
                    bad += std::abs(v - sf::llr_from_counts(N - n, P - p, N, P)) > 1e-9;
                    bad += (p * (N - n) == n * (P - p)) && v != 0.0;
                    bad += v != std::max(up, down);
                    if (p > lo) {
                        if (static_cast<double>(p) <= prop) bad += v > prev + 1e-12;
                        if (static_cast<double>(p - 1) >= prop) bad += v < prev - 1e-12;
                    }
                    prev = v;
                }
            }
    return bad;
}

int range_count_vs_brute_force() {
    std::mt19937_64 rng(8);
    int bad = 0;
    for (int ds = 0; ds < 10; ++ds) {
        std::vector<sf::Observation> rows(500);
        std::uniform_int_distribution<int> lattice(0, 20);
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = {std::to_string(i), lattice(rng) * 0.5, lattice(rng) * 0.5,
                       static_cast<std::uint8_t>(rng() % 3 == 0), std::nullopt};
        const sf::Dataset d(rows);
        const auto ix = sf::SpatialIndex::build(d, {static_cast<int>(1 + rng() % 30), static_cast<int>(1 + rng() % 30)});
        std::uniform_real_distribution<double> u(-1.0, 11.0);
        for (int q = 0; q < 100; ++q) {
            double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
            if (q % 2 == 0) {
                x0 = std::round(x0 * 2) / 2, x1 = std::round(x1 * 2) / 2;
                y0 = std::round(y0 * 2) / 2, y1 = std::round(y1 * 2) / 2;
            }
            const sf::Region r{std::min(x0, x1), std::min(y0, y1), std::max(x0, x1), std::max(y0, y1), std::nullopt};
            sf::RegionCounts want;
            for (const auto& o : rows) {
                const bool xin = o.lon >= r.xmin && (o.lon < r.xmax || (r.xmax >= d.bbox().xmax && o.lon <= r.xmax));
                const bool yin = o.lat >= r.ymin && (o.lat < r.ymax || (r.ymax >= d.bbox().ymax && o.lat <= r.ymax));
                if (xin && yin) ++want.n, want.p += o.outcome;
            }
            bad += !(ix.range_count(r) == want);
        }
    }
    return bad;
}

int partition_conservation() {
    int bad = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto d = sf::gen_fair_bernoulli(sf::clustered_locations(5000, unit, 10, 0.05, 0.2, seed), 0.4, seed);
        const auto ix = sf::SpatialIndex::build(d);
        auto parts = sf::random_partitionings(d.bbox(), 20, 10, 40, seed);
        parts.push_back(sf::regular_grid(d.bbox(), 100, 50));
        for (const auto& part : parts) {
            sf::RegionCounts total;
            for (const auto& r : part.regions) {
                const auto c = ix.range_count(r);
                total.n += c.n;
                total.p += c.p;
            }
            bad += !(total == sf::RegionCounts{static_cast<std::int64_t>(d.size()), d.positives()});
        }
    }
    return bad;
}

int seeded_determinism() {
    const auto root = std::filesystem::temp_directory_path() / "spatialfair_acceptance_determinism";
    std::filesystem::remove_all(root);
    const auto d = sf::gen_uniform_split(5000, unit, 3);
    std::vector<std::string> dumps;
    for (unsigned threads : {1u, 2u}) {
        auto opts = options(0.005, 200, 3);
        opts.threads = threads;
        const auto family = sf::build_region_family(d, sf::RandomPartitionFamily{10, 10, 40}, 3);
        auto r = sf::run_audit(d, family, opts);
        r.timings_ms.clear();
        r.config.erase("threads");
        const auto dir = root / std::to_string(threads);
        sf::export_report(r, dir.string());
        std::string all;
        for (const char* f : {"report.json", "regions.geojson", "nulldist.json"}) {
            std::ifstream in(dir / f, std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            all += s.str();
        }
        dumps.push_back(all);
    }
    std::filesystem::remove_all(root);
    return dumps[0] == dumps[1] ? 0 : 1;
}

Outcome c8_invariants() {
    const int a = llr_invariants();
    const int b = range_count_vs_brute_force();
    const int c = partition_conservation();
    const int e = seeded_determinism();
    return verdict(a + b + c + e == 0,
                   fmt("violations: llr %d, range-count %d/1000, conservation %d, determinism %d", a, b, c, e));
}

Outcome c9_lar_scale() {
    const char* path = std::getenv("SPATIALFAIR_LAR_CSV");
    if (!path || !*path) return {Outcome::skip, "set SPATIALFAIR_LAR_CSV to a LAR-style CSV to run"};
    const auto d = sf::load_dataset(path, sf::MeasureMode::statistical_parity);
    const auto family = sf::build_region_family(d, sf::GridFamily{100, 50}, 0);
    const auto r = sf::run_audit(d, family, options(0.005, 1000, 0));
    const double top_rate = r.evidence.empty() ? 0.0 : r.evidence.front().local_rate;
    return verdict(r.verdict.critical_llr >= 7.0 && r.verdict.critical_llr <= 13.0,
                   fmt("cutoff %.2f, %zu significant partitions, top local rate %.2f vs global %.2f, %s",
                       r.verdict.critical_llr, r.evidence.size(), top_rate, d.rho(),
                       r.verdict.fair ? "FAIR" : "UNFAIR"));
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 llr matches direct evaluation", c1_oracle},
        {"2 hand-derived llr(4,4,10,5)", c2_hand_value},
        {"3 uniform-split unfair, fair Bernoulli fair", c3_verdicts},
        {"4 MeanVar ordering", c4_meanvar_ordering},
        {"5 planted-region power", c5_planted_power},
        {"6 calibration under fair data", c6_calibration},
        {"7 p-value is rank over w", c7_p_values},
        {"8 invariant suites", c8_invariants},
        {"9 LAR-scale reproduction (optional)", c9_lar_scale},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto t = Clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::fail ? "FAIL" : "SKIP";
        failures += o.kind == Outcome::fail;
        std::printf("[%s] %s: %s (%.1f s)\n", tag, name, o.detail.c_str(), seconds_since(t));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
