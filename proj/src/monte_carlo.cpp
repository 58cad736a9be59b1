#include "spatialfair/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "spatialfair/rng.hpp"

namespace spatialfair {

namespace {

unsigned resolve_threads(unsigned requested, std::int64_t jobs) {
    unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::int64_t>(t, std::max<std::int64_t>(jobs, 1)));
}

}  // namespace

MaxStatDistribution simulate_worlds(const SpatialIndex& ix, std::span<const Region> regions, double rho,
                                    const SimulationOptions& opts) {
    return simulate_worlds(ix, CompiledRegions(ix, regions), rho, opts);
}

MaxStatDistribution simulate_worlds(const SpatialIndex& ix, const CompiledRegions& compiled, double rho,
                                    const SimulationOptions& opts) {
    if (opts.num_worlds < 1) throw std::invalid_argument("simulate_worlds: need at least one simulated world");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("simulate_worlds: rho must lie strictly between 0 and 1");

    const auto N = static_cast<std::int64_t>(ix.size());
    const LlrEvaluator base(N, 0, opts.direction);
    std::vector<double> maxima(static_cast<std::size_t>(opts.num_worlds));

    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(N));
        std::vector<std::int64_t> p(compiled.size());
        try {
            for (std::int64_t w = next++; w < opts.num_worlds; w = next++) {
                Rng rng(stream_seed(opts.seed, stream_domain::worlds, static_cast<std::uint64_t>(w)));
                std::int64_t positives = 0;
                for (auto& v : labels) {
                    v = rng.bernoulli(rho) ? 1 : 0;
                    positives += v;
                }
                const auto world = ix.with_labels(labels);
                maxima[static_cast<std::size_t>(w)] = max_llr(world, compiled, LlrEvaluator(base, positives), p);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = opts.num_worlds;
        }
    };

    const unsigned threads = resolve_threads(opts.threads, opts.num_worlds);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::sort(maxima.begin(), maxima.end(), std::greater<>());
    return {std::move(maxima), opts.num_worlds + 1, opts.seed, opts.direction};
}

double global_p_value(double tau_log, const MaxStatDistribution& dist) {
    const auto at_least = std::count_if(dist.values.begin(), dist.values.end(), [&](double v) { return v >= tau_log; });
    return static_cast<double>(1 + at_least) / static_cast<double>(dist.worlds);
}

double critical_value(const MaxStatDistribution& dist, double alpha) {
    // Guard against alpha * w landing a hair below an integer.
    const auto rank = static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(dist.worlds) + 1e-9));
    if (rank < 1) {
        throw std::invalid_argument("critical_value: alpha * w < 1, " + std::to_string(dist.worlds) +
                                    " worlds cannot resolve alpha = " + std::to_string(alpha));
    }
    if (rank > static_cast<std::int64_t>(dist.values.size()))
        throw std::invalid_argument("critical_value: alpha too large for the simulated worlds");
    return dist.values[static_cast<std::size_t>(rank - 1)];
}

AuditVerdict make_verdict(double tau_log, const MaxStatDistribution& dist, double alpha) {
    AuditVerdict v;
    v.tau_log = tau_log;
    v.alpha = alpha;
    v.worlds = dist.worlds;
    v.p_value = global_p_value(tau_log, dist);
    v.critical_llr = critical_value(dist, alpha);
    v.fair = v.p_value > alpha;
    return v;
}

std::vector<ScoredRegion> significant_regions(std::span<const ScoredRegion> scored, double cutoff,
                                              const MaxStatDistribution& dist) {
    std::vector<ScoredRegion> out;
    for (const auto& s : scored) {
        if (s.counts.n > 0 && s.llr > cutoff) out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.llr > b.llr; });
    for (auto& s : out) s.p_value = global_p_value(s.llr, dist);
    return out;
}

nlohmann::json to_json(const MaxStatDistribution& dist) {
    return {{"schema", 1},
            {"values", dist.values},
            {"w", dist.worlds},
            {"seed", dist.seed},
            {"direction", std::string(to_string(dist.direction))}};
}

MaxStatDistribution null_distribution_from_json(const nlohmann::json& j) {
    if (j.value("schema", 0) != 1) throw std::invalid_argument("null distribution: unsupported schema");
    MaxStatDistribution d;
    d.values = j.at("values").get<std::vector<double>>();
    d.worlds = j.at("w").get<std::int64_t>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.direction = parse_direction(j.at("direction").get<std::string>());
    if (static_cast<std::int64_t>(d.values.size()) != d.worlds - 1)
        throw std::invalid_argument("null distribution: expected w - 1 values");
    if (!std::is_sorted(d.values.begin(), d.values.end(), std::greater<>()))
        throw std::invalid_argument("null distribution: values must be sorted descending");
    return d;
}

}  // namespace spatialfair
