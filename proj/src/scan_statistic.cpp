#include "spatialfair/scan_statistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spatialfair {

namespace {

double xlogx(std::int64_t x) {
    return x > 0 ? static_cast<double>(x) * std::log(static_cast<double>(x)) : 0.0;
}

void check_counts(std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P) {
    const bool ok = N > 0 && P >= 0 && P <= N && n >= 0 && p >= 0 && p <= n && n <= N && p <= P &&
                    n - p <= N - P;
    if (!ok) {
        throw std::logic_error("inconsistent region counts n=" + std::to_string(n) + " p=" + std::to_string(p) +
                               " N=" + std::to_string(N) + " P=" + std::to_string(P));
    }
}

__extension__ using wide_int = __int128;

// Sign of rate_inside - rate_outside, compared exactly as p (N - n) vs n (P - p).
int rate_order(std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P) {
    const wide_int inside = static_cast<wide_int>(p) * (N - n);
    const wide_int outside = static_cast<wide_int>(n) * (P - p);
    return inside > outside ? 1 : (inside < outside ? -1 : 0);
}

bool gated(int order, Direction dir) {
    if (order == 0) return true;
    if (dir == Direction::higher_inside) return order < 0;
    if (dir == Direction::lower_inside) return order > 0;
    return false;
}

}  // namespace

std::string_view to_string(Direction dir) {
    switch (dir) {
    case Direction::two_sided: return "two-sided";
    case Direction::higher_inside: return "higher-inside";
    case Direction::lower_inside: return "lower-inside";
    }
    return "two-sided";
}

Direction parse_direction(std::string_view text) {
    if (text == "two-sided" || text == "two_sided") return Direction::two_sided;
    if (text == "higher-inside" || text == "higher_inside") return Direction::higher_inside;
    if (text == "lower-inside" || text == "lower_inside") return Direction::lower_inside;
    throw std::invalid_argument("unknown direction '" + std::string(text) + "'");
}

double log_lik_null_max(std::int64_t N, std::int64_t P) {
    if (N <= 0 || P < 0 || P > N) throw std::logic_error("log_lik_null_max: need 0 <= P <= N and N > 0");
    return xlogx(P) + xlogx(N - P) - xlogx(N);
}

double llr_from_counts(std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P, Direction dir) {
    check_counts(n, p, N, P);
    if (n == 0 || n == N) return 0.0;
    if (gated(rate_order(n, p, N, P), dir)) return 0.0;
    const std::int64_t m = N - n;
    const std::int64_t q = P - p;
    const double alt = (xlogx(p) + xlogx(n - p) - xlogx(n)) + (xlogx(q) + xlogx(m - q) - xlogx(m));
    return std::max(0.0, alt - log_lik_null_max(N, P));
}

LlrEvaluator::LlrEvaluator(std::int64_t N, std::int64_t P, Direction dir)
    : N_(N), P_(P), dir_(dir), null_term_(log_lik_null_max(N, P)) {
    auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(N) + 1);
    for (std::int64_t x = 0; x <= N; ++x) (*table)[x] = xlogx(x);
    xlogx_ = std::move(table);
}

LlrEvaluator::LlrEvaluator(const LlrEvaluator& base, std::int64_t P)
    : N_(base.N_), P_(P), dir_(base.dir_), null_term_(log_lik_null_max(base.N_, P)), xlogx_(base.xlogx_) {}

double LlrEvaluator::operator()(std::int64_t n, std::int64_t p) const {
    if (n == 0 || n == N_) return 0.0;
    if (gated(rate_order(n, p, N_, P_), dir_)) return 0.0;
    const std::int64_t m = N_ - n;
    const std::int64_t q = P_ - p;
    const double* t = xlogx_->data();
    const double alt = (t[p] + t[n - p] - t[n]) + (t[q] + t[m - q] - t[m]);
    return std::max(0.0, alt - null_term_);
}

ScanResult scan_regions(const SpatialIndex& ix, std::span<const Region> regions, Direction dir) {
    if (regions.empty()) throw std::invalid_argument("scan_regions: empty region list");
    const auto N = static_cast<std::int64_t>(ix.size());
    const auto P = ix.positives();
    const LlrEvaluator llr(N, P, dir);
    ScanResult out;
    out.scored.reserve(regions.size());
    for (const auto& r : regions) {
        ScoredRegion s;
        s.region = r;
        s.counts = ix.range_count(r);
        s.local_rate = s.counts.n > 0 ? static_cast<double>(s.counts.p) / static_cast<double>(s.counts.n) : 0.0;
        s.llr = llr(s.counts.n, s.counts.p);
        out.tau_log = std::max(out.tau_log, s.llr);
        out.scored.push_back(std::move(s));
    }
    return out;
}

double max_llr(const SpatialIndex& ix, const CompiledRegions& compiled, const LlrEvaluator& llr,
               std::span<std::int64_t> p_scratch) {
    compiled.positives(ix, p_scratch);
    const auto n = compiled.n();
    double best = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) best = std::max(best, llr(n[i], p_scratch[i]));
    return best;
}

}  // namespace spatialfair
