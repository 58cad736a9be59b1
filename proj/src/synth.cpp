#include "spatialfair/synth.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "spatialfair/rng.hpp"

namespace spatialfair {

namespace {

Rng synth_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(stream_seed(seed, stream_domain::synth, stream));
}

std::vector<Observation> as_observations(std::span<const Point> locations) {
    std::vector<Observation> rows(locations.size());
    for (std::size_t i = 0; i < locations.size(); ++i) {
        rows[i].id = "s" + std::to_string(i);
        rows[i].lon = locations[i].x;
        rows[i].lat = locations[i].y;
    }
    return rows;
}

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

void check_rect(const Region& rect) {
    if (!rect.valid()) throw std::invalid_argument("rectangle has min > max");
}

// Marks `k` of the indices [first, first + count) positive.
void mark_random_subset(std::vector<Observation>& rows, std::size_t first, std::size_t count, std::size_t k,
                        Rng& rng) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), first);
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t i = 0; i < k; ++i) rows[idx[i]].outcome = 1;
}

}  // namespace

std::vector<Point> uniform_locations(std::int64_t n, const Region& rect, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("need at least one point");
    check_rect(rect);
    auto rng = synth_rng(seed, 0);
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (auto& pt : pts) {
        pt.x = rect.width() > 0.0 ? rng.uniform(rect.xmin, rect.xmax) : rect.xmin;
        pt.y = rect.height() > 0.0 ? rng.uniform(rect.ymin, rect.ymax) : rect.ymin;
    }
    return pts;
}

Dataset gen_uniform_split(std::int64_t n, const Region& rect, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("gen_uniform_split: n must be even and positive");
    check_rect(rect);
    auto rng = synth_rng(seed, 1);
    const auto half = static_cast<std::size_t>(n / 2);
    const double xmid = rect.xmin + rect.width() / 2.0;
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const bool left = i < half;
        const double lo = left ? rect.xmin : xmid;
        const double hi = left ? xmid : rect.xmax;
        pts[i] = {hi > lo ? rng.uniform(lo, hi) : lo, rect.height() > 0.0 ? rng.uniform(rect.ymin, rect.ymax) : rect.ymin};
    }
    auto rows = as_observations(pts);
    const auto total_pos = static_cast<std::size_t>(n / 2);
    const std::size_t left_pos = (2 * total_pos + 1) / 3;
    mark_random_subset(rows, 0, half, left_pos, rng);
    mark_random_subset(rows, half, half, total_pos - left_pos, rng);
    return Dataset(std::move(rows));
}

Dataset gen_fair_bernoulli(std::span<const Point> locations, double rho, std::uint64_t seed) {
    check_probability(rho, "rho");
    auto rng = synth_rng(seed, 2);
    auto rows = as_observations(locations);
    for (auto& o : rows) o.outcome = rng.bernoulli(rho) ? 1 : 0;
    return Dataset(std::move(rows));
}

Dataset gen_fair_exact(std::span<const Point> locations, std::int64_t positives, std::uint64_t seed) {
    if (positives < 0 || positives > static_cast<std::int64_t>(locations.size()))
        throw std::invalid_argument("gen_fair_exact: positives out of range");
    auto rng = synth_rng(seed, 3);
    auto rows = as_observations(locations);
    mark_random_subset(rows, 0, rows.size(), static_cast<std::size_t>(positives), rng);
    return Dataset(std::move(rows));
}

Dataset gen_planted(std::int64_t n, const Region& rect, const Region& plant, double rho_bg, double rho_in,
                    std::uint64_t seed) {
    check_probability(rho_bg, "rho_bg");
    check_probability(rho_in, "rho_in");
    check_rect(plant);
    if (plant.xmin < rect.xmin || plant.xmax > rect.xmax || plant.ymin < rect.ymin || plant.ymax > rect.ymax)
        throw std::invalid_argument("gen_planted: plant must lie inside the rectangle");
    const auto pts = uniform_locations(n, rect, seed);
    auto rng = synth_rng(seed, 4);
    auto rows = as_observations(pts);
    for (auto& o : rows) {
        // Plain half-open membership; a zero-area plant holds nothing.
        const bool inside = o.lon >= plant.xmin && o.lon < plant.xmax && o.lat >= plant.ymin && o.lat < plant.ymax;
        o.outcome = rng.bernoulli(inside ? rho_in : rho_bg) ? 1 : 0;
    }
    return Dataset(std::move(rows));
}

std::vector<Point> clustered_locations(std::int64_t n, const Region& rect, int clusters, double spread,
                                       double background_share, std::uint64_t seed) {
    if (n < 1 || clusters < 1) throw std::invalid_argument("clustered_locations: need n >= 1 and clusters >= 1");
    check_rect(rect);
    check_probability(background_share, "background_share");
    auto rng = synth_rng(seed, 5);
    std::vector<Point> centers(static_cast<std::size_t>(clusters));
    for (auto& c : centers) c = {rng.uniform(rect.xmin, rect.xmax), rng.uniform(rect.ymin, rect.ymax)};
    // Uneven cluster sizes: weight c + 1 for cluster c.
    std::vector<double> cumulative(centers.size());
    double acc = 0.0;
    for (std::size_t c = 0; c < centers.size(); ++c) cumulative[c] = acc += static_cast<double>(c + 1);

    auto inside = [&](const Point& p) {
        return p.x >= rect.xmin && p.x <= rect.xmax && p.y >= rect.ymin && p.y <= rect.ymax;
    };
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    while (static_cast<std::int64_t>(pts.size()) < n) {
        if (rng.bernoulli(background_share)) {
            pts.push_back({rng.uniform(rect.xmin, rect.xmax), rng.uniform(rect.ymin, rect.ymax)});
            continue;
        }
        const double u = rng.uniform() * acc;
        const auto c = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                cumulative.begin());
        const auto& center = centers[std::min(c, centers.size() - 1)];
        const Point p{rng.normal(center.x, spread), rng.normal(center.y, spread)};
        if (inside(p)) pts.push_back(p);
    }
    return pts;
}

std::vector<Point> sample_locations(std::span<const Point> pool, std::int64_t count, std::uint64_t seed) {
    if (count < 0 || count > static_cast<std::int64_t>(pool.size()))
        throw std::invalid_argument("sample_locations: cannot draw " + std::to_string(count) + " of " +
                                    std::to_string(pool.size()) + " locations without replacement");
    auto rng = synth_rng(seed, 6);
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                                static_cast<std::int64_t>(idx.size()) - 1));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Point> out(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pool[idx[i]];
    return out;
}

}  // namespace spatialfair
