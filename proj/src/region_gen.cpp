#include "spatialfair/region_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "spatialfair/rng.hpp"

namespace spatialfair {

namespace {

std::vector<double> even_edges(double lo, double hi, int cells) {
    std::vector<double> e(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) e[i] = lo + (hi - lo) * (static_cast<double>(i) / cells);
    e.front() = lo;
    e.back() = hi;
    return e;
}

std::vector<Region> grid_cells(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<Region> out;
    out.reserve((xs.size() - 1) * (ys.size() - 1));
    for (std::size_t r = 0; r + 1 < ys.size(); ++r)
        for (std::size_t c = 0; c + 1 < xs.size(); ++c) out.push_back({xs[c], ys[r], xs[c + 1], ys[r + 1], {}});
    return out;
}

double sq_dist(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace

std::string describe(const PartitioningProvenance& prov) {
    if (const auto* reg = std::get_if<RegularProvenance>(&prov))
        return "regular(" + std::to_string(reg->mx) + "x" + std::to_string(reg->my) + ")";
    const auto& rnd = std::get<RandomProvenance>(prov);
    return "random(seed=" + std::to_string(rnd.seed) + ", index=" + std::to_string(rnd.index) +
           ", h=" + std::to_string(rnd.horizontal_splits) + ", v=" + std::to_string(rnd.vertical_splits) + ")";
}

Partitioning regular_grid(const Region& bbox, int mx, int my) {
    if (mx < 1 || my < 1) throw std::invalid_argument("regular_grid: mx and my must be >= 1");
    if ((bbox.width() <= 0.0 && mx > 1) || (bbox.height() <= 0.0 && my > 1))
        throw std::invalid_argument("regular_grid: cannot split a zero-extent bbox side");
    Partitioning part;
    part.regions = grid_cells(even_edges(bbox.xmin, bbox.xmax, mx), even_edges(bbox.ymin, bbox.ymax, my));
    part.provenance = RegularProvenance{mx, my};
    return part;
}

std::vector<Partitioning> random_partitionings(const Region& bbox, int count, int min_splits, int max_splits,
                                               std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("random_partitionings: count must be >= 1");
    if (min_splits < 1 || min_splits > max_splits)
        throw std::invalid_argument("random_partitionings: need 1 <= min_splits <= max_splits");
    std::vector<Partitioning> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng(stream_seed(seed, stream_domain::partitionings, static_cast<std::uint64_t>(i)));
        const int h = static_cast<int>(rng.uniform_int(min_splits, max_splits));
        const int v = static_cast<int>(rng.uniform_int(min_splits, max_splits));
        std::vector<double> xs{bbox.xmin};
        std::vector<double> ys{bbox.ymin};
        for (int k = 0; k < v; ++k) xs.push_back(rng.uniform(bbox.xmin, bbox.xmax));
        for (int k = 0; k < h; ++k) ys.push_back(rng.uniform(bbox.ymin, bbox.ymax));
        if (bbox.width() <= 0.0) std::fill(xs.begin(), xs.end(), bbox.xmin);
        if (bbox.height() <= 0.0) std::fill(ys.begin(), ys.end(), bbox.ymin);
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        xs.push_back(bbox.xmax);
        ys.push_back(bbox.ymax);
        out.push_back({grid_cells(xs, ys), RandomProvenance{seed, static_cast<std::uint64_t>(i), h, v}});
    }
    return out;
}

KMeansResult kmeans(std::span<const Point> points, int k, std::uint64_t seed, int max_iters) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    {
        std::vector<Point> distinct(points.begin(), points.end());
        std::sort(distinct.begin(), distinct.end(),
                  [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (static_cast<std::size_t>(k) > distinct.size()) {
            throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " exceeds the " +
                                        std::to_string(distinct.size()) + " distinct locations");
        }
    }

    Rng rng(stream_seed(seed, stream_domain::kmeans, 0));
    const std::size_t n = points.size();
    KMeansResult res;
    res.centers.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding
    res.centers.push_back(points[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], res.centers[0]);
    while (res.centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double v : d2) total += v;
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        const Point c = points[pick];
        res.centers.push_back(c);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], c));
    }

    std::vector<std::uint32_t> assign(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<double> sx(static_cast<std::size_t>(k)), sy(static_cast<std::size_t>(k));
    std::vector<std::int64_t> cnt(static_cast<std::size_t>(k));
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t best = 0;
            double best_d = sq_dist(points[i], res.centers[0]);
            for (std::size_t c = 1; c < res.centers.size(); ++c) {
                const double d = sq_dist(points[i], res.centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<std::uint32_t>(c);
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            inertia += best_d;
        }
        res.inertia_trace.push_back(inertia);
        res.iterations = iter + 1;
        if (!changed) break;

        std::fill(sx.begin(), sx.end(), 0.0);
        std::fill(sy.begin(), sy.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sx[assign[i]] += points[i].x;
            sy[assign[i]] += points[i].y;
            ++cnt[assign[i]];
        }
        for (std::size_t c = 0; c < res.centers.size(); ++c) {
            if (cnt[c] > 0) {
                res.centers[c] = {sx[c] / static_cast<double>(cnt[c]), sy[c] / static_cast<double>(cnt[c])};
            }
        }
    }
    return res;
}

std::vector<Point> kmeans_centers(const Dataset& d, int k, std::uint64_t seed, int max_iters) {
    const auto pts = d.locations();
    return kmeans(pts, k, seed, max_iters).centers;
}

std::vector<double> linspace_sides(double first, double last, int count) {
    if (count < 1) throw std::invalid_argument("side count must be >= 1");
    if (count == 1) return {first};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[i] = first + (last - first) * (static_cast<double>(i) / (count - 1));
    out.back() = last;
    return out;
}

std::vector<double> default_side_lengths() { return linspace_sides(0.1, 2.0, 20); }

std::vector<Region> square_scan_set(std::span<const Point> centers, std::span<const double> side_lengths) {
    for (double s : side_lengths)
        if (!(s > 0.0)) throw std::invalid_argument("square side lengths must be positive");
    std::vector<Region> out;
    out.reserve(centers.size() * side_lengths.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (double s : side_lengths) {
            const double h = s / 2.0;
            out.push_back({centers[c].x - h, centers[c].y - h, centers[c].x + h, centers[c].y + h,
                           static_cast<std::int64_t>(c)});
        }
    }
    return out;
}

std::vector<Region> flatten(std::span<const Partitioning> parts) {
    std::vector<Region> out;
    std::int64_t id = 0;
    for (const auto& part : parts) {
        for (auto r : part.regions) {
            r.center_id = id++;
            out.push_back(r);
        }
    }
    return out;
}

nlohmann::json region_to_json(const Region& r) {
    nlohmann::json j{{"xmin", r.xmin}, {"ymin", r.ymin}, {"xmax", r.xmax}, {"ymax", r.ymax}};
    if (r.center_id) j["center_id"] = *r.center_id;
    return j;
}

Region region_from_json(const nlohmann::json& j) {
    Region r{j.at("xmin").get<double>(), j.at("ymin").get<double>(), j.at("xmax").get<double>(),
             j.at("ymax").get<double>(), std::nullopt};
    if (j.contains("center_id") && !j.at("center_id").is_null()) r.center_id = j.at("center_id").get<std::int64_t>();
    if (!r.valid()) throw std::invalid_argument("region has min > max");
    return r;
}

nlohmann::json region_family_to_json(const RegionFamily& family) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : family.regions) regions.push_back(region_to_json(r));
    return {{"schema", 1}, {"provenance", family.provenance}, {"regions", std::move(regions)}};
}

RegionFamily region_family_from_json(const nlohmann::json& j) {
    if (j.value("schema", 0) != 1) throw std::invalid_argument("region family: unsupported schema");
    RegionFamily family;
    if (j.contains("provenance")) family.provenance = j.at("provenance");
    for (const auto& r : j.at("regions")) family.regions.push_back(region_from_json(r));
    return family;
}

RegionFamily load_region_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open region file '" + path + "'");
    try {
        return region_family_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void save_region_family(const std::string& path, const RegionFamily& family) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << region_family_to_json(family).dump(1) << '\n';
}

}  // namespace spatialfair
