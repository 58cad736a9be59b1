#include "spatialfair/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spatialfair {

struct SpatialIndex::Geometry {
    Region bbox;
    int gx = 1;
    int gy = 1;
    std::vector<double> ex;  // gx + 1 column edges
    std::vector<double> ey;  // gy + 1 row edges
    std::vector<std::uint32_t> cell_start;  // gx * gy + 1, cell id = row * gx + col
    std::vector<Point> pts;                 // cell-sorted
    std::vector<std::uint32_t> order;       // cell-sorted position -> dataset index
    std::vector<std::int64_t> n_prefix;     // (gy + 1) * (gx + 1)
};

struct SpatialIndex::Labeling {
    std::vector<std::uint8_t> sorted;   // labels in cell-sorted order
    std::vector<std::int64_t> p_prefix;
    std::int64_t total = 0;
};

namespace {

struct AxisSpan {
    std::uint32_t o0 = 0, o1 = 0;  // cells touched by the query
    std::uint32_t f0 = 0, f1 = 0;  // cells entirely inside the query

    bool empty() const { return o0 >= o1; }
};

std::vector<double> make_edges(double lo, double hi, int cells, const char* axis) {
    std::vector<double> e(static_cast<std::size_t>(cells) + 1);
    const double extent = hi - lo;
    for (int i = 0; i <= cells; ++i) e[i] = lo + extent * (static_cast<double>(i) / cells);
    e.front() = lo;
    e.back() = hi;
    if (cells == 1) return e;
    for (int i = 0; i < cells; ++i) {
        if (!(e[i] < e[i + 1])) {
            throw std::invalid_argument(std::string("index resolution too fine: ") + axis +
                                        " cell width underflows to zero");
        }
    }
    return e;
}

std::uint32_t cell_of(const std::vector<double>& e, double v) {
    // Number of interior edges <= v; cells are [e[i], e[i+1]) with the last closed.
    const auto first = e.begin() + 1;
    const auto last = e.end() - 1;
    return static_cast<std::uint32_t>(std::upper_bound(first, last, v) - first);
}

AxisSpan axis_span(const std::vector<double>& e, double lo, double hi) {
    const std::size_t g = e.size() - 1;
    const bool closed = hi >= e[g];
    if (lo > hi || lo > e[g] || hi < e[0] || (!closed && (hi <= e[0] || lo == hi))) return {};

    AxisSpan s;
    s.o0 = cell_of(e, lo);
    s.o1 = closed ? static_cast<std::uint32_t>(g)
                  : static_cast<std::uint32_t>(std::lower_bound(e.begin(), e.begin() + g, hi) - e.begin());
    std::uint32_t f0 = static_cast<std::uint32_t>(std::lower_bound(e.begin(), e.end(), lo) - e.begin());
    std::uint32_t f1 = closed ? static_cast<std::uint32_t>(g)
                              : static_cast<std::uint32_t>(std::upper_bound(e.begin() + 1, e.end(), hi) -
                                                           (e.begin() + 1));
    f0 = std::max(f0, s.o0);
    f1 = std::min(f1, s.o1);
    if (f0 >= f1) f0 = f1 = s.o0;
    s.f0 = f0;
    s.f1 = f1;
    return s;
}

template <class Table>
std::int64_t block_sum(const Table& prefix, std::size_t stride, std::uint32_t r0, std::uint32_t r1,
                       std::uint32_t c0, std::uint32_t c1) {
    if (r0 >= r1 || c0 >= c1) return 0;
    return prefix[r1 * stride + c1] - prefix[r0 * stride + c1] - prefix[r1 * stride + c0] +
           prefix[r0 * stride + c0];
}

std::vector<std::int64_t> prefix_table(const std::vector<std::int64_t>& cell_values, int gx, int gy) {
    const std::size_t stride = static_cast<std::size_t>(gx) + 1;
    std::vector<std::int64_t> prefix(stride * (static_cast<std::size_t>(gy) + 1), 0);
    for (int r = 0; r < gy; ++r) {
        std::int64_t row_sum = 0;
        for (int c = 0; c < gx; ++c) {
            row_sum += cell_values[static_cast<std::size_t>(r) * gx + c];
            prefix[(r + 1) * stride + c + 1] = prefix[r * stride + c + 1] + row_sum;
        }
    }
    return prefix;
}

}  // namespace

GridResolution GridResolution::default_for(std::size_t n) {
    const int per_axis = static_cast<int>(std::min<double>(1024.0, std::ceil(std::sqrt(static_cast<double>(n)))));
    const int g = std::max(1, per_axis);
    return {g, g};
}

SpatialIndex::SpatialIndex(std::shared_ptr<const Geometry> geo, std::shared_ptr<const Labeling> lab)
    : geo_(std::move(geo)), lab_(std::move(lab)) {}

SpatialIndex SpatialIndex::build(const Dataset& d) { return build(d, GridResolution::default_for(d.size())); }

SpatialIndex SpatialIndex::build(const Dataset& d, GridResolution res) {
    const auto pts = d.locations();
    const auto labels = d.outcomes();
    return build(pts, labels, res);
}

SpatialIndex SpatialIndex::build(std::span<const Point> locations, std::span<const std::uint8_t> labels,
                                 GridResolution res) {
    if (res.gx < 1 || res.gy < 1) throw std::invalid_argument("index resolution must be at least 1x1");
    if (locations.empty()) throw std::invalid_argument("cannot index an empty point set");
    if (labels.size() != locations.size()) throw std::invalid_argument("label count does not match point count");
    if (locations.size() > UINT32_MAX) throw std::invalid_argument("too many points for the index");

    auto geo = std::make_shared<Geometry>();
    Region box{locations[0].x, locations[0].y, locations[0].x, locations[0].y, std::nullopt};
    for (const auto& pt : locations) {
        box.xmin = std::min(box.xmin, pt.x);
        box.xmax = std::max(box.xmax, pt.x);
        box.ymin = std::min(box.ymin, pt.y);
        box.ymax = std::max(box.ymax, pt.y);
    }
    geo->bbox = box;
    // A degenerate axis (all points share one coordinate) gets a single cell.
    geo->gx = box.xmax > box.xmin ? res.gx : 1;
    geo->gy = box.ymax > box.ymin ? res.gy : 1;
    geo->ex = make_edges(box.xmin, box.xmax, geo->gx, "x");
    geo->ey = make_edges(box.ymin, box.ymax, geo->gy, "y");

    const std::size_t ncells = static_cast<std::size_t>(geo->gx) * static_cast<std::size_t>(geo->gy);
    std::vector<std::uint32_t> cell(locations.size());
    std::vector<std::int64_t> cell_n(ncells, 0);
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const auto c = cell_of(geo->ex, locations[i].x);
        const auto r = cell_of(geo->ey, locations[i].y);
        cell[i] = r * static_cast<std::uint32_t>(geo->gx) + c;
        ++cell_n[cell[i]];
    }
    geo->cell_start.assign(ncells + 1, 0);
    for (std::size_t c = 0; c < ncells; ++c)
        geo->cell_start[c + 1] = geo->cell_start[c] + static_cast<std::uint32_t>(cell_n[c]);

    geo->order.resize(locations.size());
    geo->pts.resize(locations.size());
    std::vector<std::uint32_t> cursor(geo->cell_start.begin(), geo->cell_start.end() - 1);
    for (std::size_t i = 0; i < locations.size(); ++i) {
        const auto pos = cursor[cell[i]]++;
        geo->order[pos] = static_cast<std::uint32_t>(i);
        geo->pts[pos] = locations[i];
    }
    geo->n_prefix = prefix_table(cell_n, geo->gx, geo->gy);

    SpatialIndex base(std::move(geo), nullptr);
    return base.with_labels(labels);
}

SpatialIndex SpatialIndex::with_labels(std::span<const std::uint8_t> labels) const {
    const auto& geo = *geo_;
    if (labels.size() != geo.order.size()) {
        throw std::invalid_argument("with_labels: expected " + std::to_string(geo.order.size()) + " labels, got " +
                                    std::to_string(labels.size()));
    }
    auto lab = std::make_shared<Labeling>();
    lab->sorted.resize(labels.size());
    const std::size_t ncells = geo.cell_start.size() - 1;
    std::vector<std::int64_t> cell_p(ncells, 0);
    for (std::size_t c = 0; c < ncells; ++c) {
        std::int64_t sum = 0;
        for (auto pos = geo.cell_start[c]; pos < geo.cell_start[c + 1]; ++pos) {
            const std::uint8_t v = labels[geo.order[pos]] != 0 ? 1 : 0;
            lab->sorted[pos] = v;
            sum += v;
        }
        cell_p[c] = sum;
        lab->total += sum;
    }
    lab->p_prefix = prefix_table(cell_p, geo.gx, geo.gy);
    return SpatialIndex(geo_, std::move(lab));
}

RegionCounts SpatialIndex::range_count(const Region& r) const {
    const auto& geo = *geo_;
    const auto sx = axis_span(geo.ex, r.xmin, r.xmax);
    const auto sy = axis_span(geo.ey, r.ymin, r.ymax);
    if (sx.empty() || sy.empty()) return {};

    const std::size_t stride = static_cast<std::size_t>(geo.gx) + 1;
    RegionCounts out;
    out.n = block_sum(geo.n_prefix, stride, sy.f0, sy.f1, sx.f0, sx.f1);
    out.p = block_sum(lab_->p_prefix, stride, sy.f0, sy.f1, sx.f0, sx.f1);
    for (auto row = sy.o0; row < sy.o1; ++row) {
        const bool row_full = row >= sy.f0 && row < sy.f1;
        for (auto col = sx.o0; col < sx.o1; ++col) {
            if (row_full && col >= sx.f0 && col < sx.f1) continue;
            const std::size_t c = static_cast<std::size_t>(row) * geo.gx + col;
            for (auto pos = geo.cell_start[c]; pos < geo.cell_start[c + 1]; ++pos) {
                if (contains(r, geo.pts[pos], geo.bbox)) {
                    ++out.n;
                    out.p += lab_->sorted[pos];
                }
            }
        }
    }
    return out;
}

std::size_t SpatialIndex::size() const { return geo_->order.size(); }
std::int64_t SpatialIndex::positives() const { return lab_->total; }
const Region& SpatialIndex::bbox() const { return geo_->bbox; }
GridResolution SpatialIndex::resolution() const { return {geo_->gx, geo_->gy}; }

std::vector<std::uint8_t> SpatialIndex::labels() const {
    std::vector<std::uint8_t> out(size());
    for (std::size_t pos = 0; pos < out.size(); ++pos) out[geo_->order[pos]] = lab_->sorted[pos];
    return out;
}

CompiledRegions::CompiledRegions(const SpatialIndex& ix, std::span<const Region> regions) : geo_(ix.geo_) {
    const auto& geo = *geo_;
    const std::size_t stride = static_cast<std::size_t>(geo.gx) + 1;
    n_.reserve(regions.size());
    blocks_.reserve(regions.size());
    edge_start_.reserve(regions.size() + 1);
    edge_start_.push_back(0);
    for (const auto& r : regions) {
        const auto sx = axis_span(geo.ex, r.xmin, r.xmax);
        const auto sy = axis_span(geo.ey, r.ymin, r.ymax);
        if (sx.empty() || sy.empty()) {
            n_.push_back(0);
            blocks_.push_back({0, 0, 0, 0});
            edge_start_.push_back(edge_points_.size());
            continue;
        }
        std::int64_t n = block_sum(geo.n_prefix, stride, sy.f0, sy.f1, sx.f0, sx.f1);
        const bool has_block = sy.f0 < sy.f1 && sx.f0 < sx.f1;
        blocks_.push_back(has_block ? Block{sy.f0, sy.f1, sx.f0, sx.f1} : Block{0, 0, 0, 0});
        for (auto row = sy.o0; row < sy.o1; ++row) {
            const bool row_full = row >= sy.f0 && row < sy.f1;
            for (auto col = sx.o0; col < sx.o1; ++col) {
                if (row_full && col >= sx.f0 && col < sx.f1) continue;
                const std::size_t c = static_cast<std::size_t>(row) * geo.gx + col;
                for (auto pos = geo.cell_start[c]; pos < geo.cell_start[c + 1]; ++pos) {
                    if (contains(r, geo.pts[pos], geo.bbox)) {
                        edge_points_.push_back(pos);
                        ++n;
                    }
                }
            }
        }
        n_.push_back(n);
        edge_start_.push_back(edge_points_.size());
    }
}

void CompiledRegions::positives(const SpatialIndex& ix, std::span<std::int64_t> out) const {
    if (ix.geo_ != geo_) throw std::invalid_argument("CompiledRegions used with a different index geometry");
    if (out.size() != size()) throw std::invalid_argument("CompiledRegions: output size mismatch");
    const auto& lab = *ix.lab_;
    const std::size_t stride = static_cast<std::size_t>(geo_->gx) + 1;
    const auto* sorted = lab.sorted.data();
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& b = blocks_[i];
        std::int64_t p = block_sum(lab.p_prefix, stride, b.r0, b.r1, b.c0, b.c1);
        for (auto k = edge_start_[i]; k < edge_start_[i + 1]; ++k) p += sorted[edge_points_[k]];
        out[i] = p;
    }
}

std::vector<RegionCounts> CompiledRegions::counts(const SpatialIndex& ix) const {
    std::vector<std::int64_t> p(size());
    positives(ix, p);
    std::vector<RegionCounts> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = {n_[i], p[i]};
    return out;
}

}  // namespace spatialfair
