#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "spatialfair/core.hpp"
#include "spatialfair/geometry.hpp"

namespace spatialfair {

struct RegionCounts {
    std::int64_t n = 0;  // observations inside
    std::int64_t p = 0;  // positive outcomes inside

    friend bool operator==(const RegionCounts&, const RegionCounts&) = default;
};

struct GridResolution {
    int gx = 1;
    int gy = 1;

    // ceil(sqrt(N)) cells per axis, capped at 1024.
    static GridResolution default_for(std::size_t n);
};

// Uniform cell grid over the dataset bounding box with prefix-summed cell
// counts. Cell-aligned parts of a query are answered from the prefix tables,
// cells cut by the query edge are resolved point by point, so answers are
// exact and independent of the grid resolution.
//
// The geometry (cells, point buckets, count prefix sums) is shared between an
// index and every view created by with_labels(); only the positive counts
// differ. All views are immutable and safe to query concurrently.
class SpatialIndex {
public:
    static SpatialIndex build(const Dataset& d);
    static SpatialIndex build(const Dataset& d, GridResolution res);
    static SpatialIndex build(std::span<const Point> locations, std::span<const std::uint8_t> labels,
                              GridResolution res);

    RegionCounts range_count(const Region& r) const;

    // Same geometry, different outcome vector (indexed like the dataset).
    SpatialIndex with_labels(std::span<const std::uint8_t> labels) const;

    std::size_t size() const;
    std::int64_t positives() const;
    const Region& bbox() const;
    GridResolution resolution() const;
    // Active labeling, in dataset order.
    std::vector<std::uint8_t> labels() const;

private:
    friend class CompiledRegions;

    struct Geometry;
    struct Labeling;

    SpatialIndex(std::shared_ptr<const Geometry> geo, std::shared_ptr<const Labeling> lab);

    std::shared_ptr<const Geometry> geo_;
    std::shared_ptr<const Labeling> lab_;
};

// A region list pre-resolved against an index geometry: for every region the
// fully covered cell block and the individual points from the cut cells are
// stored, so that counting positives under a new labeling needs no geometry
// work. n(R) does not depend on the labeling and is computed once.
class CompiledRegions {
public:
    CompiledRegions(const SpatialIndex& ix, std::span<const Region> regions);

    std::size_t size() const { return n_.size(); }
    std::span<const std::int64_t> n() const { return n_; }

    // p(R) of every region under the labeling of `ix`, which must share the
    // geometry the regions were compiled against.
    void positives(const SpatialIndex& ix, std::span<std::int64_t> out) const;
    std::vector<RegionCounts> counts(const SpatialIndex& ix) const;

private:
    struct Block {
        std::uint32_t r0, r1, c0, c1;  // rows [r0, r1), cols [c0, c1); empty when r0 == r1
    };

    std::shared_ptr<const SpatialIndex::Geometry> geo_;
    std::vector<std::int64_t> n_;
    std::vector<Block> blocks_;
    std::vector<std::size_t> edge_start_;   // size() + 1 offsets into edge_points_
    std::vector<std::uint32_t> edge_points_;  // positions in cell-sorted order
};

}  // namespace spatialfair
