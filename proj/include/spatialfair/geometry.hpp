#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>

namespace spatialfair {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned rectangle. Membership is half-open, [xmin, xmax) x [ymin, ymax),
// except that an upper edge lying on or beyond the dataset bounding box is
// closed so that points on the outer boundary are never lost.
struct Region {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;
    // Links squares of a scan set back to the k-means center they grew from.
    std::optional<std::int64_t> center_id;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool valid() const { return xmin <= xmax && ymin <= ymax; }

    friend bool operator==(const Region&, const Region&) = default;
};

inline double intersection_area(const Region& a, const Region& b) {
    const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

// Regions that merely share an edge do not overlap.
inline bool overlaps(const Region& a, const Region& b) { return intersection_area(a, b) > 0.0; }

inline double jaccard(const Region& a, const Region& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Point membership given the bounding box whose max edges are closed.
inline bool contains(const Region& r, const Point& pt, const Region& bbox) {
    const bool in_x = pt.x >= r.xmin && (pt.x < r.xmax || (pt.x == r.xmax && r.xmax >= bbox.xmax));
    const bool in_y = pt.y >= r.ymin && (pt.y < r.ymax || (pt.y == r.ymax && r.ymax >= bbox.ymax));
    return in_x && in_y;
}

}  // namespace spatialfair
