#pragma once

// Observations, datasets and measure-mode filtering.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spatialfair/geometry.hpp"

namespace spatialfair {

// Raised for malformed input data. `line()` is the 1-based line of the CSV
// that failed, or 0 when the failure is not tied to a line.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Observation {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
    std::uint8_t outcome = 0;
    std::optional<std::uint8_t> label;

    Point location() const { return {lon, lat}; }
};

enum class MeasureMode { statistical_parity, equal_opportunity, predictive_equality };

std::string_view to_string(MeasureMode mode);
// Accepts both the long names and the CLI spellings (parity, opportunity,
// predictive-equality).
MeasureMode parse_measure_mode(std::string_view text);

// Immutable after construction; safe to share across threads.
class Dataset {
public:
    // Validates every observation and computes N, P and the bounding box.
    explicit Dataset(std::vector<Observation> observations);

    const std::vector<Observation>& observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }
    std::int64_t positives() const { return positives_; }
    double rho() const { return static_cast<double>(positives_) / static_cast<double>(size()); }
    const Region& bbox() const { return bbox_; }

    std::vector<Point> locations() const;
    std::vector<std::uint8_t> outcomes() const;

private:
    std::vector<Observation> observations_;
    std::int64_t positives_ = 0;
    Region bbox_;
};

// statistical_parity keeps every row; equal_opportunity keeps label == 1;
// predictive_equality keeps label == 0. Order is preserved.
std::vector<Observation> apply_measure_mode(std::vector<Observation> rows, MeasureMode mode);

// CSV schema: header `id,lon,lat,outcome[,label]`, outcome/label in {0,1}.
std::vector<Observation> parse_csv(std::istream& in);
Dataset read_dataset(std::istream& in, MeasureMode mode);
Dataset load_dataset(const std::string& path, MeasureMode mode);

void write_csv(std::ostream& out, const std::vector<Observation>& rows);
void save_dataset(const std::string& path, const Dataset& d);

inline double global_rate(const Dataset& d) { return d.rho(); }

}  // namespace spatialfair
