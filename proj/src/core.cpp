#include "spatialfair/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace spatialfair {

namespace {

std::string with_line(const std::string& what, std::size_t line) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ": " + what;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

double parse_coordinate(std::string_view field, const char* name, std::size_t line) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw DataError(std::string("invalid ") + name + " '" + std::string(field) + "'", line);
    }
    return value;
}

std::uint8_t parse_binary(std::string_view field, const char* name, std::size_t line) {
    if (field == "0") return 0;
    if (field == "1") return 1;
    throw DataError(std::string(name) + " must be 0 or 1, got '" + std::string(field) + "'", line);
}

}  // namespace

DataError::DataError(const std::string& what, std::size_t line)
    : std::runtime_error(with_line(what, line)), line_(line) {}

std::string_view to_string(MeasureMode mode) {
    switch (mode) {
    case MeasureMode::statistical_parity: return "statistical_parity";
    case MeasureMode::equal_opportunity: return "equal_opportunity";
    case MeasureMode::predictive_equality: return "predictive_equality";
    }
    return "statistical_parity";
}

MeasureMode parse_measure_mode(std::string_view text) {
    if (text == "parity" || text == "statistical_parity" || text == "statistical-parity")
        return MeasureMode::statistical_parity;
    if (text == "opportunity" || text == "equal_opportunity" || text == "equal-opportunity")
        return MeasureMode::equal_opportunity;
    if (text == "predictive-equality" || text == "predictive_equality")
        return MeasureMode::predictive_equality;
    throw std::invalid_argument("unknown measure mode '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<Observation> observations) : observations_(std::move(observations)) {
    if (observations_.empty()) throw DataError("dataset is empty");
    constexpr double inf = std::numeric_limits<double>::infinity();
    bbox_ = Region{inf, inf, -inf, -inf, std::nullopt};
    for (const auto& o : observations_) {
        if (o.outcome > 1) throw DataError("outcome of '" + o.id + "' is not binary");
        if (o.label && *o.label > 1) throw DataError("label of '" + o.id + "' is not binary");
        if (!std::isfinite(o.lon) || !std::isfinite(o.lat))
            throw DataError("location of '" + o.id + "' is not finite");
        positives_ += o.outcome;
        bbox_.xmin = std::min(bbox_.xmin, o.lon);
        bbox_.xmax = std::max(bbox_.xmax, o.lon);
        bbox_.ymin = std::min(bbox_.ymin, o.lat);
        bbox_.ymax = std::max(bbox_.ymax, o.lat);
    }
}

std::vector<Point> Dataset::locations() const {
    std::vector<Point> pts;
    pts.reserve(observations_.size());
    for (const auto& o : observations_) pts.push_back(o.location());
    return pts;
}

std::vector<std::uint8_t> Dataset::outcomes() const {
    std::vector<std::uint8_t> out;
    out.reserve(observations_.size());
    for (const auto& o : observations_) out.push_back(o.outcome);
    return out;
}

std::vector<Observation> apply_measure_mode(std::vector<Observation> rows, MeasureMode mode) {
    if (mode == MeasureMode::statistical_parity) return rows;
    const std::uint8_t keep = mode == MeasureMode::equal_opportunity ? 1 : 0;
    std::vector<Observation> out;
    for (auto& row : rows) {
        if (!row.label) {
            throw DataError("measure mode " + std::string(to_string(mode)) + " requires a label, but '" +
                            row.id + "' has none");
        }
        if (*row.label == keep) out.push_back(std::move(row));
    }
    return out;
}

std::vector<Observation> parse_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw DataError("missing header");
    ++lineno;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_fields(line);
    const bool has_label = header.size() == 5;
    const bool header_ok = (header.size() == 4 || has_label) && header[0] == "id" && header[1] == "lon" &&
                           header[2] == "lat" && header[3] == "outcome" && (!has_label || header[4] == "label");
    if (!header_ok) throw DataError("header must be id,lon,lat,outcome[,label]", lineno);

    std::vector<Observation> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()),
                            lineno);
        }
        Observation o;
        o.id = std::string(fields[0]);
        o.lon = parse_coordinate(fields[1], "lon", lineno);
        o.lat = parse_coordinate(fields[2], "lat", lineno);
        o.outcome = parse_binary(fields[3], "outcome", lineno);
        if (has_label && !fields[4].empty()) o.label = parse_binary(fields[4], "label", lineno);
        rows.push_back(std::move(o));
    }
    return rows;
}

Dataset read_dataset(std::istream& in, MeasureMode mode) {
    auto rows = apply_measure_mode(parse_csv(in), mode);
    if (rows.empty()) throw DataError("no observations left after applying measure mode");
    return Dataset(std::move(rows));
}

Dataset load_dataset(const std::string& path, MeasureMode mode) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_dataset(in, mode);
}

void write_csv(std::ostream& out, const std::vector<Observation>& rows) {
    const bool any_label = std::any_of(rows.begin(), rows.end(), [](const auto& o) { return o.label.has_value(); });
    out << (any_label ? "id,lon,lat,outcome,label\n" : "id,lon,lat,outcome\n");
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& o : rows) {
        buf.str({});
        buf << o.id << ',' << o.lon << ',' << o.lat << ',' << int(o.outcome);
        if (any_label) {
            buf << ',';
            if (o.label) buf << int(*o.label);
        }
        buf << '\n';
        out << buf.str();
    }
}

void save_dataset(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_csv(out, d.observations());
    if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace spatialfair
