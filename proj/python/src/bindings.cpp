#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "spatialfair/audit.hpp"
#include "spatialfair/meanvar.hpp"
#include "spatialfair/synth.hpp"

namespace py = pybind11;
namespace sf = spatialfair;

namespace {

py::object to_python(const nlohmann::json& j) {
    switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
        py::list out;
        for (const auto& v : j) out.append(to_python(v));
        return std::move(out);
    }
    case nlohmann::json::value_t::object: {
        py::dict out;
        for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
        return std::move(out);
    }
    default: return py::none();
    }
}

sf::Dataset dataset_from_columns(const std::vector<double>& lon, const std::vector<double>& lat,
                                 const std::vector<int>& outcome, const std::optional<std::vector<int>>& label,
                                 const std::string& mode) {
    if (lon.size() != lat.size() || lon.size() != outcome.size() || (label && label->size() != lon.size()))
        throw std::invalid_argument("column lengths differ");
    std::vector<sf::Observation> rows(lon.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (outcome[i] != 0 && outcome[i] != 1) throw sf::DataError("outcome must be 0 or 1", i + 2);
        rows[i].id = std::to_string(i);
        rows[i].lon = lon[i];
        rows[i].lat = lat[i];
        rows[i].outcome = static_cast<std::uint8_t>(outcome[i]);
        if (label) {
            if ((*label)[i] != 0 && (*label)[i] != 1) throw sf::DataError("label must be 0 or 1", i + 2);
            rows[i].label = static_cast<std::uint8_t>((*label)[i]);
        }
    }
    auto kept = sf::apply_measure_mode(std::move(rows), sf::parse_measure_mode(mode));
    if (kept.empty()) throw sf::DataError("no observations left after applying measure mode");
    return sf::Dataset(std::move(kept));
}

std::vector<sf::Region> as_regions(const std::vector<std::array<double, 4>>& boxes) {
    std::vector<sf::Region> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes) out.push_back({b[0], b[1], b[2], b[3], std::nullopt});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spatial fairness auditing with a Bernoulli scan statistic";

    py::register_exception<sf::DataError>(m, "DataError", PyExc_ValueError);

    py::class_<sf::Region>(m, "Region")
        .def(py::init([](double xmin, double ymin, double xmax, double ymax, std::optional<std::int64_t> center_id) {
                 return sf::Region{xmin, ymin, xmax, ymax, center_id};
             }),
             py::arg("xmin"), py::arg("ymin"), py::arg("xmax"), py::arg("ymax"), py::arg("center_id") = py::none())
        .def_readwrite("xmin", &sf::Region::xmin)
        .def_readwrite("ymin", &sf::Region::ymin)
        .def_readwrite("xmax", &sf::Region::xmax)
        .def_readwrite("ymax", &sf::Region::ymax)
        .def_readwrite("center_id", &sf::Region::center_id)
        .def("area", &sf::Region::area)
        .def("__repr__", [](const sf::Region& r) {
            return "Region(" + std::to_string(r.xmin) + ", " + std::to_string(r.ymin) + ", " + std::to_string(r.xmax) +
                   ", " + std::to_string(r.ymax) + ")";
        });

    py::class_<sf::Dataset>(m, "Dataset")
        .def_property_readonly("N", &sf::Dataset::size)
        .def_property_readonly("P", &sf::Dataset::positives)
        .def_property_readonly("rho", &sf::Dataset::rho)
        .def_property_readonly("bbox", &sf::Dataset::bbox)
        .def("locations",
             [](const sf::Dataset& d) {
                 std::vector<std::pair<double, double>> out;
                 for (const auto& p : d.locations()) out.emplace_back(p.x, p.y);
                 return out;
             })
        .def("outcomes", [](const sf::Dataset& d) {
            const auto o = d.outcomes();
            return std::vector<int>(o.begin(), o.end());
        })
        .def("save", [](const sf::Dataset& d, const std::string& path) { sf::save_dataset(path, d); });

    m.def("load_dataset", [](const std::string& path, const std::string& mode) {
        return sf::load_dataset(path, sf::parse_measure_mode(mode));
    }, py::arg("path"), py::arg("mode") = "parity");
    m.def("dataset_from_columns", &dataset_from_columns, py::arg("lon"), py::arg("lat"), py::arg("outcome"),
          py::arg("label") = py::none(), py::arg("mode") = "parity");

    m.def("log_lik_null_max", &sf::log_lik_null_max, py::arg("N"), py::arg("P"));
    m.def("llr_from_counts",
          [](std::int64_t n, std::int64_t p, std::int64_t N, std::int64_t P, const std::string& direction) {
              return sf::llr_from_counts(n, p, N, P, sf::parse_direction(direction));
          },
          py::arg("n"), py::arg("p"), py::arg("N"), py::arg("P"), py::arg("direction") = "two-sided");

    m.def("range_count",
          [](const sf::Dataset& d, const std::vector<std::array<double, 4>>& boxes, int gx, int gy) {
              const auto ix = gx > 0 ? sf::SpatialIndex::build(d, {gx, gy}) : sf::SpatialIndex::build(d);
              std::vector<std::pair<std::int64_t, std::int64_t>> out;
              for (const auto& r : as_regions(boxes)) {
                  const auto c = ix.range_count(r);
                  out.emplace_back(c.n, c.p);
              }
              return out;
          },
          py::arg("dataset"), py::arg("regions"), py::arg("gx") = 0, py::arg("gy") = 0,
          "(n, p) for each (xmin, ymin, xmax, ymax) box.");

    m.def("global_p_value",
          [](double tau_log, std::vector<double> simulated) {
              std::sort(simulated.begin(), simulated.end(), std::greater<>());
              const auto w = static_cast<std::int64_t>(simulated.size()) + 1;
              return sf::global_p_value(tau_log, {std::move(simulated), w, 0, sf::Direction::two_sided});
          },
          py::arg("tau_log"), py::arg("simulated"));
    m.def("critical_value",
          [](std::vector<double> simulated, double alpha) {
              std::sort(simulated.begin(), simulated.end(), std::greater<>());
              const auto w = static_cast<std::int64_t>(simulated.size()) + 1;
              return sf::critical_value({std::move(simulated), w, 0, sf::Direction::two_sided}, alpha);
          },
          py::arg("simulated"), py::arg("alpha"));

    m.def("regular_grid", [](const sf::Region& bbox, int mx, int my) { return sf::regular_grid(bbox, mx, my).regions; },
          py::arg("bbox"), py::arg("mx"), py::arg("my"));
    m.def("random_partitionings",
          [](const sf::Region& bbox, int count, int min_splits, int max_splits, std::uint64_t seed) {
              std::vector<std::vector<sf::Region>> out;
              for (auto& part : sf::random_partitionings(bbox, count, min_splits, max_splits, seed))
                  out.push_back(std::move(part.regions));
              return out;
          },
          py::arg("bbox"), py::arg("count"), py::arg("min_splits") = 10, py::arg("max_splits") = 40,
          py::arg("seed") = 0);
    m.def("kmeans_centers",
          [](const sf::Dataset& d, int k, std::uint64_t seed, int max_iters) {
              std::vector<std::pair<double, double>> out;
              for (const auto& c : sf::kmeans_centers(d, k, seed, max_iters)) out.emplace_back(c.x, c.y);
              return out;
          },
          py::arg("dataset"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 100);

    m.def("audit",
          [](const sf::Dataset& d, const std::string& family_json, double alpha, std::int64_t worlds,
             std::uint64_t seed, const std::string& direction, std::size_t top_k, unsigned threads) {
              const auto spec = nlohmann::json::parse(family_json);
              sf::RegionFamilySpec family;
              const auto kind = spec.at("kind").get<std::string>();
              if (kind == "regular") {
                  family = sf::GridFamily{spec.at("mx").get<int>(), spec.at("my").get<int>()};
              } else if (kind == "random") {
                  family = sf::RandomPartitionFamily{spec.value("count", 100), spec.value("min_splits", 10),
                                                     spec.value("max_splits", 40)};
              } else if (kind == "squares") {
                  sf::SquareFamily s;
                  s.centers = spec.value("centers", 100);
                  if (spec.contains("sides")) s.sides = spec.at("sides").get<std::vector<double>>();
                  family = s;
              } else if (kind == "file") {
                  family = sf::FileFamily{spec.at("path").get<std::string>()};
              } else {
                  throw std::invalid_argument("unknown region family kind '" + kind + "'");
              }
              sf::AuditOptions opts;
              opts.alpha = alpha;
              opts.worlds = worlds;
              opts.seed = seed;
              opts.direction = sf::parse_direction(direction);
              opts.top_k = top_k;
              opts.threads = threads;
              sf::AuditReport report;
              {
                  py::gil_scoped_release release;
                  report = sf::run_audit(d, sf::build_region_family(d, family, seed), opts);
              }
              return to_python(sf::report_to_json(report));
          },
          py::arg("dataset"), py::arg("family"), py::arg("alpha") = 0.005, py::arg("worlds") = 1000,
          py::arg("seed") = 0, py::arg("direction") = "two-sided", py::arg("top_k") = 0, py::arg("threads") = 0,
          "Run an audit. `family` is a JSON object such as {\"kind\": \"regular\", \"mx\": 20, \"my\": 20}.");

    m.def("mean_var",
          [](const sf::Dataset& d, const std::vector<std::vector<sf::Region>>& partitionings, std::size_t top_k) {
              std::vector<sf::Partitioning> parts;
              for (const auto& regions : partitionings) parts.push_back({regions, sf::RegularProvenance{}});
              const auto ix = sf::SpatialIndex::build(d);
              return to_python(sf::to_json(sf::mean_var(ix, parts, top_k)));
          },
          py::arg("dataset"), py::arg("partitionings"), py::arg("top_k") = 0);

    m.def("gen_uniform_split", &sf::gen_uniform_split, py::arg("n"), py::arg("rect"), py::arg("seed") = 0);
    m.def("gen_fair_bernoulli",
          [](const std::vector<std::pair<double, double>>& locations, double rho, std::uint64_t seed) {
              std::vector<sf::Point> pts;
              for (const auto& [x, y] : locations) pts.push_back({x, y});
              return sf::gen_fair_bernoulli(pts, rho, seed);
          },
          py::arg("locations"), py::arg("rho"), py::arg("seed") = 0);
    m.def("gen_planted", &sf::gen_planted, py::arg("n"), py::arg("rect"), py::arg("plant"), py::arg("rho_bg"),
          py::arg("rho_in"), py::arg("seed") = 0);
}
