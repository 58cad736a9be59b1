#include "spatialfair/meanvar.hpp"

#include <algorithm>
#include <stdexcept>

namespace spatialfair {

namespace {

struct PartitionStats {
    std::vector<Contribution> nonempty;
    double mean = 0.0;
    double variance = 0.0;
};

PartitionStats partition_stats(const SpatialIndex& ix, const Partitioning& part, std::size_t index) {
    PartitionStats st;
    const CompiledRegions compiled(ix, part.regions);
    const auto counts = compiled.counts(ix);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i].n == 0) continue;
        Contribution c;
        c.region = part.regions[i];
        c.counts = counts[i];
        c.local_rate = static_cast<double>(counts[i].p) / static_cast<double>(counts[i].n);
        c.partitioning = index;
        st.nonempty.push_back(c);
    }
    if (st.nonempty.empty()) throw std::invalid_argument("partitioning has no nonempty partition");
    for (const auto& c : st.nonempty) st.mean += c.local_rate;
    st.mean /= static_cast<double>(st.nonempty.size());
    for (auto& c : st.nonempty) {
        const double d = c.local_rate - st.mean;
        c.contribution = d * d;
        st.variance += c.contribution;
    }
    st.variance /= static_cast<double>(st.nonempty.size());
    return st;
}

void rank_contributions(std::vector<Contribution>& cs, std::size_t k) {
    std::stable_sort(cs.begin(), cs.end(),
                     [](const Contribution& a, const Contribution& b) { return a.contribution > b.contribution; });
    if (cs.size() > k) cs.resize(k);
}

}  // namespace

double partitioning_variance(const SpatialIndex& ix, const Partitioning& part) {
    return partition_stats(ix, part, 0).variance;
}

std::vector<Contribution> top_contributions(const SpatialIndex& ix, const Partitioning& part, std::size_t k) {
    if (k < 1) throw std::invalid_argument("top_contributions: k must be >= 1");
    auto st = partition_stats(ix, part, 0);
    rank_contributions(st.nonempty, k);
    return st.nonempty;
}

MeanVarReport mean_var(const SpatialIndex& ix, std::span<const Partitioning> parts, std::size_t top_k) {
    if (parts.empty()) throw std::invalid_argument("mean_var: no partitionings");
    MeanVarReport report;
    std::vector<Contribution> pooled;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto st = partition_stats(ix, parts[i], i);
        report.per_partitioning.push_back({describe(parts[i].provenance), st.variance, st.nonempty.size()});
        report.mean_var += st.variance;
        if (top_k > 0) {
            pooled.insert(pooled.end(), st.nonempty.begin(), st.nonempty.end());
            // Keep the pool bounded while scanning many partitionings.
            if (pooled.size() > 4 * top_k + 4096) rank_contributions(pooled, top_k);
        }
    }
    report.mean_var /= static_cast<double>(parts.size());
    if (top_k > 0) {
        rank_contributions(pooled, top_k);
        report.top_contributors = std::move(pooled);
    }
    return report;
}

nlohmann::json to_json(const MeanVarReport& report) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& p : report.per_partitioning)
        per.push_back({{"provenance", p.provenance}, {"variance", p.variance}, {"nonempty", p.nonempty}});
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < report.top_contributors.size(); ++i) {
        const auto& c = report.top_contributors[i];
        nlohmann::json region = region_to_json(c.region);
        region.erase("center_id");
        top.push_back({{"rank", i + 1},
                       {"region", region},
                       {"n", c.counts.n},
                       {"p", c.counts.p},
                       {"rho", c.local_rate},
                       {"contribution", c.contribution},
                       {"partitioning", c.partitioning}});
    }
    return {{"schema", 1}, {"mean_var", report.mean_var}, {"per_partitioning", per}, {"top_contributors", top}};
}

}  // namespace spatialfair
