#include "latseek/sensor.hpp"

#include <algorithm>

namespace latseek {

std::int64_t measure(const OccupancyField& field, SiteIndex w, MeasurementLedger& ledger) {
    ledger.charge(field.step_index, 1);
    return count_at(field, w);
}

std::vector<std::pair<SiteIndex, double>> window_average(Simulator& sim,
                                                         std::vector<SiteIndex> sites,
                                                         std::int64_t window,
                                                         MeasurementLedger& ledger) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    if (sites.empty()) throw EmptySiteSet("window_average: no sites to measure");
    if (window < 1) throw Error("window_average: window must be >= 1");

    std::vector<double> sums(sites.size(), 0.0);
    for (std::int64_t m = 0; m < window; ++m) {
        sim.advance();
        ledger.charge(sim.step_index(), static_cast<std::int64_t>(sites.size()));
        for (std::size_t s = 0; s < sites.size(); ++s)
            sums[s] += sim.count(sites[s]);
    }

    std::vector<std::pair<SiteIndex, double>> out;
    out.reserve(sites.size());
    for (std::size_t s = 0; s < sites.size(); ++s)
        out.push_back({sites[s], sums[s] / static_cast<double>(window)});
    return out;
}

std::pair<SiteIndex, double> argmax_site(
    const std::vector<std::pair<SiteIndex, double>>& values) {
    if (values.empty()) throw EmptySiteSet("argmax over empty site set");
    std::size_t best = 0;
    for (std::size_t s = 1; s < values.size(); ++s)
        if (values[s].second > values[best].second) best = s; // ties keep lex-smallest
    return values[best];
}

} // namespace latseek
