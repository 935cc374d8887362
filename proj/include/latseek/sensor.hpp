#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "latseek/field.hpp"

namespace latseek {

/// Running account of sensor usage. Each site read at each time step costs
/// one measurement. A nominal per-step budget (r^2 sensors) can be set;
/// exceeding it is reported, not fatal, because both search algorithms have
/// phases whose window sizes the budget does not cleanly cover.
class MeasurementLedger {
public:
    explicit MeasurementLedger(std::int64_t budget = 0) : budget_(budget) {}

    void charge(std::int64_t step, std::int64_t n = 1) {
        total_ += n;
        per_step_[step] += n;
    }

    std::int64_t total() const { return total_; }
    std::int64_t budget() const { return budget_; }
    const std::map<std::int64_t, std::int64_t>& per_step() const { return per_step_; }

    /// Number of steps on which more sites were measured than the budget.
    std::int64_t budget_violations() const {
        if (budget_ <= 0) return 0;
        std::int64_t v = 0;
        for (const auto& [step, n] : per_step_)
            if (n > budget_) ++v;
        return v;
    }

private:
    std::int64_t total_ = 0;
    std::int64_t budget_ = 0;
    std::map<std::int64_t, std::int64_t> per_step_;
};

/// Read the particle count at one site of the current field. Every call
/// costs one measurement, including repeated reads of the same site.
std::int64_t measure(const OccupancyField& field, SiteIndex w, MeasurementLedger& ledger);

/// Advance the simulation `window` steps and return, for each site, the
/// average count over the advanced steps [n1+1, n1+window]. The ledger is
/// charged |sites| per advanced step. Sites are deduplicated and the result
/// is sorted lexicographically.
std::vector<std::pair<SiteIndex, double>> window_average(Simulator& sim,
                                                         std::vector<SiteIndex> sites,
                                                         std::int64_t window,
                                                         MeasurementLedger& ledger);

/// Lexicographically-smallest maximizer of a sorted (site, value) list.
std::pair<SiteIndex, double> argmax_site(
    const std::vector<std::pair<SiteIndex, double>>& values);

} // namespace latseek
