#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "latseek/field.hpp"
#include "latseek/lattice.hpp"

namespace latseek {

/// Dense expected-occupation field over a bounded index window.
/// values is row-major in (i, j) starting at origin (the lowest corner),
/// side cells per axis. Entries are expected particle counts.
struct ExpectedField {
    SiteIndex origin;
    std::int64_t side = 0;
    std::int64_t step_index = 0;
    std::vector<double> values;

    double at(SiteIndex w) const;
    double total_mass() const;
    /// Largest entry on the window boundary ring. Must stay below 1e-12,
    /// otherwise the window was too small for the requested step count.
    double max_edge_value() const;
    SiteIndex argmax() const; // lexicographically smallest among ties
};

/// Source-centered default window half-width: drift reach plus a six-sigma
/// diffusion envelope, floored at 64.
std::int64_t default_dp_half_width(const StepKernel& kernel, std::int64_t n_steps);

/// Incremental evolution of the expected field mu_n: one linear gather per
/// step with the axis-swapped kernel, plus the injection mass h*alpha at
/// the source. mu_0 is h*alpha at the source (the step-0 cohort).
/// Mass leaving the window is dropped, so results are only valid while the
/// window edge stays numerically empty.
class FieldEvolver {
public:
    FieldEvolver(const StepKernel& kernel, const SimParams& params, std::int64_t half_width);

    void advance();
    std::int64_t step_index() const { return step_; }
    std::int64_t half_width() const { return half_; }
    SiteIndex source() const { return source_; }

    double at(SiteIndex w) const;
    double total_mass() const;
    double max_edge_value() const;
    SiteIndex argmax() const;
    ExpectedField snapshot() const;

private:
    std::array<double, 4> ptilde_;
    SiteIndex source_;
    double injection_;
    std::int64_t half_ = 0;
    std::int64_t side_ = 0;   // padded side, includes ghost ring
    std::int64_t step_ = 0;
    std::int64_t reach_ = 0;  // bbox half-extent of non-zero support
    std::vector<double> cur_, nxt_;
};

/// Distribution of a single walker started at the origin: the plain
/// forward kernel, absorbing at the domain edge.
class WalkEvolver {
public:
    WalkEvolver(const StepKernel& kernel, std::int64_t domain_half);

    void advance();
    std::int64_t step_index() const { return step_; }
    std::int64_t domain_half() const { return half_; }

    /// P(X_n = start + (di, dj)); 0 outside the domain.
    double prob_at(std::int64_t di, std::int64_t dj) const;
    /// Total probability within the centered sub-window of given half-width.
    double mass_within(std::int64_t half) const;

private:
    std::array<double, 4> p_;
    std::int64_t half_ = 0;
    std::int64_t side_ = 0;
    std::int64_t step_ = 0;
    std::int64_t reach_ = 0;
    std::vector<double> cur_, nxt_;
};

/// Expected field after n_steps via the recursion. half_width 0 selects the
/// default window. Throws WindowTooSmall when mass reaches the window edge.
ExpectedField expected_field(const StepKernel& kernel, const SimParams& params,
                             std::int64_t n_steps, std::int64_t half_width = 0);

/// h*alpha times the cumulative single-particle distribution, the identity
/// partner of expected_field: both must agree to float accuracy on the same
/// window. Kept as an independent code path (forward kernel instead of the
/// axis-swapped one) so it doubles as a regression check of the swapped
/// bookkeeping.
ExpectedField cumulative_walk_field(const StepKernel& kernel, const SimParams& params,
                                    std::int64_t n_steps, std::int64_t half_width = 0);

/// Green's function of the walk restricted to a window around the source:
/// g(w) = sum_k P_e(X_k = w), truncated once the window-restricted
/// increment mass stays below tol for 10 consecutive steps and the fitted
/// geometric tail is below tol.
struct GreenFunction {
    SiteIndex source;
    std::int64_t half_width = 0;
    std::int64_t truncation_horizon = 0;
    double tail_bound = 0.0;
    std::vector<double> values; // row-major, offsets -half..half per axis

    double at(SiteIndex w) const;
    double at_offset(std::int64_t di, std::int64_t dj) const;
    SiteIndex argmax() const;
};

GreenFunction green_function(const StepKernel& kernel, SiteIndex source, double tol,
                             std::int64_t half_width);

/// Least-squares decay exponent of log P_e(X_n = w) over steps with
/// probability above 1e-14. Returns c > 0 for transient kernels.
double decay_rate(const StepKernel& kernel, SiteIndex source, SiteIndex w,
                  std::int64_t n_max);

struct ConsistencyPoint {
    std::int64_t n = 0;
    double mae = 0.0;
};

/// Monte-Carlo estimate of E |lambda_n(w)/(h*alpha) - g(w)| for each n.
/// tau < 0 uses the running average over steps [0, n-1]; tau >= 0 uses the
/// shifted window [tau+1, tau+n].
std::vector<ConsistencyPoint> consistency_experiment(const StepKernel& kernel,
                                                     const SimParams& params, SiteIndex w,
                                                     std::span<const std::int64_t> n_list,
                                                     int runs, std::int64_t tau = -1);

/// Noise-free stand-in for the particle system: counts are the exact
/// expected-field values. Used to test the search algorithms against the
/// landscape they provably climb.
class MuStubSimulation final : public Simulator {
public:
    MuStubSimulation(const StepKernel& kernel, const SimParams& params,
                     std::int64_t half_width);

    void advance() override { evolver_.advance(); }
    std::int64_t step_index() const override { return evolver_.step_index(); }
    double count(SiteIndex w) const override { return evolver_.at(w); }
    const SimParams& params() const override { return params_; }
    const StepKernel& kernel() const override { return kernel_; }
    std::vector<std::pair<SiteIndex, double>> occupied() const override;

private:
    StepKernel kernel_;
    SimParams params_;
    FieldEvolver evolver_;
};

/// NDJSON export of a dense grid, one {"i","j","count"} line per non-zero
/// cell, lexicographic order. Shared by field and Green's-function dumps.
void write_grid_ndjson(std::ostream& os, SiteIndex origin, std::int64_t side,
                       const std::vector<double>& values);

} // namespace latseek
