#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "latseek/lattice.hpp"
#include "latseek/rng.hpp"

namespace latseek {

/// Sparse particle counts at one time step. Canonical form: entries sorted
/// lexicographically by site, no zero counts, every key strictly inside the
/// open box. Conservation invariant: live_total() + absorbed_total equals
/// injected_total after any step sequence.
struct OccupancyField {
    std::vector<std::pair<SiteIndex, std::int64_t>> counts;
    std::int64_t step_index = 0;
    std::int64_t absorbed_total = 0;
    std::int64_t injected_total = 0;

    /// Pre-initial field: nothing injected yet, step 0.
    static OccupancyField empty() { return {}; }

    /// Field at step 0 holding the step-0 injection cohort at the source.
    /// This is the convention under which E N_n matches the expected-field
    /// recursion (n+1 cohorts present at step n).
    static OccupancyField initial(const SimParams& params, RngStream& stream);

    std::int64_t live_total() const;
};

/// Injection law hook: draws the number of particles injected when the field
/// advances *to* the given step. The default law is geometric with mean
/// SimParams::injection_mean, independent of the step.
using InjectionLaw = std::function<std::int64_t(std::int64_t step, RngStream&)>;

InjectionLaw geometric_injection(double mean);

/// One time step: every site count is redistributed over the four
/// neighbors by a multinomial split, moves that land on or beyond the
/// closed box boundary are absorbed, then one injection draw is added at
/// the source. Sites are processed in lexicographic order so the stream
/// consumption is deterministic.
OccupancyField step(const OccupancyField& field, const StepKernel& kernel,
                    const SimParams& params, RngStream& stream);
OccupancyField step(const OccupancyField& field, const StepKernel& kernel,
                    const SimParams& params, RngStream& stream, const InjectionLaw& law);

std::int64_t count_at(const OccupancyField& field, SiteIndex w);

/// All occupied sites with counts, lexicographic order.
std::vector<std::pair<SiteIndex, std::int64_t>> snapshot(const OccupancyField& field);

/// NDJSON export, one {"i":..,"j":..,"count":..} object per line.
void write_snapshot_ndjson(std::ostream& os, const OccupancyField& field);

/// Minimal interface the sensor layer and the search algorithms see:
/// a simulation that can only move forward in time and report counts.
/// Measurements are destructive of time, never of state.
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual void advance() = 0;
    virtual std::int64_t step_index() const = 0;
    virtual double count(SiteIndex w) const = 0;
    virtual const SimParams& params() const = 0;
    virtual const StepKernel& kernel() const = 0;
    /// Occupied sites (value > 0) in lexicographic order.
    virtual std::vector<std::pair<SiteIndex, double>> occupied() const = 0;
};

/// The real particle system behind the Simulator interface.
class ParticleSimulation final : public Simulator {
public:
    ParticleSimulation(const StepKernel& kernel, const SimParams& params, RngStream stream,
                       bool initial_injection = true);
    ParticleSimulation(const StepKernel& kernel, const SimParams& params, RngStream stream,
                       InjectionLaw law, bool initial_injection = true);

    void advance() override;
    std::int64_t step_index() const override { return field_.step_index; }
    double count(SiteIndex w) const override {
        return static_cast<double>(count_at(field_, w));
    }
    const SimParams& params() const override { return params_; }
    const StepKernel& kernel() const override { return kernel_; }
    std::vector<std::pair<SiteIndex, double>> occupied() const override;

    const OccupancyField& field() const { return field_; }

private:
    StepKernel kernel_;
    SimParams params_;
    RngStream stream_;
    InjectionLaw law_;
    OccupancyField field_;
};

} // namespace latseek
