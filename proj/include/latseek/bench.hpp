#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "latseek/search.hpp"

namespace latseek {

enum class Algorithm { Scan = 1, Drift = 2 };

std::string algorithm_name(Algorithm a);

/// Per-trial outcome. `seed` is the derived 64-bit trial seed; together
/// with the trial_id it reproduces the trial in isolation.
struct TrialMetrics {
    std::int64_t trial_id = 0;
    bool success = false;
    std::int64_t measurements = 0;
    std::int64_t iterations = 0;
    bool converged = false;
    std::int64_t elapsed_steps = 0;
    std::uint64_t seed = 0;
};

struct SweepSummary {
    std::string kernel;
    Algorithm algorithm = Algorithm::Scan;
    int r = 0;
    std::int64_t trials = 0;
    double detection_probability = 0.0;
    double error_probability = 0.0;
    double mean_measurements = 0.0;         // over all trials (headline figure)
    double mean_measurements_success = 0.0; // over successful trials only; NaN if none
    double relative_efficiency = 0.0;       // mean_measurements / detection_probability
};

struct BenchConfig {
    SimParams params;
    ScanSearchConfig scan;
    DriftSearchConfig drift;
    std::int64_t seed_step = 30; // census step for seed-site selection
};

struct SweepResult {
    SweepSummary summary;
    std::vector<TrialMetrics> trials;
};

/// One independent detection trial. Streams derive from
/// mix64(base_seed, trial_id), so sweeps decompose: the same trial_id gives
/// the same trial no matter how the sweep is batched.
TrialMetrics run_trial(Algorithm algorithm, const StepKernel& kernel, int r,
                       std::uint64_t base_seed, const BenchConfig& cfg, std::int64_t trial_id);

/// M trials executed on a worker pool (size from LATSEEK_THREADS, default
/// hardware concurrency), aggregated in trial order regardless of
/// completion order. A trial that throws is recorded as non-converged;
/// the sweep never aborts.
SweepResult run_sweep(Algorithm algorithm, const StepKernel& kernel,
                      const std::string& kernel_label, int r, std::int64_t trials,
                      std::uint64_t base_seed, const BenchConfig& cfg,
                      std::int64_t trial_offset = 0);

/// CSV with header algorithm,kernel,r,M,p_detect,p_error,mean_measurements,
/// rel_efficiency; UTF-8, LF, '.' decimal separator, 17 significant digits.
void write_summary_csv(std::ostream& os, std::span<const SweepSummary> summaries);

/// Self-contained SVG: the metric against r, one polyline per kernel
/// (per kernel+algorithm when several algorithms are mixed), labeled axes,
/// byte-deterministic for identical input. metric is one of "p_error",
/// "mean_measurements", "rel_efficiency".
void write_metric_svg(std::ostream& os, std::span<const SweepSummary> summaries,
                      const std::string& metric);

/// NDJSON trial dump, one object per trial.
void write_trials_ndjson(std::ostream& os, std::span<const TrialMetrics> trials);

unsigned worker_count();

} // namespace latseek
