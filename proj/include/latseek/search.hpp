#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "latseek/field.hpp"
#include "latseek/sensor.hpp"

namespace latseek {

/// Square scanning-window search: recenter on the argmax of a time-averaged
/// (r+1)^2-site window until the argmax stops moving.
struct ScanSearchConfig {
    int r = 18;               // window parameter, r^2 sensor budget nominal
    std::int64_t n0 = 10;     // time window per iteration, steps
    int max_iters = 200;

    void validate() const {
        if (r < 2) throw InvalidParams("scan search: r must be >= 2");
        if (n0 < 1) throw InvalidParams("scan search: n0 must be >= 1");
        if (max_iters < 1) throw InvalidParams("scan search: max_iters must be >= 1");
    }
};

/// Drift-guided search: one horizontal line scan, then exploration sets
/// built from Brownian perturbations of the reversed-drift ray, with the
/// perturbation scale shrunk on improvement and widened on regression.
struct DriftSearchConfig {
    int r = 24;
    std::int64_t n0 = 10;     // initial line-scan time window
    std::int64_t n1 = 10;     // per-iteration time window
    double c = 0.5;           // spread multiplier, in (0,1)
    double dead_band = 0.0;   // K: improvement threshold for spread updates
    int max_iters = 500;

    void validate() const {
        if (r < 2) throw InvalidParams("drift search: r must be >= 2");
        if (n0 < 1 || n1 < 1) throw InvalidParams("drift search: time windows must be >= 1");
        if (!(c > 0.0 && c < 1.0)) throw InvalidParams("drift search: c must be in (0,1)");
        if (dead_band < 0.0) throw InvalidParams("drift search: dead band must be >= 0");
        if (max_iters < 1) throw InvalidParams("drift search: max_iters must be >= 1");
    }
};

struct SearchIterate {
    std::int64_t n = 0;   // simulation step after the iterate's time window
    SiteIndex w;          // argmax site
    double lambda = 0.0;  // window-averaged count at w
    double spread = 0.0;  // Brownian spread L (drift search only)
    bool has_spread = false;
};

struct SearchTrace {
    std::vector<SearchIterate> iterates;
    std::optional<SiteIndex> converged_site;
    std::int64_t measurements = 0;
};

/// Advance to the census step and pick uniformly among sites holding
/// between 1 and 3 particles; if none exist, advance one step at a time
/// (up to `extra_steps`) until some do. Throws NoSeedFound otherwise.
SiteIndex find_seed_site(Simulator& sim, RngStream& stream, std::int64_t census_step = 30,
                         int extra_steps = 100);

/// Algorithm: window-average the square window centered on the current
/// iterate, recenter on the argmax, stop at a fixpoint or max_iters
/// (converged_site empty in the latter case).
SearchTrace scan_search(Simulator& sim, const ScanSearchConfig& cfg, SiteIndex seed,
                        MeasurementLedger& ledger);

struct LineScanResult {
    SiteIndex w;
    double lambda = 0.0;
    std::int64_t n = 0;
    double spread = 0.0; // sqrt(h)
};

/// Initial phase of the drift search: window-average the 2r^2+1 sites of
/// the horizontal line through the seed and take the argmax.
LineScanResult line_scan_init(Simulator& sim, const DriftSearchConfig& cfg, SiteIndex seed,
                              MeasurementLedger& ledger);

/// Sensor sites for one drift-search iteration: floor(L*r)+1 independent
/// Brownian paths sampled at times k*h, each continuous point
/// w - q*k*h - L*W(k*h) snapped to the nearest lattice site. The union is
/// deduplicated and, if larger than r^2, truncated to the r^2 sites with
/// the smallest k (lexicographic tie-break).
std::vector<SiteIndex> brownian_sites(SiteIndex w, const StepKernel& kernel, double spread,
                                      int r, double h, RngStream& stream);

/// Spread schedule: shrink by c on improvement >= dead_band, widen by 1/c
/// on regression >= dead_band, hold otherwise. Branches are tested in that
/// order, so with dead_band 0 a tie shrinks.
double spread_update(double spread, double lambda, double lambda_prev, double c,
                     double dead_band);

SearchTrace drift_search(Simulator& sim, const DriftSearchConfig& cfg, SiteIndex seed,
                         MeasurementLedger& ledger, RngStream& stream);

/// Detection succeeds when the converged site is the source or one of its
/// four lattice neighbors (diagonals excluded).
bool success_check(const std::optional<SiteIndex>& converged, SiteIndex source);

/// NDJSON trace export: one {"j","n","w_i","w_j","lambda"[,"L"]} per iterate.
void write_trace_ndjson(std::ostream& os, const SearchTrace& trace);

} // namespace latseek
