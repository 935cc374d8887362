#include "latseek/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

namespace latseek {

std::string algorithm_name(Algorithm a) {
    return a == Algorithm::Scan ? "alg1" : "alg2";
}

unsigned worker_count() {
    if (const char* env = std::getenv("LATSEEK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

TrialMetrics run_trial(Algorithm algorithm, const StepKernel& kernel, int r,
                       std::uint64_t base_seed, const BenchConfig& cfg,
                       std::int64_t trial_id) {
    TrialMetrics m;
    m.trial_id = trial_id;
    m.seed = mix64(base_seed, static_cast<std::uint64_t>(trial_id));

    RngStream sim_stream(m.seed, 0);
    RngStream pick_stream(m.seed, 1);
    RngStream brownian_stream(m.seed, 2);

    SimParams params = cfg.params;
    params.seed = m.seed;
    ParticleSimulation sim(kernel, params, sim_stream);
    MeasurementLedger ledger(static_cast<std::int64_t>(r) * r);

    try {
        const SiteIndex seed_site = find_seed_site(sim, pick_stream, cfg.seed_step);
        SearchTrace trace;
        if (algorithm == Algorithm::Scan) {
            ScanSearchConfig sc = cfg.scan;
            sc.r = r;
            trace = scan_search(sim, sc, seed_site, ledger);
        } else {
            DriftSearchConfig dc = cfg.drift;
            dc.r = r;
            trace = drift_search(sim, dc, seed_site, ledger, brownian_stream);
        }
        m.converged = trace.converged_site.has_value();
        m.success = success_check(trace.converged_site, params.source);
        m.iterations = static_cast<std::int64_t>(trace.iterates.size());
    } catch (const std::exception&) {
        // A failed trial is an unsuccessful trial, not a failed sweep.
        m.converged = false;
        m.success = false;
    }
    m.measurements = ledger.total();
    m.elapsed_steps = sim.step_index();
    return m;
}

SweepResult run_sweep(Algorithm algorithm, const StepKernel& kernel,
                      const std::string& kernel_label, int r, std::int64_t trials,
                      std::uint64_t base_seed, const BenchConfig& cfg,
                      std::int64_t trial_offset) {
    if (trials < 1) throw Error("run_sweep: trials must be >= 1");

    SweepResult result;
    result.trials.resize(static_cast<std::size_t>(trials));

    const unsigned workers = std::min<unsigned>(
        worker_count(), static_cast<unsigned>(std::max<std::int64_t>(trials, 1)));
    std::atomic<std::int64_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::int64_t t = next.fetch_add(1);
            if (t >= trials) break;
            result.trials[static_cast<std::size_t>(t)] =
                run_trial(algorithm, kernel, r, base_seed, cfg, trial_offset + t);
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned wkr = 0; wkr < workers; ++wkr) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }

    // Deterministic fold in trial order.
    std::int64_t successes = 0;
    double meas_sum = 0.0, meas_success_sum = 0.0;
    for (const auto& t : result.trials) {
        if (t.success) {
            ++successes;
            meas_success_sum += static_cast<double>(t.measurements);
        }
        meas_sum += static_cast<double>(t.measurements);
    }

    SweepSummary& s = result.summary;
    s.kernel = kernel_label;
    s.algorithm = algorithm;
    s.r = r;
    s.trials = trials;
    s.detection_probability = static_cast<double>(successes) / static_cast<double>(trials);
    s.error_probability = 1.0 - s.detection_probability;
    s.mean_measurements = meas_sum / static_cast<double>(trials);
    s.mean_measurements_success =
        successes > 0 ? meas_success_sum / static_cast<double>(successes)
                      : std::numeric_limits<double>::quiet_NaN();
    s.relative_efficiency = s.detection_probability > 0.0
                                ? s.mean_measurements / s.detection_probability
                                : std::numeric_limits<double>::infinity();
    return result;
}

void write_summary_csv(std::ostream& os, std::span<const SweepSummary> summaries) {
    char buf[512];
    os << "algorithm,kernel,r,M,p_detect,p_error,mean_measurements,rel_efficiency\n";
    for (const auto& s : summaries) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%" PRId64 ",%.17g,%.17g,%.17g,%.17g\n",
                      algorithm_name(s.algorithm).c_str(), s.kernel.c_str(), s.r, s.trials,
                      s.detection_probability, s.error_probability, s.mean_measurements,
                      s.relative_efficiency);
        os << buf;
    }
}

void write_trials_ndjson(std::ostream& os, std::span<const TrialMetrics> trials) {
    char buf[320];
    for (const auto& t : trials) {
        std::snprintf(buf, sizeof buf,
                      "{\"trial_id\":%" PRId64 ",\"success\":%s,\"measurements\":%" PRId64
                      ",\"iterations\":%" PRId64 ",\"converged\":%s,\"elapsed_steps\":%" PRId64
                      ",\"seed\":%" PRIu64 "}\n",
                      t.trial_id, t.success ? "true" : "false", t.measurements, t.iterations,
                      t.converged ? "true" : "false", t.elapsed_steps, t.seed);
        os << buf;
    }
}

namespace {

double metric_value(const SweepSummary& s, const std::string& metric) {
    if (metric == "p_error") return s.error_probability;
    if (metric == "mean_measurements") return s.mean_measurements;
    if (metric == "rel_efficiency") return s.relative_efficiency;
    throw Error("write_metric_svg: unknown metric '" + metric + "'");
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

void write_metric_svg(std::ostream& os, std::span<const SweepSummary> summaries,
                      const std::string& metric) {
    if (summaries.empty()) throw EmptyInput("write_metric_svg: no summaries");

    bool mixed_algorithms = false;
    for (const auto& s : summaries)
        if (s.algorithm != summaries.front().algorithm) mixed_algorithms = true;

    // Curve key -> sorted (r, value) points.
    std::map<std::string, std::map<int, double>> curves;
    double xmin = 1e300, xmax = -1e300, ymax = 0.0;
    for (const auto& s : summaries) {
        std::string key = s.kernel;
        if (mixed_algorithms) key += "/" + algorithm_name(s.algorithm);
        const double v = metric_value(s, metric);
        if (!std::isfinite(v)) continue;
        curves[key][s.r] = v;
        xmin = std::min(xmin, static_cast<double>(s.r));
        xmax = std::max(xmax, static_cast<double>(s.r));
        ymax = std::max(ymax, v);
    }
    if (curves.empty()) throw EmptyInput("write_metric_svg: no finite metric values");
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.05;

    const double width = 720, height = 540;
    const double ml = 80, mr = 24, mt = 24, mb = 56;
    auto sx = [&](double r) { return ml + (r - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto sy = [&](double v) { return height - mb - v / ymax * (height - mt - mb); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"14\">r</text>\n";
    os << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
       << (mt + height - mb) / 2 << ")\">" << metric << "</text>\n";

    // Ticks: x at each distinct r, y at 5 even divisions.
    std::map<int, bool> rticks;
    for (const auto& s : summaries) rticks[s.r] = true;
    for (const auto& [r, unused] : rticks) {
        const double x = sx(r);
        os << "<line x1=\"" << x << "\" y1=\"" << height - mb << "\" x2=\"" << x << "\" y2=\""
           << height - mb + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << height - mb + 20
           << "\" text-anchor=\"middle\" font-size=\"12\">" << r << "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
        const double v = ymax * k / 5.0;
        const double y = sy(v);
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << fmt_num(v) << "</text>\n";
    }

    // Curves + legend (map iteration is sorted by key, deterministic).
    int color = 0;
    double legend_y = mt + 14;
    for (const auto& [key, pts] : curves) {
        const char* stroke = kPalette[color % 8];
        os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& [r, v] : pts) {
            if (!first) os << " ";
            os << fmt_num(sx(r)) << "," << fmt_num(sy(v));
            first = false;
        }
        os << "\"/>\n";
        for (const auto& [r, v] : pts)
            os << "<circle cx=\"" << fmt_num(sx(r)) << "\" cy=\"" << fmt_num(sy(v))
               << "\" r=\"3\" fill=\"" << stroke << "\"/>\n";
        os << "<rect x=\"" << width - mr - 170 << "\" y=\"" << legend_y - 9
           << "\" width=\"12\" height=\"12\" fill=\"" << stroke << "\"/>\n";
        os << "<text x=\"" << width - mr - 152 << "\" y=\"" << legend_y + 2
           << "\" font-size=\"12\">" << key << "</text>\n";
        legend_y += 18;
        ++color;
    }
    os << "</svg>\n";
}

} // namespace latseek
