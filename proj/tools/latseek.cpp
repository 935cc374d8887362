// latseek command-line front end: simulate the particle system, export the
// deterministic fields, run single detection trials, and drive Monte-Carlo
// benchmark sweeps with CSV/SVG output.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latseek/bench.hpp"
#include "latseek/hydro.hpp"
#include "latseek/oracle.hpp"

using namespace latseek;

namespace {

struct Options {
    // Shared model parameters (config-file keys match the option names).
    double p1 = 0.6, p2 = 0.3, p3 = 0.025, p4 = 0.075;
    double h = 10.0 / 256.0;
    double injection_mean = 25.0;
    double box = 6.0;
    int r = 18;
    std::int64_t N0 = 10, N1 = 10;
    double c = 0.5, K = 0.0;
    std::int64_t M = 200;
    std::uint64_t seed = 1;

    StepKernel kernel() const { return make_kernel(p1, p2, p3, p4); }

    SimParams params() const {
        SimParams s;
        s.h = h;
        s.source = {0, 0};
        s.injection_mean = injection_mean;
        s.box_half_width = box;
        s.seed = seed;
        return s;
    }

    BenchConfig bench_config() const {
        BenchConfig cfg;
        cfg.params = params();
        cfg.scan.r = r;
        cfg.scan.n0 = N0;
        cfg.drift.r = r;
        cfg.drift.n0 = N0;
        cfg.drift.n1 = N1;
        cfg.drift.c = c;
        cfg.drift.dead_band = K;
        return cfg;
    }
};

const std::map<std::string, std::array<double, 4>> kPresets = {
    {"p1", {0.9, 0.05, 0.01, 0.04}},
    {"p2", {0.70, 0.25, 0.01, 0.04}},
    {"p3", {0.26, 0.26, 0.24, 0.24}},
    {"p4", {0.55, 0.35, 0.05, 0.05}},
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file: " + path);
    return os;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
    } else {
        auto os = open_out(path);
        fn(os);
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_simulate(const Options& opt, std::int64_t n, const std::string& out) {
    RngStream stream(opt.seed, 0);
    ParticleSimulation sim(opt.kernel(), opt.params(), stream);
    while (sim.step_index() < n) sim.advance();
    with_output(out, [&](std::ostream& os) { write_snapshot_ndjson(os, sim.field()); });
    return 0;
}

int cmd_field(const Options& opt, const std::string& kind, std::int64_t n, double tol,
              std::int64_t window, const std::string& out) {
    if (kind == "mu") {
        const ExpectedField f = expected_field(opt.kernel(), opt.params(), n, window);
        with_output(out, [&](std::ostream& os) {
            write_grid_ndjson(os, f.origin, f.side, f.values);
        });
        return 0;
    }
    if (kind == "green") {
        const std::int64_t half = window > 0 ? window : 20;
        const GreenFunction g = green_function(opt.kernel(), opt.params().source, tol, half);
        with_output(out, [&](std::ostream& os) {
            write_grid_ndjson(os, {g.source.i - half, g.source.j - half}, 2 * half + 1,
                              g.values);
        });
        return 0;
    }
    throw Error("field: --kind must be 'mu' or 'green'");
}

int cmd_hydro(const Options& opt, double t, int kmin, int kmax, const std::string& out) {
    if (kmin > kmax) throw Error("hydro: kmin must be <= kmax");
    std::vector<double> hs;
    for (int k = kmin; k <= kmax; ++k) hs.push_back(10.0 * std::pow(2.0, -k));
    const double rate = opt.injection_mean / opt.h;
    const Vec2 q = opt.kernel().drift();
    const TestFunction f =
        TestFunction::bump({q.x * t / 2.0, q.y * t / 2.0}, 0.45 * t * std::hypot(q.x, q.y) + 0.1);
    const ConvergenceTable table = convergence_study(opt.kernel(), f, t, hs, rate);
    with_output(out, [&](std::ostream& os) { write_convergence_csv(os, table); });
    return 0;
}

int cmd_detect(const Options& opt, int algorithm, const std::string& trace_out) {
    const StepKernel kernel = opt.kernel();
    const BenchConfig cfg = opt.bench_config();

    const std::uint64_t trial_seed = mix64(opt.seed, 0);
    RngStream sim_stream(trial_seed, 0);
    RngStream pick_stream(trial_seed, 1);
    RngStream brownian_stream(trial_seed, 2);

    ParticleSimulation sim(kernel, cfg.params, sim_stream);
    MeasurementLedger ledger(static_cast<std::int64_t>(opt.r) * opt.r);
    const SiteIndex seed_site = find_seed_site(sim, pick_stream, cfg.seed_step);

    SearchTrace trace;
    if (algorithm == 1)
        trace = scan_search(sim, cfg.scan, seed_site, ledger);
    else if (algorithm == 2)
        trace = drift_search(sim, cfg.drift, seed_site, ledger, brownian_stream);
    else
        throw Error("detect: --algorithm must be 1 or 2");

    if (!trace_out.empty())
        with_output(trace_out, [&](std::ostream& os) { write_trace_ndjson(os, trace); });

    const bool ok = success_check(trace.converged_site, cfg.params.source);
    std::printf("seed_site=(%lld,%lld) iterations=%zu measurements=%lld budget_violations=%lld\n",
                static_cast<long long>(seed_site.i), static_cast<long long>(seed_site.j),
                trace.iterates.size(), static_cast<long long>(ledger.total()),
                static_cast<long long>(ledger.budget_violations()));
    if (trace.converged_site)
        std::printf("converged=(%lld,%lld) success=%s\n",
                    static_cast<long long>(trace.converged_site->i),
                    static_cast<long long>(trace.converged_site->j), ok ? "true" : "false");
    else
        std::printf("converged=none success=false\n");
    return 0;
}

int cmd_bench(const Options& opt, const std::string& algorithms, const std::string& kernels,
              const std::string& r_list, const std::string& out_prefix) {
    std::vector<Algorithm> algs;
    for (const auto& a : split_csv(algorithms)) {
        if (a == "1")
            algs.push_back(Algorithm::Scan);
        else if (a == "2")
            algs.push_back(Algorithm::Drift);
        else
            throw Error("bench: --algorithms entries must be 1 or 2");
    }
    std::vector<std::pair<std::string, StepKernel>> ks;
    for (const auto& name : split_csv(kernels)) {
        if (name == "custom") {
            ks.push_back({"custom", opt.kernel()});
        } else {
            auto it = kPresets.find(name);
            if (it == kPresets.end()) throw Error("bench: unknown kernel preset '" + name + "'");
            const auto& p = it->second;
            ks.push_back({name, make_kernel(p[0], p[1], p[2], p[3])});
        }
    }
    std::vector<int> rs;
    for (const auto& rstr : split_csv(r_list)) rs.push_back(std::stoi(rstr));
    if (algs.empty() || ks.empty() || rs.empty())
        throw Error("bench: empty algorithm/kernel/r grid");

    const BenchConfig cfg = opt.bench_config();
    std::vector<SweepSummary> summaries;
    for (const Algorithm alg : algs) {
        for (const auto& [label, kernel] : ks) {
            for (const int r : rs) {
                const SweepResult res =
                    run_sweep(alg, kernel, label, r, opt.M, opt.seed, cfg);
                summaries.push_back(res.summary);
                std::printf("%s %s r=%d M=%lld p_err=%.4f mean_meas=%.1f (success-only %.1f) rel_eff=%.1f\n",
                            algorithm_name(alg).c_str(), label.c_str(), r,
                            static_cast<long long>(opt.M), res.summary.error_probability,
                            res.summary.mean_measurements,
                            res.summary.mean_measurements_success,
                            res.summary.relative_efficiency);
            }
        }
    }

    {
        auto os = open_out(out_prefix + ".csv");
        write_summary_csv(os, summaries);
    }
    for (const Algorithm alg : algs) {
        std::vector<SweepSummary> subset;
        for (const auto& s : summaries)
            if (s.algorithm == alg) subset.push_back(s);
        for (const std::string metric : {"p_error", "mean_measurements", "rel_efficiency"}) {
            auto os = open_out(out_prefix + "_" + algorithm_name(alg) + "_" + metric + ".svg");
            write_metric_svg(os, subset, metric);
        }
    }
    return 0;
}

int cmd_oracle(const Options& opt, const std::string& kernels, double tol,
               std::int64_t window) {
    std::vector<std::pair<std::string, StepKernel>> ks;
    if (kernels.empty()) {
        ks.push_back({"custom", opt.kernel()});
    } else {
        for (const auto& name : split_csv(kernels)) {
            auto it = kPresets.find(name);
            if (it == kPresets.end()) throw Error("oracle: unknown kernel preset '" + name + "'");
            const auto& p = it->second;
            ks.push_back({name, make_kernel(p[0], p[1], p[2], p[3])});
        }
    }
    std::printf("kernel,g_source,max_other,margin,argmax_at_source,horizon\n");
    for (const auto& [label, kernel] : ks) {
        const GreenFunction g = green_function(kernel, {0, 0}, tol, window);
        const double ge = g.at_offset(0, 0);
        double other = 0.0;
        for (std::int64_t di = -window; di <= window; ++di)
            for (std::int64_t dj = -window; dj <= window; ++dj)
                if (di != 0 || dj != 0) other = std::max(other, g.at_offset(di, dj));
        const bool at_source = g.argmax() == SiteIndex{0, 0};
        std::printf("%s,%.12g,%.12g,%.12g,%s,%lld\n", label.c_str(), ge, other, ge - other,
                    at_source ? "true" : "false",
                    static_cast<long long>(g.truncation_horizon));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice source-detection simulator and benchmark harness"};
    app.require_subcommand(1);
    // the short -h is freed up for the mesh-width option --h
    app.set_help_flag("--help", "print help and exit");
    app.set_config("--config", "", "key=value config file (flags override)");

    Options opt;
    app.add_option("--p1", opt.p1, "kernel probability, +x move");
    app.add_option("--p2", opt.p2, "kernel probability, +y move");
    app.add_option("--p3", opt.p3, "kernel probability, -x move");
    app.add_option("--p4", opt.p4, "kernel probability, -y move");
    app.add_option("--h", opt.h, "lattice/time mesh width");
    app.add_option("--injection_mean", opt.injection_mean, "mean injected per step (h*alpha)");
    app.add_option("--box", opt.box, "absorbing box half-width, physical units");
    app.add_option("--r", opt.r, "sensor window parameter (budget r^2)");
    app.add_option("--N0", opt.N0, "time window, initial phase");
    app.add_option("--N1", opt.N1, "time window, drift-search iterations");
    app.add_option("--c", opt.c, "spread multiplier in (0,1)");
    app.add_option("--K", opt.K, "spread dead band");
    app.add_option("--M", opt.M, "trials per sweep");
    app.add_option("--seed", opt.seed, "base RNG seed");

    auto* sim_cmd = app.add_subcommand("simulate", "run the particle system, dump NDJSON snapshot");
    std::int64_t sim_n = 75;
    std::string sim_out;
    sim_cmd->add_option("--n", sim_n, "steps to simulate");
    sim_cmd->add_option("--out", sim_out, "output path (default stdout)");

    auto* field_cmd = app.add_subcommand("field", "export expected field or Green's function");
    std::string field_kind = "mu", field_out;
    std::int64_t field_n = 300, field_window = 0;
    double field_tol = 1e-8;
    field_cmd->add_option("--kind", field_kind, "mu | green");
    field_cmd->add_option("--n", field_n, "field step (mu)");
    field_cmd->add_option("--tol", field_tol, "truncation tolerance (green)");
    field_cmd->add_option("--window", field_window, "window half-width (0 = auto for mu)");
    field_cmd->add_option("--out", field_out, "output path (default stdout)");

    auto* hydro_cmd = app.add_subcommand("hydro", "mesh-refinement convergence study CSV");
    double hydro_t = 1.0;
    int hydro_kmin = 4, hydro_kmax = 9;
    std::string hydro_out;
    hydro_cmd->add_option("--t", hydro_t, "pairing time");
    hydro_cmd->add_option("--kmin", hydro_kmin, "smallest k in h = 10*2^-k");
    hydro_cmd->add_option("--kmax", hydro_kmax, "largest k in h = 10*2^-k");
    hydro_cmd->add_option("--out", hydro_out, "output path (default stdout)");

    auto* detect_cmd = app.add_subcommand("detect", "run one detection trial");
    int detect_alg = 2;
    std::string detect_out;
    detect_cmd->add_option("--algorithm", detect_alg, "1 (scan) or 2 (drift)");
    detect_cmd->add_option("--out", detect_out, "trace NDJSON output path");

    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo sweep grid -> CSV + SVG");
    std::string bench_algs = "1,2", bench_kernels = "p2,p4", bench_rs = "12,18,24";
    std::string bench_prefix = "bench";
    bench_cmd->add_option("--algorithms", bench_algs, "comma list of 1,2");
    bench_cmd->add_option("--kernels", bench_kernels, "comma list of p1,p2,p3,p4,custom");
    bench_cmd->add_option("--r_list", bench_rs, "comma list of r values");
    bench_cmd->add_option("--out_prefix", bench_prefix, "output file prefix");

    auto* oracle_cmd = app.add_subcommand("oracle", "Green's-function argmax report");
    std::string oracle_kernels = "p1,p2,p3,p4";
    double oracle_tol = 1e-6;
    std::int64_t oracle_window = 20;
    oracle_cmd->add_option("--kernels", oracle_kernels, "presets to report (empty = custom)");
    oracle_cmd->add_option("--tol", oracle_tol, "truncation tolerance");
    oracle_cmd->add_option("--window", oracle_window, "window half-width");

    // model options may appear after the subcommand name
    for (CLI::App* sub : {sim_cmd, field_cmd, hydro_cmd, detect_cmd, bench_cmd, oracle_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim_cmd->parsed()) return cmd_simulate(opt, sim_n, sim_out);
        if (field_cmd->parsed())
            return cmd_field(opt, field_kind, field_n, field_tol, field_window, field_out);
        if (hydro_cmd->parsed()) return cmd_hydro(opt, hydro_t, hydro_kmin, hydro_kmax, hydro_out);
        if (detect_cmd->parsed()) return cmd_detect(opt, detect_alg, detect_out);
        if (bench_cmd->parsed())
            return cmd_bench(opt, bench_algs, bench_kernels, bench_rs, bench_prefix);
        if (oracle_cmd->parsed()) return cmd_oracle(opt, oracle_kernels, oracle_tol, oracle_window);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
