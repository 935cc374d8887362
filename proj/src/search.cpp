#include "latseek/search.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace latseek {

namespace {

std::vector<SiteIndex> square_window(SiteIndex center, std::int64_t half) {
    std::vector<SiteIndex> sites;
    sites.reserve(static_cast<std::size_t>((2 * half + 1) * (2 * half + 1)));
    for (std::int64_t di = -half; di <= half; ++di)
        for (std::int64_t dj = -half; dj <= half; ++dj)
            sites.push_back({center.i + di, center.j + dj});
    return sites;
}

} // namespace

SiteIndex find_seed_site(Simulator& sim, RngStream& stream, std::int64_t census_step,
                         int extra_steps) {
    while (sim.step_index() < census_step) sim.advance();

    auto census = [&sim] {
        std::vector<SiteIndex> hits;
        for (const auto& [w, c] : sim.occupied())
            if (c >= 1.0 && c <= 3.0) hits.push_back(w);
        return hits;
    };

    std::vector<SiteIndex> hits = census();
    for (int attempt = 0; hits.empty() && attempt < extra_steps; ++attempt) {
        sim.advance();
        hits = census();
    }
    if (hits.empty())
        throw NoSeedFound("find_seed_site: no site with 1..3 particles within the step budget");
    return hits[stream.uniform_index(hits.size())];
}

SearchTrace scan_search(Simulator& sim, const ScanSearchConfig& cfg, SiteIndex seed,
                        MeasurementLedger& ledger) {
    cfg.validate();
    SearchTrace trace;
    const std::int64_t half = cfg.r / 2; // |w_k - center_k| <= r*h/2 in physical units
    SiteIndex center = seed;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const auto averages = window_average(sim, square_window(center, half), cfg.n0, ledger);
        const auto [best, lambda] = argmax_site(averages);
        trace.iterates.push_back({sim.step_index(), best, lambda, 0.0, false});
        if (best == center) {
            trace.converged_site = best;
            break;
        }
        center = best;
    }
    trace.measurements = ledger.total();
    return trace;
}

LineScanResult line_scan_init(Simulator& sim, const DriftSearchConfig& cfg, SiteIndex seed,
                              MeasurementLedger& ledger) {
    const std::int64_t reach = static_cast<std::int64_t>(cfg.r) * cfg.r;
    std::vector<SiteIndex> line;
    line.reserve(static_cast<std::size_t>(2 * reach + 1));
    for (std::int64_t d = -reach; d <= reach; ++d)
        line.push_back({seed.i + d, seed.j});

    const auto averages = window_average(sim, std::move(line), cfg.n0, ledger);
    const auto [best, lambda] = argmax_site(averages);
    return {best, lambda, sim.step_index(), std::sqrt(sim.params().h)};
}

std::vector<SiteIndex> brownian_sites(SiteIndex w, const StepKernel& kernel, double spread,
                                      int r, double h, RngStream& stream) {
    if (!(spread > 0.0)) throw Error("brownian_sites: spread must be > 0");
    const double rd = static_cast<double>(r);
    const std::int64_t budget = static_cast<std::int64_t>(r) * r;

    // floor(L*r)+1 paths of floor(r/L) points each; both degenerate safely.
    const double paths_d = std::floor(spread * rd) + 1.0;
    const auto n_paths = static_cast<std::int64_t>(
        std::min(paths_d, static_cast<double>(budget)));
    double len_d = std::floor(rd / spread);
    if (len_d < 1.0) len_d = 1.0; // k = 0 (the current site) always present
    const double len_cap = 9.0e15;
    const auto n_points = static_cast<std::int64_t>(std::min(len_d, len_cap));

    const Vec2 q = kernel.drift();
    const Vec2 base = site_position(w, h);
    const double inc_sd = std::sqrt(h);

    // Generate k-levels across all paths in ascending k so generation can
    // stop as soon as the budget's smallest-k prefix is complete.
    std::map<SiteIndex, std::int64_t> first_k;
    std::vector<Vec2> bm(static_cast<std::size_t>(n_paths), Vec2{0.0, 0.0});
    for (std::int64_t k = 0; k < n_points; ++k) {
        for (std::int64_t l = 0; l < n_paths; ++l) {
            auto& wpt = bm[static_cast<std::size_t>(l)];
            if (k > 0) {
                const auto [gx, gy] = stream.gauss2();
                wpt.x += inc_sd * gx;
                wpt.y += inc_sd * gy;
            }
            const double kh = static_cast<double>(k) * h;
            const Vec2 pos{base.x - q.x * kh - spread * wpt.x,
                           base.y - q.y * kh - spread * wpt.y};
            first_k.emplace(nearest_site(pos, h), k);
        }
        // Later levels only produce larger k values, which the smallest-k
        // trim below would discard anyway.
        if (static_cast<std::int64_t>(first_k.size()) >= budget) break;
    }

    std::vector<SiteIndex> sites;
    if (static_cast<std::int64_t>(first_k.size()) > budget) {
        // Keep the budget's worth of earliest sites: order by (k, site).
        std::vector<std::pair<std::int64_t, SiteIndex>> order;
        order.reserve(first_k.size());
        for (const auto& [site, k] : first_k) order.push_back({k, site});
        std::sort(order.begin(), order.end());
        order.resize(static_cast<std::size_t>(budget));
        sites.reserve(order.size());
        for (const auto& [k, site] : order) sites.push_back(site);
        std::sort(sites.begin(), sites.end());
    } else {
        sites.reserve(first_k.size());
        for (const auto& [site, k] : first_k) sites.push_back(site);
    }
    return sites;
}

double spread_update(double spread, double lambda, double lambda_prev, double c,
                     double dead_band) {
    if (!(spread > 0.0)) throw Error("spread_update: spread must be > 0");
    if (lambda >= lambda_prev + dead_band) return c * spread;
    if (lambda <= lambda_prev - dead_band) return spread / c;
    return spread;
}

SearchTrace drift_search(Simulator& sim, const DriftSearchConfig& cfg, SiteIndex seed,
                         MeasurementLedger& ledger, RngStream& stream) {
    cfg.validate();
    SearchTrace trace;

    const LineScanResult init = line_scan_init(sim, cfg, seed, ledger);
    trace.iterates.push_back({init.n, init.w, init.lambda, init.spread, true});

    SiteIndex w = init.w;
    double lambda = init.lambda;
    double spread = init.spread;
    const double h = sim.params().h;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const auto sites = brownian_sites(w, sim.kernel(), spread, cfg.r, h, stream);
        const auto averages = window_average(sim, sites, cfg.n1, ledger);
        const auto [best, best_lambda] = argmax_site(averages);
        const double next_spread = spread_update(spread, best_lambda, lambda, cfg.c, cfg.dead_band);
        trace.iterates.push_back({sim.step_index(), best, best_lambda, next_spread, true});
        if (best == w) {
            trace.converged_site = best;
            break;
        }
        w = best;
        lambda = best_lambda;
        spread = next_spread;
    }
    trace.measurements = ledger.total();
    return trace;
}

bool success_check(const std::optional<SiteIndex>& converged, SiteIndex source) {
    if (!converged) return false;
    if (*converged == source) return true;
    const auto nb = neighbors(source);
    return std::find(nb.begin(), nb.end(), *converged) != nb.end();
}

void write_trace_ndjson(std::ostream& os, const SearchTrace& trace) {
    char buf[224];
    std::size_t j = 0;
    for (const auto& it : trace.iterates) {
        if (it.has_spread) {
            std::snprintf(buf, sizeof buf,
                          "{\"j\":%zu,\"n\":%" PRId64 ",\"w_i\":%" PRId64 ",\"w_j\":%" PRId64
                          ",\"lambda\":%.17g,\"L\":%.17g}\n",
                          j, it.n, it.w.i, it.w.j, it.lambda, it.spread);
        } else {
            std::snprintf(buf, sizeof buf,
                          "{\"j\":%zu,\"n\":%" PRId64 ",\"w_i\":%" PRId64 ",\"w_j\":%" PRId64
                          ",\"lambda\":%.17g}\n",
                          j, it.n, it.w.i, it.w.j, it.lambda);
        }
        os << buf;
        ++j;
    }
}

} // namespace latseek
