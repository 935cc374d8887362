#include "latseek/oracle.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>

#include "latseek/rng.hpp"

namespace latseek {

namespace {

constexpr double kEdgeTol = 1e-12;

std::int64_t clamp64(std::int64_t v, std::int64_t lo, std::int64_t hi) {
    return std::max(lo, std::min(hi, v));
}

/// Domain margin beyond the query window such that mass absorbed at the
/// domain edge would have re-entered the window with probability << tol.
/// Per axis: a drifting axis bounds re-entry by the gambler's-ruin ratio
/// (min p / max p)^margin; a balanced axis is bounded by the diffusion
/// envelope over the horizon the drifting axis allows.
std::int64_t absorb_margin(const StepKernel& kernel, double tol, std::int64_t window_half) {
    const auto& p = kernel.probs();
    tol = std::min(std::max(tol, 1e-300), 1e-3);
    const double z = std::sqrt(2.0 * std::log(1.0 / tol)) + 2.0;
    const Vec2 q = kernel.drift();
    const Vec2 var = kernel.step_variance();
    const double qmax = std::max(std::abs(q.x), std::abs(q.y));
    const double var_drift = std::abs(q.x) >= std::abs(q.y) ? var.x : var.y;

    auto axis_margin = [&](double a, double b, double axis_var) -> double {
        const double ratio = std::min(a, b) / std::max(a, b);
        if (ratio < 0.999)
            return std::ceil(std::log(std::max(tol, 1e-300) * 1e-2) / std::log(ratio));
        // Balanced axis: horizon bounded by when the drifting axis empties
        // the window, then a z-sigma diffusion reach on this axis.
        const double w = static_cast<double>(window_half);
        const double sh = (z * std::sqrt(var_drift) +
                           std::sqrt(z * z * var_drift + 4.0 * qmax * w)) /
                          (2.0 * qmax);
        const double horizon = 2.25 * sh * sh;
        return std::ceil(z * std::sqrt(std::max(axis_var, 0.25) * horizon));
    };

    const double mx = axis_margin(p[0], p[2], var.x);
    const double my = axis_margin(p[1], p[3], var.y);
    return clamp64(static_cast<std::int64_t>(std::max(mx, my)), 8, 1024);
}

SiteIndex grid_argmax(SiteIndex origin, std::int64_t side, const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t idx = 1; idx < v.size(); ++idx)
        if (v[idx] > v[best]) best = idx; // row-major scan == lex order
    const auto di = static_cast<std::int64_t>(best) / side;
    const auto dj = static_cast<std::int64_t>(best) % side;
    return {origin.i + di, origin.j + dj};
}

} // namespace

// ---------------------------------------------------------------------------
// ExpectedField

double ExpectedField::at(SiteIndex w) const {
    const std::int64_t di = w.i - origin.i;
    const std::int64_t dj = w.j - origin.j;
    if (di < 0 || dj < 0 || di >= side || dj >= side) return 0.0;
    return values[static_cast<std::size_t>(di * side + dj)];
}

double ExpectedField::total_mass() const {
    double t = 0.0;
    for (double v : values) t += v;
    return t;
}

double ExpectedField::max_edge_value() const {
    double m = 0.0;
    for (std::int64_t di = 0; di < side; ++di) {
        for (std::int64_t dj = 0; dj < side; ++dj) {
            if (di != 0 && di != side - 1 && dj != 0 && dj != side - 1) continue;
            m = std::max(m, values[static_cast<std::size_t>(di * side + dj)]);
        }
    }
    return m;
}

SiteIndex ExpectedField::argmax() const { return grid_argmax(origin, side, values); }

std::int64_t default_dp_half_width(const StepKernel& kernel, std::int64_t n_steps) {
    const Vec2 q = kernel.drift();
    const double qmax = std::max(std::abs(q.x), std::abs(q.y));
    const double n = static_cast<double>(n_steps);
    const auto w = static_cast<std::int64_t>(std::ceil(3.0 * n * qmax) +
                                             std::ceil(6.0 * std::sqrt(n)));
    return std::max<std::int64_t>(64, w);
}

// ---------------------------------------------------------------------------
// FieldEvolver

FieldEvolver::FieldEvolver(const StepKernel& kernel, const SimParams& params,
                           std::int64_t half_width)
    : source_(params.source), injection_(params.injection_mean), half_(half_width) {
    if (half_ < 1) throw WindowTooSmall("field evolver: half_width must be >= 1");
    const auto& p = kernel.probs();
    ptilde_ = {p[2], p[3], p[0], p[1]};
    side_ = 2 * half_ + 3; // one ghost cell per side
    cur_.assign(static_cast<std::size_t>(side_ * side_), 0.0);
    nxt_.assign(static_cast<std::size_t>(side_ * side_), 0.0);
    const std::int64_t c = (half_ + 1) * side_ + (half_ + 1);
    cur_[static_cast<std::size_t>(c)] = injection_; // mu_0 = h*alpha at e
}

void FieldEvolver::advance() {
    reach_ = std::min(reach_ + 1, half_);
    const std::int64_t lo = half_ + 1 - reach_;
    const std::int64_t hi = half_ + 1 + reach_;
    const double a1 = ptilde_[0], a2 = ptilde_[1], a3 = ptilde_[2], a4 = ptilde_[3];
    const std::int64_t stride = side_;
    for (std::int64_t r = lo; r <= hi; ++r) {
        const double* in = cur_.data() + r * stride;
        double* out = nxt_.data() + r * stride;
        for (std::int64_t c = lo; c <= hi; ++c) {
            // mu(w) <- sum_l mu_prev(w + e_l) * ptilde_l
            out[c] = in[c + stride] * a1 + in[c + 1] * a2 +
                     in[c - stride] * a3 + in[c - 1] * a4;
        }
    }
    std::swap(cur_, nxt_);
    cur_[static_cast<std::size_t>((half_ + 1) * side_ + (half_ + 1))] += injection_;
    ++step_;
}

double FieldEvolver::at(SiteIndex w) const {
    const std::int64_t di = w.i - source_.i;
    const std::int64_t dj = w.j - source_.j;
    if (std::abs(di) > half_ || std::abs(dj) > half_) return 0.0;
    return cur_[static_cast<std::size_t>((di + half_ + 1) * side_ + (dj + half_ + 1))];
}

double FieldEvolver::total_mass() const {
    double t = 0.0;
    for (double v : cur_) t += v;
    return t;
}

double FieldEvolver::max_edge_value() const {
    double m = 0.0;
    for (std::int64_t k = -half_; k <= half_; ++k) {
        m = std::max(m, at({source_.i - half_, source_.j + k}));
        m = std::max(m, at({source_.i + half_, source_.j + k}));
        m = std::max(m, at({source_.i + k, source_.j - half_}));
        m = std::max(m, at({source_.i + k, source_.j + half_}));
    }
    return m;
}

SiteIndex FieldEvolver::argmax() const { return snapshot().argmax(); }

ExpectedField FieldEvolver::snapshot() const {
    ExpectedField f;
    f.origin = {source_.i - half_, source_.j - half_};
    f.side = 2 * half_ + 1;
    f.step_index = step_;
    f.values.resize(static_cast<std::size_t>(f.side * f.side));
    for (std::int64_t di = 0; di < f.side; ++di) {
        const double* row = cur_.data() + (di + 1) * side_ + 1;
        std::copy(row, row + f.side, f.values.data() + di * f.side);
    }
    return f;
}

// ---------------------------------------------------------------------------
// WalkEvolver

WalkEvolver::WalkEvolver(const StepKernel& kernel, std::int64_t domain_half)
    : p_(kernel.probs()), half_(domain_half) {
    if (half_ < 1) throw WindowTooSmall("walk evolver: domain_half must be >= 1");
    side_ = 2 * half_ + 3;
    cur_.assign(static_cast<std::size_t>(side_ * side_), 0.0);
    nxt_.assign(static_cast<std::size_t>(side_ * side_), 0.0);
    cur_[static_cast<std::size_t>((half_ + 1) * side_ + (half_ + 1))] = 1.0;
}

void WalkEvolver::advance() {
    reach_ = std::min(reach_ + 1, half_);
    const std::int64_t lo = half_ + 1 - reach_;
    const std::int64_t hi = half_ + 1 + reach_;
    const double b1 = p_[0], b2 = p_[1], b3 = p_[2], b4 = p_[3];
    const std::int64_t stride = side_;
    for (std::int64_t r = lo; r <= hi; ++r) {
        const double* in = cur_.data() + r * stride;
        double* out = nxt_.data() + r * stride;
        for (std::int64_t c = lo; c <= hi; ++c) {
            // rho(w) <- sum_l rho_prev(w - e_l) * p_l
            out[c] = in[c - stride] * b1 + in[c - 1] * b2 +
                     in[c + stride] * b3 + in[c + 1] * b4;
        }
    }
    std::swap(cur_, nxt_);
    ++step_;
}

double WalkEvolver::prob_at(std::int64_t di, std::int64_t dj) const {
    if (std::abs(di) > half_ || std::abs(dj) > half_) return 0.0;
    return cur_[static_cast<std::size_t>((di + half_ + 1) * side_ + (dj + half_ + 1))];
}

double WalkEvolver::mass_within(std::int64_t half) const {
    const std::int64_t w = std::min(half, half_);
    double t = 0.0;
    for (std::int64_t di = -w; di <= w; ++di) {
        const double* row = cur_.data() + (di + half_ + 1) * side_ + (half_ + 1);
        for (std::int64_t dj = -w; dj <= w; ++dj) t += row[dj];
    }
    return t;
}

// ---------------------------------------------------------------------------
// Field constructors

ExpectedField expected_field(const StepKernel& kernel, const SimParams& params,
                             std::int64_t n_steps, std::int64_t half_width) {
    const std::int64_t half =
        half_width > 0 ? half_width : default_dp_half_width(kernel, std::max<std::int64_t>(n_steps, 1));
    FieldEvolver ev(kernel, params, half);
    for (std::int64_t k = 0; k < n_steps; ++k) ev.advance();
    if (ev.max_edge_value() > kEdgeTol)
        throw WindowTooSmall("expected_field: mass reached the window edge");
    return ev.snapshot();
}

ExpectedField cumulative_walk_field(const StepKernel& kernel, const SimParams& params,
                                    std::int64_t n_steps, std::int64_t half_width) {
    const std::int64_t half =
        half_width > 0 ? half_width : default_dp_half_width(kernel, std::max<std::int64_t>(n_steps, 1));
    WalkEvolver ev(kernel, half);
    ExpectedField f;
    f.origin = {params.source.i - half, params.source.j - half};
    f.side = 2 * half + 1;
    f.step_index = n_steps;
    f.values.assign(static_cast<std::size_t>(f.side * f.side), 0.0);

    const double ha = params.injection_mean;
    auto accumulate = [&] {
        for (std::int64_t di = -half; di <= half; ++di)
            for (std::int64_t dj = -half; dj <= half; ++dj)
                f.values[static_cast<std::size_t>((di + half) * f.side + (dj + half))] +=
                    ha * ev.prob_at(di, dj);
    };
    accumulate(); // k = 0
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        ev.advance();
        accumulate();
    }
    if (f.max_edge_value() > kEdgeTol)
        throw WindowTooSmall("cumulative_walk_field: mass reached the window edge");
    return f;
}

// ---------------------------------------------------------------------------
// Green's function

double GreenFunction::at_offset(std::int64_t di, std::int64_t dj) const {
    if (std::abs(di) > half_width || std::abs(dj) > half_width) return 0.0;
    const std::int64_t side = 2 * half_width + 1;
    return values[static_cast<std::size_t>((di + half_width) * side + (dj + half_width))];
}

double GreenFunction::at(SiteIndex w) const {
    return at_offset(w.i - source.i, w.j - source.j);
}

SiteIndex GreenFunction::argmax() const {
    const std::int64_t side = 2 * half_width + 1;
    return grid_argmax({source.i - half_width, source.j - half_width}, side, values);
}

GreenFunction green_function(const StepKernel& kernel, SiteIndex source, double tol,
                             std::int64_t half_width) {
    if (!(tol > 0.0)) throw Error("green_function: tol must be > 0");
    if (half_width < 1) throw WindowTooSmall("green_function: half_width must be >= 1");

    const std::int64_t margin = absorb_margin(kernel, tol, half_width);
    WalkEvolver ev(kernel, half_width + margin);

    GreenFunction g;
    g.source = source;
    g.half_width = half_width;
    const std::int64_t side = 2 * half_width + 1;
    g.values.assign(static_cast<std::size_t>(side * side), 0.0);

    auto accumulate = [&] {
        for (std::int64_t di = -half_width; di <= half_width; ++di)
            for (std::int64_t dj = -half_width; dj <= half_width; ++dj)
                g.values[static_cast<std::size_t>((di + half_width) * side +
                                                  (dj + half_width))] += ev.prob_at(di, dj);
    };

    std::deque<double> recent; // window-restricted increments, newest last
    int consecutive = 0;
    constexpr std::int64_t kCap = 1000000;
    for (std::int64_t k = 0;; ++k) {
        const double inc = ev.mass_within(half_width);
        accumulate();
        recent.push_back(inc);
        if (recent.size() > 12) recent.pop_front();
        consecutive = inc < tol ? consecutive + 1 : 0;

        if (consecutive >= 10) {
            // Fit a geometric tail to the recent increments; hysteresis over
            // several steps avoids the even/odd parity oscillation of the walk.
            double s1 = 0.0, s2 = 0.0;
            const std::size_t m = recent.size();
            for (std::size_t t = 0; t < m / 2; ++t) s1 += recent[t];
            for (std::size_t t = m / 2; t < m; ++t) s2 += recent[t];
            double tail;
            if (s2 <= 0.0) {
                tail = 0.0;
            } else if (s1 <= 0.0 || s2 >= s1) {
                tail = std::numeric_limits<double>::infinity();
            } else {
                const double r = std::pow(s2 / s1, 1.0 / static_cast<double>(m - m / 2));
                tail = r < 1.0 ? inc * r / (1.0 - r) : std::numeric_limits<double>::infinity();
            }
            if (tail < tol) {
                g.truncation_horizon = k;
                g.tail_bound = tail;
                break;
            }
        }
        if (k >= kCap) throw HorizonExceeded("green_function: horizon cap reached");
        ev.advance();
    }
    return g;
}

// ---------------------------------------------------------------------------
// Decay fit

double decay_rate(const StepKernel& kernel, SiteIndex source, SiteIndex w,
                  std::int64_t n_max) {
    const std::int64_t di = w.i - source.i;
    const std::int64_t dj = w.j - source.j;
    const std::int64_t reach = std::max(std::abs(di), std::abs(dj));
    const std::int64_t half = std::max<std::int64_t>(24, reach + 8) +
                              absorb_margin(kernel, 1e-10, reach + 8);
    WalkEvolver ev(kernel, half);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::int64_t points = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        ev.advance();
        const double p = ev.prob_at(di, dj);
        if (p > 1e-14) {
            const double x = static_cast<double>(n);
            const double y = std::log(p);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++points;
        }
    }
    if (points < 8)
        throw InsufficientData("decay_rate: fewer than 8 usable probabilities");
    const double np = static_cast<double>(points);
    const double denom = np * sxx - sx * sx;
    if (denom <= 0.0) throw InsufficientData("decay_rate: degenerate fit");
    const double slope = (np * sxy - sx * sy) / denom;
    return -slope;
}

// ---------------------------------------------------------------------------
// Consistency experiment

std::vector<ConsistencyPoint> consistency_experiment(const StepKernel& kernel,
                                                     const SimParams& params, SiteIndex w,
                                                     std::span<const std::int64_t> n_list,
                                                     int runs, std::int64_t tau) {
    if (runs < 30) throw Error("consistency_experiment: needs at least 30 runs");
    if (n_list.empty()) throw Error("consistency_experiment: empty n list");

    std::vector<std::int64_t> ns(n_list.begin(), n_list.end());
    std::sort(ns.begin(), ns.end());

    const std::int64_t reach = std::max(std::abs(w.i - params.source.i),
                                        std::abs(w.j - params.source.j));
    // The oracle window scales with the observation horizon: a site the
    // estimator cannot reach within max(n_list) steps reads an exact zero.
    const std::int64_t ghalf =
        std::max<std::int64_t>(24, std::min(reach + 12, ns.back() + 8));
    const double gw = green_function(kernel, params.source, 1e-8, ghalf).at(w);
    const double ha = params.injection_mean;

    std::vector<double> err_sum(ns.size(), 0.0);
    for (int run = 0; run < runs; ++run) {
        RngStream stream(params.seed, 0x9000u + static_cast<std::uint64_t>(run));
        ParticleSimulation sim(kernel, params, stream, /*initial_injection=*/true);
        if (tau >= 0)
            while (sim.step_index() < tau) sim.advance();

        double running = 0.0;
        std::size_t next = 0;
        std::int64_t m = 0; // number of observations accumulated so far
        while (next < ns.size()) {
            if (tau < 0) {
                // lambda_n averages steps 0..n-1, including the current state
                running += sim.count(w);
            } else {
                sim.advance();
                running += sim.count(w);
            }
            ++m;
            while (next < ns.size() && m == ns[next]) {
                const double lam = running / static_cast<double>(ns[next]);
                err_sum[next] += std::abs(lam / ha - gw);
                ++next;
            }
            if (tau < 0 && next < ns.size()) sim.advance();
        }
    }

    std::vector<ConsistencyPoint> out;
    out.reserve(ns.size());
    for (std::size_t k = 0; k < ns.size(); ++k)
        out.push_back({ns[k], err_sum[k] / runs});
    return out;
}

// ---------------------------------------------------------------------------
// Stub simulation + export

MuStubSimulation::MuStubSimulation(const StepKernel& kernel, const SimParams& params,
                                   std::int64_t half_width)
    : kernel_(kernel), params_(params), evolver_(kernel, params, half_width) {}

std::vector<std::pair<SiteIndex, double>> MuStubSimulation::occupied() const {
    std::vector<std::pair<SiteIndex, double>> out;
    const std::int64_t half = evolver_.half_width();
    const SiteIndex e = evolver_.source();
    for (std::int64_t di = -half; di <= half; ++di) {
        for (std::int64_t dj = -half; dj <= half; ++dj) {
            const SiteIndex w{e.i + di, e.j + dj};
            const double v = evolver_.at(w);
            if (v > 0.0) out.push_back({w, v});
        }
    }
    return out;
}

void write_grid_ndjson(std::ostream& os, SiteIndex origin, std::int64_t side,
                       const std::vector<double>& values) {
    char buf[160];
    for (std::int64_t di = 0; di < side; ++di) {
        for (std::int64_t dj = 0; dj < side; ++dj) {
            const double v = values[static_cast<std::size_t>(di * side + dj)];
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "{\"i\":%" PRId64 ",\"j\":%" PRId64 ",\"count\":%.17g}\n",
                          origin.i + di, origin.j + dj, v);
            os << buf;
        }
    }
}

} // namespace latseek
