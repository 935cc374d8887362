#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "latseek/lattice.hpp"

namespace latseek {

/// The transport-limit measure: rate alpha spread uniformly in time along
/// the segment {source + drift*s : 0 <= s <= t}. Total mass is alpha*t.
struct LineMeasure {
    Vec2 source;
    Vec2 drift;
    double rate = 0.0;
    double t = 0.0;

    double total_mass() const { return rate * t; }
};

/// Compactly supported test function: evaluator plus a declared support
/// ball. check_support() spot-checks the vanishing claim on boundary points.
struct TestFunction {
    std::function<double(double, double)> eval;
    Vec2 center;
    double support_radius = 0.0;

    double operator()(double x, double y) const { return eval(x, y); }

    /// Smooth compactly-supported bump, amplitude `amp` at the center,
    /// identically zero outside the support ball.
    static TestFunction bump(Vec2 center, double radius, double amp = 1.0);

    /// Indicator of the open support ball times `value` (discontinuous at
    /// the boundary; handy for mass checks).
    static TestFunction ball(Vec2 center, double radius, double value = 1.0);

    /// Verifies the function vanishes at `samples` points on the support
    /// boundary; throws Error otherwise.
    void check_support(int samples = 100) const;
};

/// alpha * integral_0^t f(source + drift*s) ds by adaptive Simpson
/// quadrature, absolute tolerance 1e-10.
double limit_pairing(const LineMeasure& m, const TestFunction& f);

/// sum_w mu_{floor(t/h)}(w) f(h*w) over the expected-field window.
double discrete_pairing(const StepKernel& kernel, const SimParams& params,
                        const TestFunction& f, double t);

struct ConvergenceRow {
    double h = 0.0;
    double pairing_error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double fitted_slope = 0.0; // log-log slope of error vs h
};

/// |discrete - limit| pairing error for each mesh width, holding the
/// physical rate alpha fixed (per-step injection mass is rate*h). The
/// source sits at the physical origin at every mesh width.
ConvergenceTable convergence_study(const StepKernel& kernel, const TestFunction& f,
                                   double t, std::span<const double> h_list, double rate);

/// CSV rows "h,error" with a final "slope,<value>" footer row.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

} // namespace latseek
