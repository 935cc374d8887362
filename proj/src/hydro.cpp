#include "latseek/hydro.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "latseek/oracle.hpp"

namespace latseek {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kPi = 3.14159265358979323846;

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double eps,
                        int depth) {
    if (depth > 60) throw QuadratureFailure("limit_pairing: adaptive Simpson depth exceeded");
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, eps * 0.5, depth + 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, eps * 0.5, depth + 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 0);
}

} // namespace

TestFunction TestFunction::bump(Vec2 center, double radius, double amp) {
    TestFunction f;
    f.center = center;
    f.support_radius = radius;
    f.eval = [center, radius, amp](double x, double y) {
        const double dx = (x - center.x) / radius;
        const double dy = (y - center.y) / radius;
        const double s2 = dx * dx + dy * dy;
        if (s2 >= 1.0) return 0.0;
        return amp * std::exp(1.0 - 1.0 / (1.0 - s2));
    };
    return f;
}

TestFunction TestFunction::ball(Vec2 center, double radius, double value) {
    TestFunction f;
    f.center = center;
    f.support_radius = radius;
    f.eval = [center, radius, value](double x, double y) {
        const double dx = x - center.x;
        const double dy = y - center.y;
        return dx * dx + dy * dy < radius * radius ? value : 0.0;
    };
    return f;
}

void TestFunction::check_support(int samples) const {
    for (int k = 0; k < samples; ++k) {
        const double ang = 2.0 * kPi * static_cast<double>(k) / samples;
        const double x = center.x + support_radius * std::cos(ang);
        const double y = center.y + support_radius * std::sin(ang);
        if (eval(x, y) != 0.0)
            throw Error("test function does not vanish on its support boundary");
    }
}

double limit_pairing(const LineMeasure& m, const TestFunction& f) {
    if (m.t < 0.0) throw Error("limit_pairing: t must be >= 0");
    if (m.t == 0.0) return 0.0;
    auto along = [&](double s) {
        return f(m.source.x + m.drift.x * s, m.source.y + m.drift.y * s);
    };
    return m.rate * integrate(along, 0.0, m.t, kQuadTol);
}

double discrete_pairing(const StepKernel& kernel, const SimParams& params,
                        const TestFunction& f, double t) {
    const auto n = static_cast<std::int64_t>(std::floor(t / params.h));
    const ExpectedField mu = expected_field(kernel, params, n);
    double sum = 0.0;
    for (std::int64_t di = 0; di < mu.side; ++di) {
        for (std::int64_t dj = 0; dj < mu.side; ++dj) {
            const double v = mu.values[static_cast<std::size_t>(di * mu.side + dj)];
            if (v == 0.0) continue;
            const Vec2 pos = site_position({mu.origin.i + di, mu.origin.j + dj}, params.h);
            sum += v * f(pos.x, pos.y);
        }
    }
    return sum;
}

ConvergenceTable convergence_study(const StepKernel& kernel, const TestFunction& f,
                                   double t, std::span<const double> h_list, double rate) {
    ConvergenceTable table;
    // The source sits at lattice index (0,0) so its physical position is the
    // origin at every mesh width; the limit measure is then h-independent.
    const double exact = limit_pairing({{0.0, 0.0}, kernel.drift(), rate, t}, f);

    for (const double h : h_list) {
        SimParams p;
        p.h = h;
        p.source = {0, 0};
        p.injection_mean = rate * h;
        p.box_half_width = 1e12; // box is irrelevant to the deterministic field
        const double disc = discrete_pairing(kernel, p, f, t);
        table.rows.push_back({h, std::abs(disc - exact)});
    }

    // Log-log slope over rows with positive error.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (const auto& r : table.rows) {
        if (r.pairing_error <= 0.0) continue;
        const double x = std::log(r.h);
        const double y = std::log(r.pairing_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts >= 2) {
        const double denom = pts * sxx - sx * sx;
        if (denom != 0.0) table.fitted_slope = (pts * sxy - sx * sy) / denom;
    }
    return table;
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
    char buf[96];
    os << "h,error\n";
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.h, r.pairing_error);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "slope,%.17g\n", table.fitted_slope);
    os << buf;
}

} // namespace latseek
