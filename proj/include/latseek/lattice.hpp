#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

#include "latseek/errors.hpp"

namespace latseek {

/// Integer coordinate on the square lattice. The physical position of a
/// site is (h*i, h*j) for the mesh width h of the active SimParams.
/// Ordering is lexicographic by (i, j); this is the tie-break order used
/// by every argmax in the search code.
struct SiteIndex {
    std::int64_t i = 0;
    std::int64_t j = 0;

    auto operator<=>(const SiteIndex&) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Nearest-neighbor move offsets, ordered +x, +y, -x, -y. The same order
/// is used for kernel probabilities everywhere.
inline constexpr std::array<SiteIndex, 4> kMoveOffsets{
    SiteIndex{1, 0}, SiteIndex{0, 1}, SiteIndex{-1, 0}, SiteIndex{0, -1}};

inline SiteIndex offset(SiteIndex w, SiteIndex d) { return {w.i + d.i, w.j + d.j}; }

inline std::array<SiteIndex, 4> neighbors(SiteIndex w) {
    return {offset(w, kMoveOffsets[0]), offset(w, kMoveOffsets[1]),
            offset(w, kMoveOffsets[2]), offset(w, kMoveOffsets[3])};
}

inline Vec2 site_position(SiteIndex w, double h) {
    return {h * static_cast<double>(w.i), h * static_cast<double>(w.j)};
}

/// Snap a physical coordinate to the nearest lattice index. Half-integer
/// ties resolve toward -infinity so snapping stays deterministic.
inline std::int64_t nearest_index(double x, double h) {
    return static_cast<std::int64_t>(std::ceil(x / h - 0.5));
}

inline SiteIndex nearest_site(Vec2 p, double h) {
    return {nearest_index(p.x, h), nearest_index(p.y, h)};
}

/// Transition kernel of the nearest-neighbor walk: four move probabilities
/// (+x, +y, -x, -y) and the derived per-step drift q = (p1-p3, p2-p4).
/// Construction validates positivity, normalization to 1e-12 (inputs are
/// never silently re-normalized) and the transience condition
/// |p1-p3| + |p2-p4| != 0.
class StepKernel {
public:
    static StepKernel make(double p1, double p2, double p3, double p4) {
        const std::array<double, 4> p{p1, p2, p3, p4};
        for (double v : p) {
            if (!(v > 0.0))
                throw NonPositiveProbability("step kernel: probabilities must be > 0");
        }
        const double sum = p1 + p2 + p3 + p4;
        if (std::abs(sum - 1.0) > 1e-12)
            throw NotNormalized("step kernel: probabilities sum to " + std::to_string(sum));
        const Vec2 q{p1 - p3, p2 - p4};
        if (std::abs(q.x) + std::abs(q.y) == 0.0)
            throw DegenerateKernel("step kernel: zero drift violates the transience condition");
        return StepKernel(p, q);
    }

    const std::array<double, 4>& probs() const { return p_; }
    double p(int l) const { return p_[static_cast<std::size_t>(l)]; }
    Vec2 drift() const { return q_; }

    /// Per-coordinate variance of a single step.
    Vec2 step_variance() const {
        return {p_[0] + p_[2] - q_.x * q_.x, p_[1] + p_[3] - q_.y * q_.y};
    }

private:
    StepKernel(std::array<double, 4> p, Vec2 q) : p_(p), q_(q) {}

    std::array<double, 4> p_;
    Vec2 q_;
};

inline StepKernel make_kernel(double p1, double p2, double p3, double p4) {
    return StepKernel::make(p1, p2, p3, p4);
}

/// Simulation parameters shared by the particle system and the oracles.
///   h               lattice/time mesh width
///   source          injection site e (lattice index units)
///   injection_mean  mean of the geometric injection law (the product h*alpha);
///                   the hydrodynamic rate alpha is injection_mean / h
///   box_half_width  absorbing boundary extent, physical units
struct SimParams {
    double h = 10.0 / 256.0;
    SiteIndex source{0, 0};
    double injection_mean = 25.0;
    double box_half_width = 6.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(h > 0.0)) throw InvalidParams("sim params: h must be > 0");
        // Geometric law on {1,2,...} needs mean >= 1; mean == 1 degenerates
        // to the constant 1.
        if (!(injection_mean >= 1.0))
            throw InvalidMean("sim params: injection_mean must be >= 1");
        if (!(box_half_width > 0.0))
            throw InvalidParams("sim params: box_half_width must be > 0");
        if (!inside_box(source))
            throw InvalidParams("sim params: source must lie strictly inside the box");
    }

    /// True iff the site is strictly inside the open absorbing box.
    bool inside_box(SiteIndex w) const {
        const double ax = std::abs(static_cast<double>(w.i)) * h;
        const double ay = std::abs(static_cast<double>(w.j)) * h;
        return ax < box_half_width && ay < box_half_width;
    }

    double alpha() const { return injection_mean / h; }
};

} // namespace latseek
