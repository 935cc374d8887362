#include <doctest.h>

#include <cmath>
#include <vector>

#include "latseek/oracle.hpp"
#include "latseek/sensor.hpp"

using namespace latseek;

namespace {

const StepKernel kP4 = make_kernel(0.55, 0.35, 0.05, 0.05);

} // namespace

// Distributional equivalence of the count-based multinomial stepping with
// independent per-particle moves: inject a fixed cohort once, step it on a
// tight absorbing box, and compare terminal cell frequencies (including the
// absorbed cell) against the absorbing walk DP. Under independent moves the
// aggregated cell counts are exactly multinomial, so Pearson's statistic
// applies cleanly.
TEST_CASE("multinomial stepping matches the absorbing walk DP (chi-square)") {
    SimParams p;
    p.h = 1.0;
    p.box_half_width = 3.0; // live sites: 5x5, |i|,|j| <= 2
    p.injection_mean = 25.0;

    const StepKernel k = make_kernel(0.35, 0.3, 0.15, 0.2);
    const int steps = 10;
    const std::int64_t cohort = 5;
    const int runs = 10000;

    // Oracle: absorbing-domain DP for one particle (domain edge == box edge).
    WalkEvolver dp(k, 2);
    for (int n = 0; n < steps; ++n) dp.advance();
    std::vector<double> probs;
    double live_mass = 0.0;
    for (std::int64_t di = -2; di <= 2; ++di)
        for (std::int64_t dj = -2; dj <= 2; ++dj) {
            probs.push_back(dp.prob_at(di, dj));
            live_mass += probs.back();
        }
    probs.push_back(1.0 - live_mass); // absorbed cell
    REQUIRE(probs.back() > 0.01);

    std::vector<double> observed(probs.size(), 0.0);
    const InjectionLaw once = [cohort](std::int64_t step, RngStream&) {
        return step == 0 ? cohort : 0;
    };
    for (int run = 0; run < runs; ++run) {
        RngStream stream(1234, static_cast<std::uint64_t>(run));
        ParticleSimulation sim(k, p, stream, once);
        for (int n = 0; n < steps; ++n) sim.advance();
        std::size_t cell = 0;
        for (std::int64_t di = -2; di <= 2; ++di)
            for (std::int64_t dj = -2; dj <= 2; ++dj)
                observed[cell++] += sim.count({di, dj});
        observed.back() += static_cast<double>(sim.field().absorbed_total);
    }

    // Lattice parity empties half the cells after an even step count and the
    // corners carry little mass: lump all low-expectation cells together so
    // Pearson's approximation is sound.
    const double total = static_cast<double>(cohort) * runs;
    double stat = 0.0, lump_obs = 0.0, lump_exp = 0.0;
    int kept = 0;
    for (std::size_t cell = 0; cell < probs.size(); ++cell) {
        const double expect = probs[cell] * total;
        if (expect < 10.0) {
            lump_obs += observed[cell];
            lump_exp += expect;
            continue;
        }
        stat += (observed[cell] - expect) * (observed[cell] - expect) / expect;
        ++kept;
    }
    REQUIRE(kept >= 10);
    int cells = kept;
    if (lump_exp >= 10.0) {
        stat += (lump_obs - lump_exp) * (lump_obs - lump_exp) / lump_exp;
        ++cells;
    }
    const int dof = cells - 1;
    // chi-square 0.999 quantile via Wilson-Hilferty; p > 0.001 keeps the null.
    const double z = 3.0902;
    const double wh = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
    const double critical = dof * wh * wh * wh;
    CHECK(stat < critical);
}

// Mean-field match: empirical mean of N_n(w) against the expected-field
// recursion, within 3 standard errors wherever the field is non-negligible.
TEST_CASE("empirical occupation means match the expected field at n = 10") {
    SimParams p; // benchmark-scale box: absorption is impossible in 10 steps
    p.seed = 20250810;
    const int n = 10;
    const int runs = 10000;

    const ExpectedField mu = expected_field(kP4, p, n, 32);

    std::vector<SiteIndex> sites;
    for (std::int64_t di = -n; di <= n; ++di)
        for (std::int64_t dj = -n; dj <= n; ++dj)
            if (mu.at({di, dj}) >= 0.1) sites.push_back({di, dj});
    REQUIRE(sites.size() > 10);

    std::vector<double> sum(sites.size(), 0.0), sum2(sites.size(), 0.0);
    for (int run = 0; run < runs; ++run) {
        RngStream stream(p.seed, static_cast<std::uint64_t>(run));
        ParticleSimulation sim(kP4, p, stream);
        for (int m = 0; m < n; ++m) sim.advance();
        for (std::size_t s = 0; s < sites.size(); ++s) {
            const double c = sim.count(sites[s]);
            sum[s] += c;
            sum2[s] += c * c;
        }
    }

    for (std::size_t s = 0; s < sites.size(); ++s) {
        const double mean = sum[s] / runs;
        const double var = sum2[s] / runs - mean * mean;
        const double se = std::sqrt(std::max(var, 1e-12) / runs);
        CHECK(std::abs(mean - mu.at(sites[s])) < 3.0 * se);
    }
}

// Boundary negligibility at benchmark scale: essentially no absorption by
// step 75 in the [-6,6]^2 box.
TEST_CASE("absorption at the box boundary is negligible over 75 steps") {
    const StepKernel k = make_kernel(0.6, 0.3, 0.025, 0.075);
    const SimParams p;
    int clean = 0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
        RngStream stream(33, static_cast<std::uint64_t>(run));
        ParticleSimulation sim(k, p, stream);
        for (int n = 0; n < 75; ++n) sim.advance();
        if (sim.field().absorbed_total == 0) ++clean;
    }
    CHECK(clean >= 99);
}
