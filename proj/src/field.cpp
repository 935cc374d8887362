#include "latseek/field.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <ostream>

namespace latseek {

namespace {

void sort_and_merge(std::vector<std::pair<SiteIndex, std::int64_t>>& v) {
    std::sort(v.begin(), v.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t in = 0; in < v.size();) {
        SiteIndex key = v[in].first;
        std::int64_t sum = 0;
        while (in < v.size() && v[in].first == key) {
            sum += v[in].second;
            ++in;
        }
        if (sum != 0) v[out++] = {key, sum};
    }
    v.resize(out);
}

} // namespace

OccupancyField OccupancyField::initial(const SimParams& params, RngStream& stream) {
    params.validate();
    OccupancyField f;
    const std::int64_t n = stream.geometric(params.injection_mean);
    f.counts.push_back({params.source, n});
    f.injected_total = n;
    return f;
}

std::int64_t OccupancyField::live_total() const {
    std::int64_t t = 0;
    for (const auto& [w, c] : counts) t += c;
    return t;
}

InjectionLaw geometric_injection(double mean) {
    return [mean](std::int64_t, RngStream& s) { return s.geometric(mean); };
}

OccupancyField step(const OccupancyField& field, const StepKernel& kernel,
                    const SimParams& params, RngStream& stream, const InjectionLaw& law) {
    OccupancyField next;
    next.step_index = field.step_index + 1;
    next.absorbed_total = field.absorbed_total;
    next.counts.reserve(field.counts.size() * 4 + 1);

    const auto& p = kernel.probs();
    for (const auto& [site, c] : field.counts) {
        const auto split = stream.multinomial4(c, p);
        for (std::size_t l = 0; l < 4; ++l) {
            if (split[l] == 0) continue;
            const SiteIndex dest = offset(site, kMoveOffsets[l]);
            if (params.inside_box(dest))
                next.counts.push_back({dest, split[l]});
            else
                next.absorbed_total += split[l];
        }
    }

    const std::int64_t inj = law(next.step_index, stream);
    if (inj < 0) throw Error("injection law returned a negative count");
    if (inj > 0) next.counts.push_back({params.source, inj});
    next.injected_total = field.injected_total + inj;
    if (next.injected_total < field.injected_total)
        throw Error("occupancy field: injected total overflow");

    sort_and_merge(next.counts);
    return next;
}

OccupancyField step(const OccupancyField& field, const StepKernel& kernel,
                    const SimParams& params, RngStream& stream) {
    return step(field, kernel, params, stream, geometric_injection(params.injection_mean));
}

std::int64_t count_at(const OccupancyField& field, SiteIndex w) {
    auto it = std::lower_bound(field.counts.begin(), field.counts.end(), w,
                               [](const auto& e, SiteIndex key) { return e.first < key; });
    if (it != field.counts.end() && it->first == w) return it->second;
    return 0;
}

std::vector<std::pair<SiteIndex, std::int64_t>> snapshot(const OccupancyField& field) {
    return field.counts; // stored sorted
}

void write_snapshot_ndjson(std::ostream& os, const OccupancyField& field) {
    char buf[128];
    for (const auto& [w, c] : field.counts) {
        std::snprintf(buf, sizeof buf, "{\"i\":%" PRId64 ",\"j\":%" PRId64 ",\"count\":%" PRId64 "}\n",
                      w.i, w.j, c);
        os << buf;
    }
}

ParticleSimulation::ParticleSimulation(const StepKernel& kernel, const SimParams& params,
                                       RngStream stream, bool initial_injection)
    : ParticleSimulation(kernel, params, std::move(stream),
                         geometric_injection(params.injection_mean), initial_injection) {}

ParticleSimulation::ParticleSimulation(const StepKernel& kernel, const SimParams& params,
                                       RngStream stream, InjectionLaw law, bool initial_injection)
    : kernel_(kernel), params_(params), stream_(stream), law_(std::move(law)) {
    params_.validate();
    if (initial_injection) {
        const std::int64_t n = law_(0, stream_);
        if (n > 0) field_.counts.push_back({params_.source, n});
        field_.injected_total = n;
    }
}

void ParticleSimulation::advance() {
    field_ = step(field_, kernel_, params_, stream_, law_);
}

std::vector<std::pair<SiteIndex, double>> ParticleSimulation::occupied() const {
    std::vector<std::pair<SiteIndex, double>> out;
    out.reserve(field_.counts.size());
    for (const auto& [w, c] : field_.counts)
        out.push_back({w, static_cast<double>(c)});
    return out;
}

} // namespace latseek
