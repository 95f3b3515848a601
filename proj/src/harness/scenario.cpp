#include "interneuron/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace interneuron::harness {

namespace {

std::uint64_t geometric_rounds(std::mt19937_64& rng, double mean) {
    if (mean <= 1.0) {
        return 1;
    }
    std::geometric_distribution<std::uint64_t> g(1.0 / mean);
    return 1 + g(rng);
}

Elapsed uniform_between(std::mt19937_64& rng, Elapsed lo, Elapsed hi) {
    if (hi <= lo) {
        return lo;
    }
    std::uniform_int_distribution<std::int64_t> d(lo.count(), hi.count());
    return Elapsed(d(rng));
}

}  // namespace

std::vector<ScenarioEvent> expand_random_injection(const RandomInjection& inj, const std::vector<std::string>& nics,
                                                   std::uint64_t rounds, std::uint64_t seed) {
    std::vector<ScenarioEvent> out;
    if (!inj.enabled()) {
        return out;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5ce7a210u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::uint64_t> nic_busy_until(nics.size(), 0);
    std::uint64_t compute_busy_until = 0;
    for (std::uint64_t r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < nics.size(); ++i) {
            const double draw = unit(rng);
            if (r < nic_busy_until[i] || draw >= inj.nic_episode_rate) {
                continue;
            }
            if (inj.nic_exclusive &&
                std::any_of(nic_busy_until.begin(), nic_busy_until.end(), [r](std::uint64_t u) { return r < u; })) {
                continue;
            }
            const Elapsed spike = uniform_between(rng, inj.nic_spike_min, inj.nic_spike_max);
            const std::uint64_t len = geometric_rounds(rng, inj.nic_mean_rounds);
            const bool lossy = unit(rng) < inj.nic_loss_rate;
            out.push_back({r, AddSpike{nics[i], spike, len, inj.nic_direction}});
            if (lossy) {
                out.push_back({r, SetLoss{nics[i], 1.0}});
                out.push_back({r + len, SetLoss{nics[i], std::nullopt}});
            }
            nic_busy_until[i] = r + len;
        }
        const double draw = unit(rng);
        if (r >= compute_busy_until && draw < inj.compute_episode_rate) {
            const Elapsed delay = uniform_between(rng, inj.compute_delay_min, inj.compute_delay_max);
            const std::uint64_t len = geometric_rounds(rng, inj.compute_mean_rounds);
            out.push_back({r, AddComputeDelay{delay, len}});
            compute_busy_until = r + len;
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.at_round < b.at_round; });
    return out;
}

}  // namespace interneuron::harness
