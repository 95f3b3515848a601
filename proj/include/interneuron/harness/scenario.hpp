#pragma once

#include "interneuron/core/types.hpp"
#include "interneuron/sim/simnet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace interneuron::harness {

struct SetBaseLatency {
    std::string nic;
    Elapsed value{};
};
/// Extra latency on messages sent over `nic` for `duration_rounds`, in one
/// direction (uplink carries frames, downlink results) or both.
struct AddSpike {
    std::string nic;
    Elapsed value{};
    std::uint64_t duration_rounds = 1;
    std::optional<sim::Direction> direction;
};
struct SetLoss {
    std::string nic;
    /// nullopt restores the profile's configured loss rate.
    std::optional<double> rate;
};
struct SetOffset {
    std::string node;
    Elapsed value{};
};
/// Extra service time on the remote compute node for `duration_rounds`.
struct AddComputeDelay {
    Elapsed value{};
    std::uint64_t duration_rounds = 1;
};

using ScenarioAction = std::variant<SetBaseLatency, AddSpike, SetLoss, SetOffset, AddComputeDelay>;

/// Applied before round `at_round` begins.
struct ScenarioEvent {
    std::uint64_t at_round = 0;
    ScenarioAction action;
};

/// Seeded per-round disturbance draws: NIC degradation episodes and compute
/// slowdown episodes with geometric durations.
struct RandomInjection {
    double nic_episode_rate = 0.0;
    Elapsed nic_spike_min = ms(40);
    Elapsed nic_spike_max = ms(150);
    double nic_mean_rounds = 1.0;
    double nic_loss_rate = 0.0;
    /// At most one NIC degraded at a time (coverage gaps of different
    /// operators rarely coincide).
    bool nic_exclusive = true;
    /// Direction NIC spikes apply to; nullopt means both.
    std::optional<sim::Direction> nic_direction;
    double compute_episode_rate = 0.0;
    Elapsed compute_delay_min = ms(10);
    Elapsed compute_delay_max = ms(40);
    double compute_mean_rounds = 1.0;

    bool enabled() const { return nic_episode_rate > 0.0 || compute_episode_rate > 0.0; }
};

/// Expands the random injection into concrete events, deterministically in
/// (seed, nics, rounds). Independent of the controller under test.
std::vector<ScenarioEvent> expand_random_injection(const RandomInjection& inj, const std::vector<std::string>& nics,
                                                   std::uint64_t rounds, std::uint64_t seed);

}  // namespace interneuron::harness
