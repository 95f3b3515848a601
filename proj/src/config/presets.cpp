#include "interneuron/config/config.hpp"

#include <map>

namespace interneuron::config {

namespace {

// Two wireless links between vehicle and roadside: a wide one that carries
// raw frames and a narrower one for the sampled copy.
constexpr const char* kLinks = R"(
profiles:
  - name: wlan-wide
    base_ms: 4
    capacity_bps: 100000000
    jitter: {model: lognormal, mean_ms: 2, stddev_ms: 2}
  - name: wlan-narrow
    base_ms: 5
    capacity_bps: 40000000
    jitter: {model: lognormal, mean_ms: 2, stddev_ms: 2}
nics:
  - {id: nic-a, profile: wlan-wide, security: 60}
  - {id: nic-b, profile: wlan-narrow, security: 60}
)";

constexpr const char* kFig5 = R"(
name: fig5_ramp
rounds: 16
seed: 7
controller: interneuron
rtguard: {k: 0.3, d3_ms: 130, beta: -0.1, rho1: 0.25, warmup_rounds: 3}
scenario:
  - {round: 3, action: add_spike, nic: nic-a, ms: 6, duration: 2, direction: up}
  - {round: 5, action: add_spike, nic: nic-a, ms: 60, duration: 8, direction: up}
  - {round: 8, action: add_spike, nic: nic-b, ms: 30, duration: 2, direction: up}
  - {round: 10, action: add_spike, nic: nic-b, ms: 80, duration: 3, direction: up}
  - {round: 10, action: add_spike, nic: nic-a, ms: 40, duration: 3, direction: up}
)";

constexpr const char* kTable2 = R"(
name: table2_random
rounds: 300
seed: 1
controller: interneuron
rtguard: {k: 0.3, d3_ms: 130, beta: -0.1, rho1: 0.25, warmup_rounds: 3}
random:
  nic_episode_rate: 0.10
  nic_spike_min_ms: 80
  nic_spike_max_ms: 250
  nic_mean_rounds: 8
  nic_direction: up
  compute_episode_rate: 0.02
  compute_delay_min_ms: 20
  compute_delay_max_ms: 50
  compute_mean_rounds: 1
)";

constexpr const char* kXJitter = R"(
name: xjitter_study
rounds: 300
seed: 1
controller: interneuron
rtguard: {k: 0.3, d3_ms: 130, beta: -0.1, rho1: 0.25, warmup_rounds: 3}
random:
  compute_episode_rate: 0.05
  compute_delay_min_ms: 30
  compute_delay_max_ms: 60
  compute_mean_rounds: 5
)";

constexpr const char* kAlpha = R"(
name: alpha_sweep
rounds: 200
seed: 3
controller: interneuron
clocks: {remote_offset_ms: 50}
rtguard: {k: 0.3, d3_ms: 130, beta: -0.1, rho1: 0.25, warmup_rounds: 3}
random:
  nic_episode_rate: 0.08
  nic_spike_min_ms: 20
  nic_spike_max_ms: 150
  nic_mean_rounds: 4
  compute_episode_rate: 0.05
  compute_delay_min_ms: 10
  compute_delay_max_ms: 50
  compute_mean_rounds: 2
)";

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> m = {
        {"fig5_ramp", std::string(kFig5) + kLinks},
        {"table2_random", std::string(kTable2) + kLinks},
        {"xjitter_study", std::string(kXJitter) + kLinks},
        {"alpha_sweep", std::string(kAlpha) + kLinks},
    };
    return m;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : presets()) v.push_back(k);
        return v;
    }();
    return names;
}

const std::string& preset_text(const std::string& name) {
    const auto& m = presets();
    auto it = m.find(name);
    if (it == m.end()) {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return it->second;
}

}  // namespace interneuron::config
