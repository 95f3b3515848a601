#pragma once

#include "interneuron/core/types.hpp"
#include "interneuron/harness/quality.hpp"
#include "interneuron/harness/scenario.hpp"
#include "interneuron/net/registry.hpp"
#include "interneuron/policy/policy.hpp"
#include "interneuron/rt/guard.hpp"
#include "interneuron/sim/profile.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace interneuron::harness {

enum class ControllerKind : std::uint8_t { Interneuron, ComputeOnlyAdaptive, Static };

std::string_view to_string(ControllerKind k);
ControllerKind controller_from_string(std::string_view s);

inline constexpr const char* kOriginNode = "sov";
inline constexpr const char* kRemoteNode = "sor";

struct NicSpec {
    std::string id;
    std::string profile;
    /// Nominal capacity for scoring; defaults to the profile's capacity.
    std::optional<BytesPerSecond> capacity;
    double security = 50.0;
    net::NatureOverrides overrides;
};

struct RtConfig {
    Elapsed d3 = ms(130);
    Ratio k = Ratio::from_micros(300'000);
    Ratio beta{};
    Ratio rho1 = Ratio::from_micros(250'000);
    std::uint64_t warmup_rounds = 3;
    Ratio initial_x = Ratio::from_micros(500'000);
    rt::DeadlineForm deadline_form = rt::DeadlineForm::Slack;
};

struct ResilienceConfig {
    bool timeout_handler = true;
    bool backup = true;
    Ratio recovery_step = Ratio::from_micros(200'000);
    /// Lowest-quality service time on the origin node.
    Elapsed backup_service_time = ms(90);
};

struct ExperimentConfig {
    std::string scenario_name = "default";
    std::uint64_t rounds = 100;
    std::uint64_t seed = 1;
    ControllerKind controller = ControllerKind::Interneuron;
    Elapsed frame_period = ms(200);

    RtConfig rt;
    ResilienceConfig resilience;
    std::string policy_name = "down_sampling";
    policy::PolicyConfig policy;

    Bytes raw_frame_bytes = 512'000;
    Bytes result_bytes = 5'000;
    Bytes header_overhead_bytes = 64;
    QosRequirement qos;
    std::size_t nature_window = 20;

    Elapsed origin_offset{};
    Elapsed remote_offset{};
    Ratio remote_drift{};

    std::vector<sim::LatencyProfile> profiles;
    std::vector<NicSpec> nics;
    QualityTable quality_table = default_quality_table();
    std::vector<ScenarioEvent> scenario;
    RandomInjection random;
    /// NIC used by the single-network controllers; best nominal delay if unset.
    std::optional<std::string> baseline_nic;

    std::string out_dir = "out";
    bool record_event_log = false;

    /// Throws ConfigError-compatible std::invalid_argument on violations.
    void validate() const;
    std::string run_id() const;
};

/// Per-round record. Optional fields are null when the checkpoint never ran.
struct RoundTrace {
    std::uint64_t round_id = 0;
    std::string controller;
    bool warmup = false;
    std::int64_t t0_us = 0;

    std::optional<Elapsed> theta1, theta2, theta3;
    std::optional<Elapsed> d1, d2, d3;
    /// θt_n - base_n on the measuring node's clock.
    std::optional<Elapsed> num1, num2, num3;
    std::string state1, state2;
    std::optional<Ratio> rho1, rho2;

    std::optional<std::size_t> quality;
    std::string transmit_mode;
    std::string return_mode;
    std::string frame_kind;
    bool single_nic = false;
    bool force_sampled = false;

    std::optional<Ratio> x, x_before, x_after;
    bool indicator = true;
    bool timeout = false;
    bool backup_enabled = false;
    std::string result_source;
    std::string payload_kind;
    double ap = 0.0;
    double ar = 0.0;
    std::optional<Elapsed> delivered_at;
    std::optional<Elapsed> backup_done;
    std::optional<Elapsed> remote_theta3;
    std::optional<Elapsed> late_result;
    std::uint64_t stale = 0;
    std::uint64_t duplicates = 0;

    bool operator==(const RoundTrace&) const = default;
};

struct Summary {
    std::string run_id;
    std::string controller;
    std::uint64_t seed = 0;
    std::uint64_t rounds = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t consec_timeouts = 0;
    double mean_e2e_us = 0.0;
    double mean_ap = 0.0;
    double mean_ar = 0.0;
    std::string scenario;
};

/// timeouts, consecutive pairs, and means over non-timeout rounds.
Summary summarize(const std::vector<RoundTrace>& traces, const ExperimentConfig& cfg);

struct ExperimentResult {
    std::vector<RoundTrace> traces;
    Summary summary;
    std::vector<std::string> event_log;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Profiles whose Nature seeds the registry: nominal mean and stddev.
net::Nature nominal_nature(const sim::LatencyProfile& profile, BytesPerSecond capacity, double security);

}  // namespace interneuron::harness
