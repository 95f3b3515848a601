#pragma once

#include "interneuron/harness/experiment.hpp"

#include <optional>
#include <string>
#include <vector>

namespace interneuron::harness {

struct Violation {
    std::optional<std::uint64_t> round;
    std::string invariant;
    std::string detail;
};

struct ValidateOptions {
    Ratio recovery_step = Ratio::from_micros(200'000);
    /// Allowed lowest/highest quality flips between consecutive on-time
    /// rounds within one recovery episode.
    std::size_t max_flips_per_episode = 1;
};

/// Invariant names reported: one_result_per_round, liveness, x_floor,
/// recovery_ladder, boundary, quality_oscillation.
std::vector<Violation> validate_trace(const std::vector<RoundTrace>& traces, const ValidateOptions& opt = {});

std::string format_violation(const Violation& v);

}  // namespace interneuron::harness
