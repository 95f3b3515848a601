#pragma once

#include "interneuron/core/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

namespace interneuron::sim {

using Rng = std::mt19937_64;

struct NoJitter {
    bool operator==(const NoJitter&) const = default;
};

/// Additive jitter exp(N(mu, sigma)) milliseconds.
struct LogNormal {
    double mu = 0.0;
    double sigma = 0.0;

    /// Parameters whose jitter has the given mean and standard deviation.
    static LogNormal from_moments(Elapsed mean, Elapsed stddev);

    bool operator==(const LogNormal&) const = default;
};

/// Every `period`-th message on the link gets `magnitude` extra latency.
struct SpikeTrain {
    std::uint64_t period = 1;
    Elapsed magnitude{};
    bool operator==(const SpikeTrain&) const = default;
};

using JitterModel = std::variant<NoJitter, LogNormal, SpikeTrain>;

struct LatencyProfile {
    std::string name;
    Elapsed base_latency{};
    JitterModel jitter = NoJitter{};
    double loss_rate = 0.0;
    BytesPerSecond capacity = 1;

    /// Throws ContractError when an invariant is violated.
    void validate() const;
};

/// size / capacity, rounded half-up to the microsecond.
Elapsed serialization_time(Bytes size_bytes, BytesPerSecond capacity);

/// base + serialization + jitter, or nullopt when the loss draw says the
/// message is lost. Always consumes the same number of draws per call so that
/// streams stay aligned regardless of outcome. `message_index` drives
/// SpikeTrain.
std::optional<Elapsed> sample_latency(const LatencyProfile& profile, Bytes size_bytes, Rng& rng,
                                      std::uint64_t message_index = 0);

}  // namespace interneuron::sim
