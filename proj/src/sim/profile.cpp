#include "interneuron/sim/profile.hpp"

#include <cmath>
#include <numbers>

namespace interneuron::sim {

LogNormal LogNormal::from_moments(Elapsed mean, Elapsed stddev) {
    if (mean <= Elapsed::zero() || stddev < Elapsed::zero()) {
        throw ContractError("lognormal jitter needs a positive mean and non-negative stddev");
    }
    const double m = static_cast<double>(mean.count()) / 1000.0;
    const double s = static_cast<double>(stddev.count()) / 1000.0;
    const double sigma2 = std::log1p((s * s) / (m * m));
    return LogNormal{std::log(m) - sigma2 / 2.0, std::sqrt(sigma2)};
}

void LatencyProfile::validate() const {
    if (base_latency < Elapsed::zero()) {
        throw ContractError("profile '" + name + "': base latency must be >= 0");
    }
    if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
        throw ContractError("profile '" + name + "': loss rate must lie in [0, 1]");
    }
    if (capacity <= 0) {
        throw ContractError("profile '" + name + "': capacity must be > 0");
    }
    if (const auto* st = std::get_if<SpikeTrain>(&jitter); st && st->period == 0) {
        throw ContractError("profile '" + name + "': spike period must be >= 1");
    }
    if (const auto* ln = std::get_if<LogNormal>(&jitter); ln && ln->sigma < 0.0) {
        throw ContractError("profile '" + name + "': lognormal sigma must be >= 0");
    }
}

Elapsed serialization_time(Bytes size_bytes, BytesPerSecond capacity) {
    if (capacity <= 0) {
        throw ContractError("serialization_time: capacity must be positive");
    }
    const __int128 num = static_cast<__int128>(size_bytes) * 1'000'000 * 2 + capacity;
    return Elapsed(static_cast<std::int64_t>(num / (static_cast<__int128>(capacity) * 2)));
}

std::optional<Elapsed> sample_latency(const LatencyProfile& profile, Bytes size_bytes, Rng& rng,
                                      std::uint64_t message_index) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double loss_draw = unit(rng);
    // Box-Muller on two fixed draws; std::normal_distribution may reject and
    // consume a variable number of values.
    const double u1 = 1.0 - unit(rng);
    const double u2 = unit(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);

    Elapsed jitter{};
    if (const auto* ln = std::get_if<LogNormal>(&profile.jitter)) {
        const double jitter_ms = std::exp(ln->mu + ln->sigma * z);
        jitter = Elapsed(std::llround(jitter_ms * 1000.0));
    } else if (const auto* st = std::get_if<SpikeTrain>(&profile.jitter)) {
        if (st->period > 0 && (message_index + 1) % st->period == 0) {
            jitter = st->magnitude;
        }
    }
    if (loss_draw < profile.loss_rate) {
        return std::nullopt;
    }
    return profile.base_latency + serialization_time(size_bytes, profile.capacity) + jitter;
}

}  // namespace interneuron::sim
