#pragma once

#include "interneuron/core/types.hpp"

#include <array>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace interneuron::net {

/// Ordinal quality scores of one NIC, each in [0, 100]; higher is better.
struct Nature {
    double delay = 0.0;
    double bandwidth = 0.0;
    double reliability = 0.0;
    double security = 0.0;

    bool operator==(const Nature&) const = default;
};

enum class NatureField : std::uint8_t { Delay, Bandwidth, Reliability, Security };

double field(const Nature& n, NatureField f);

/// Fixed per-field values that replace the measured scores.
struct NatureOverrides {
    std::optional<double> delay;
    std::optional<double> bandwidth;
    std::optional<double> reliability;
    std::optional<double> security;
};

struct NicDescriptor {
    std::string nic_id;
    /// Nature used until enough observations exist.
    Nature nature;
    BytesPerSecond raw_capacity = 0;
    std::string profile_ref;
    NatureOverrides overrides;
};

struct NatureRequirement {
    std::optional<double> min_delay;
    std::optional<double> min_bandwidth;
    std::optional<double> min_reliability;
    std::optional<double> min_security;
    NatureField rank_by = NatureField::Delay;
    std::size_t count = 1;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DuplicateNic : public RegistryError {
public:
    using RegistryError::RegistryError;
};
class EmptyRegistry : public RegistryError {
public:
    using RegistryError::RegistryError;
};
class NoMatchingNic : public RegistryError {
public:
    using RegistryError::RegistryError;
};

/// Maps link statistics onto Nature scores:
///   delay       = 100 / (1 + log10(1 + mean_ms))
///   reliability = 100 * (1 - loss) / (1 + stddev / 50ms)
///   bandwidth   = clamp(100 * log10(capacity / 1e5) / 4, 0, 100)
/// Security is not measurable and is left at 0.
Nature score_from_stats(Elapsed mean_latency, Elapsed stddev, double loss_rate, BytesPerSecond capacity);

double bandwidth_score(BytesPerSecond capacity);

/// Thread-safe NIC inventory. Reads take a shared lock; registration and
/// observations are serialized, so every query sees a consistent snapshot.
class NicRegistry {
public:
    explicit NicRegistry(std::size_t window = 20);

    void register_nic(NicDescriptor descriptor);

    /// Records one transit observation: the latency excluding serialization
    /// time, or nullopt for a lost message.
    void observe(const std::string& nic_id, std::optional<Elapsed> latency);

    /// Current Nature: descriptor Nature until the window holds at least one
    /// delivered sample, measured afterwards; overrides always win.
    Nature nature(const std::string& nic_id) const;
    const NicDescriptor& descriptor(const std::string& nic_id) const;

    std::vector<std::string> enumerate() const;
    std::size_t size() const;

    std::vector<std::string> select_nics(const NatureRequirement& req) const;

private:
    struct Entry {
        NicDescriptor descriptor;
        std::deque<std::optional<Elapsed>> window;
    };

    Nature nature_locked(const Entry& e) const;
    const Entry& entry_locked(const std::string& nic_id) const;

    std::size_t window_;
    std::map<std::string, Entry> nics_;
    mutable std::shared_mutex mu_;
};

}  // namespace interneuron::net
