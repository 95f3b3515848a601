#pragma once

#include "interneuron/core/types.hpp"
#include "interneuron/net/registry.hpp"
#include "interneuron/rt/guard.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace interneuron::policy {

struct Assignment {
    std::string nic_id;
    PayloadDescriptor payload;
    bool operator==(const Assignment&) const = default;
};

struct DispatchPlan {
    std::vector<Assignment> assignments;
    TransmitMode mode = TransmitMode::Normal;
    /// Only one NIC qualified, so there is no redundant copy.
    bool single_nic = false;
};

struct PolicyConfig {
    Ratio sampling_ratio = Ratio::from_micros(250'000);
    Ratio accuracy_penalty = Ratio::from_micros(940'000);
};

/// RawFrame -> SampledFrame of size raw * sampling_ratio, carrying the
/// accuracy penalty as its accuracy factor.
PayloadDescriptor downsample(const PayloadDescriptor& payload, const PolicyConfig& cfg);

/// Decides which NICs carry a message. Implementations are stateless; the
/// receive side lives in FragmentMerger.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string_view name() const = 0;

    /// Forward path for a frame.
    virtual DispatchPlan plan_send(const QosRequirement& qos, rt::TransmitDirective directive,
                                   const net::NicRegistry& registry, const PayloadDescriptor& raw) const = 0;

    /// Return path for a (non-sampleable) result.
    virtual DispatchPlan plan_reply(rt::TransmitDirective directive, const net::NicRegistry& registry,
                                    const PayloadDescriptor& result) const = 0;
};

/// Two highest-delay NICs above the bandwidth floor: the lower-bandwidth one
/// carries the sampled frame, the other the raw frame. Under ReduceTime both
/// carry the sampled frame.
class DownSamplingPolicy final : public Policy {
public:
    explicit DownSamplingPolicy(PolicyConfig cfg = {}) : cfg_(cfg) {}

    std::string_view name() const override { return "down_sampling"; }
    DispatchPlan plan_send(const QosRequirement& qos, rt::TransmitDirective directive,
                           const net::NicRegistry& registry, const PayloadDescriptor& raw) const override;
    DispatchPlan plan_reply(rt::TransmitDirective directive, const net::NicRegistry& registry,
                            const PayloadDescriptor& result) const override;

    const PolicyConfig& config() const { return cfg_; }

private:
    PolicyConfig cfg_;
};

/// Everything goes raw over a single NIC: either a pinned one or the current
/// best-delay NIC.
class PassthroughPolicy final : public Policy {
public:
    explicit PassthroughPolicy(std::optional<std::string> pinned_nic = std::nullopt)
        : pinned_(std::move(pinned_nic)) {}

    std::string_view name() const override { return "passthrough"; }
    DispatchPlan plan_send(const QosRequirement& qos, rt::TransmitDirective directive,
                           const net::NicRegistry& registry, const PayloadDescriptor& raw) const override;
    DispatchPlan plan_reply(rt::TransmitDirective directive, const net::NicRegistry& registry,
                            const PayloadDescriptor& result) const override;

private:
    std::optional<std::string> pinned_;
};

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& cfg);

struct Fragment {
    std::uint64_t round_id = 0;
    PayloadDescriptor payload;
    TransmitMode mode = TransmitMode::Normal;
};

struct DeliverNow {
    PayloadDescriptor payload;
};
/// Keep the fragment until the checkpoint deadline (relative to t0).
struct HoldUntil {
    Elapsed deadline;
};
struct DeliverHeld {
    PayloadDescriptor payload;
};
enum class DropReason : std::uint8_t { Stale, Duplicate, AlreadyDelivered };
struct Dropped {
    DropReason reason;
};

using MergeDecision = std::variant<DeliverNow, HoldUntil, DeliverHeld, Dropped>;

std::string_view to_string(DropReason r);

/// Receive-side merge state of one pipeline endpoint. Guarantees at most one
/// delivery per round; rounds are strictly sequential.
class FragmentMerger {
public:
    /// `hold_deadline` is D_n for this checkpoint; used only when a sampled
    /// frame arrives first in Normal mode.
    MergeDecision on_fragment(const Fragment& fragment, Elapsed hold_deadline);

    /// The hold timer for `round_id` fired.
    std::optional<MergeDecision> on_hold_expiry(std::uint64_t round_id);

    std::optional<std::uint64_t> current_round() const { return current_; }
    bool delivered() const { return delivered_; }
    std::uint64_t stale_count() const { return stale_; }
    std::uint64_t duplicate_count() const { return duplicates_; }

private:
    std::optional<std::uint64_t> current_;
    bool delivered_ = false;
    std::optional<PayloadDescriptor> held_;
    std::vector<PayloadKind> seen_;
    std::uint64_t stale_ = 0;
    std::uint64_t duplicates_ = 0;
};

}  // namespace interneuron::policy
