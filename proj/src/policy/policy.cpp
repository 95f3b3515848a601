#include "interneuron/policy/policy.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

namespace interneuron::policy {

PayloadDescriptor downsample(const PayloadDescriptor& payload, const PolicyConfig& cfg) {
    if (payload.kind != PayloadKind::RawFrame) {
        throw ContractError("downsample: payload is not a raw frame");
    }
    if (payload.size_bytes <= 0) {
        throw ContractError("downsample: payload size must be positive");
    }
    if (cfg.sampling_ratio <= Ratio{} || cfg.sampling_ratio > ratio_one()) {
        throw ContractError("downsample: sampling ratio must lie in (0, 1]");
    }
    PayloadDescriptor out = payload;
    out.kind = PayloadKind::SampledFrame;
    const __int128 scaled = static_cast<__int128>(payload.size_bytes) * cfg.sampling_ratio.micros();
    out.size_bytes = std::max<Bytes>(1, static_cast<Bytes>(scaled / Ratio::kScale));
    out.accuracy_factor = cfg.accuracy_penalty;
    return out;
}

namespace {

net::NatureRequirement frame_requirement(const QosRequirement& qos, std::size_t count) {
    net::NatureRequirement req;
    if (qos.min_bandwidth > 0) {
        req.min_bandwidth = net::bandwidth_score(qos.min_bandwidth);
    }
    if (qos.security_floor > 0.0) {
        req.min_security = qos.security_floor;
    }
    if (qos.reliability_floor > 0.0) {
        req.min_reliability = qos.reliability_floor;
    }
    req.rank_by = net::NatureField::Delay;
    req.count = count;
    return req;
}

}  // namespace

DispatchPlan DownSamplingPolicy::plan_send(const QosRequirement& qos, rt::TransmitDirective directive,
                                           const net::NicRegistry& registry, const PayloadDescriptor& raw) const {
    const auto nics = registry.select_nics(frame_requirement(qos, 2));
    const PayloadDescriptor sampled = downsample(raw, cfg_);
    DispatchPlan plan;
    if (directive == rt::TransmitDirective::ReduceTime) {
        plan.mode = TransmitMode::DegradedSampledOnly;
        for (const auto& id : nics) {
            plan.assignments.push_back({id, sampled});
        }
    } else if (nics.size() == 1) {
        plan.assignments.push_back({nics[0], raw});
    } else {
        // nics[0] has the better delay score; the lower-bandwidth NIC takes the sample.
        const double bw0 = registry.nature(nics[0]).bandwidth;
        const double bw1 = registry.nature(nics[1]).bandwidth;
        const bool first_is_narrow = bw0 < bw1;
        const auto& narrow = first_is_narrow ? nics[0] : nics[1];
        const auto& wide = first_is_narrow ? nics[1] : nics[0];
        plan.assignments.push_back({wide, raw});
        plan.assignments.push_back({narrow, sampled});
    }
    plan.single_nic = nics.size() == 1;
    if (plan.single_nic) {
        spdlog::debug("down_sampling: only '{}' qualifies, sending without redundancy", nics[0]);
    }
    return plan;
}

DispatchPlan DownSamplingPolicy::plan_reply(rt::TransmitDirective directive, const net::NicRegistry& registry,
                                            const PayloadDescriptor& result) const {
    net::NatureRequirement req;
    req.rank_by = net::NatureField::Delay;
    req.count = directive == rt::TransmitDirective::ReduceTime ? 2 : 1;
    const auto nics = registry.select_nics(req);
    DispatchPlan plan;
    plan.mode = directive == rt::TransmitDirective::ReduceTime ? TransmitMode::DegradedSampledOnly
                                                                : TransmitMode::Normal;
    for (const auto& id : nics) {
        plan.assignments.push_back({id, result});
    }
    plan.single_nic = nics.size() == 1;
    return plan;
}

DispatchPlan PassthroughPolicy::plan_send(const QosRequirement& qos, rt::TransmitDirective,
                                          const net::NicRegistry& registry, const PayloadDescriptor& raw) const {
    DispatchPlan plan;
    plan.single_nic = true;
    if (pinned_) {
        plan.assignments.push_back({*pinned_, raw});
        return plan;
    }
    plan.assignments.push_back({registry.select_nics(frame_requirement(qos, 1)).front(), raw});
    return plan;
}

DispatchPlan PassthroughPolicy::plan_reply(rt::TransmitDirective, const net::NicRegistry& registry,
                                           const PayloadDescriptor& result) const {
    DispatchPlan plan;
    plan.single_nic = true;
    if (pinned_) {
        plan.assignments.push_back({*pinned_, result});
        return plan;
    }
    net::NatureRequirement req;
    req.count = 1;
    plan.assignments.push_back({registry.select_nics(req).front(), result});
    return plan;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& cfg) {
    if (name == "down_sampling") {
        return std::make_unique<DownSamplingPolicy>(cfg);
    }
    if (name == "passthrough") {
        return std::make_unique<PassthroughPolicy>();
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) + "' (expected down_sampling|passthrough)");
}

std::string_view to_string(DropReason r) {
    switch (r) {
    case DropReason::Stale:
        return "stale";
    case DropReason::Duplicate:
        return "duplicate";
    case DropReason::AlreadyDelivered:
        return "already_delivered";
    }
    return "unknown";
}

MergeDecision FragmentMerger::on_fragment(const Fragment& fragment, Elapsed hold_deadline) {
    if (current_ && fragment.round_id < *current_) {
        ++stale_;
        return Dropped{DropReason::Stale};
    }
    if (!current_ || fragment.round_id > *current_) {
        current_ = fragment.round_id;
        delivered_ = false;
        held_.reset();
        seen_.clear();
    }
    const PayloadKind kind = fragment.payload.kind;
    if (std::find(seen_.begin(), seen_.end(), kind) != seen_.end()) {
        ++duplicates_;
        return Dropped{DropReason::Duplicate};
    }
    seen_.push_back(kind);
    if (delivered_) {
        return Dropped{DropReason::AlreadyDelivered};
    }
    const bool waits_for_raw =
        fragment.mode == TransmitMode::Normal && kind == PayloadKind::SampledFrame;
    if (waits_for_raw) {
        held_ = fragment.payload;
        return HoldUntil{hold_deadline};
    }
    delivered_ = true;
    held_.reset();
    return DeliverNow{fragment.payload};
}

std::optional<MergeDecision> FragmentMerger::on_hold_expiry(std::uint64_t round_id) {
    if (!current_ || *current_ != round_id || delivered_ || !held_) {
        return std::nullopt;
    }
    delivered_ = true;
    PayloadDescriptor p = *held_;
    held_.reset();
    return DeliverHeld{p};
}

}  // namespace interneuron::policy
