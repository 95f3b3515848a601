#include "interneuron/net/registry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <tuple>

namespace interneuron::net {

double field(const Nature& n, NatureField f) {
    switch (f) {
    case NatureField::Delay:
        return n.delay;
    case NatureField::Bandwidth:
        return n.bandwidth;
    case NatureField::Reliability:
        return n.reliability;
    case NatureField::Security:
        return n.security;
    }
    return 0.0;
}

double bandwidth_score(BytesPerSecond capacity) {
    if (capacity <= 0) {
        return 0.0;
    }
    const double s = 100.0 * std::log10(static_cast<double>(capacity) / 1e5) / 4.0;
    return std::clamp(s, 0.0, 100.0);
}

Nature score_from_stats(Elapsed mean_latency, Elapsed stddev, double loss_rate, BytesPerSecond capacity) {
    const double mean_ms = std::max<double>(0.0, static_cast<double>(mean_latency.count()) / 1000.0);
    const double sd_ms = std::max<double>(0.0, static_cast<double>(stddev.count()) / 1000.0);
    const double loss = std::clamp(loss_rate, 0.0, 1.0);
    Nature n;
    n.delay = 100.0 / (1.0 + std::log10(1.0 + mean_ms));
    n.reliability = 100.0 * (1.0 - loss) / (1.0 + sd_ms / 50.0);
    n.bandwidth = bandwidth_score(capacity);
    n.security = 0.0;
    return n;
}

NicRegistry::NicRegistry(std::size_t window) : window_(window) {
    if (window_ == 0) {
        throw ContractError("observation window must hold at least one sample");
    }
}

void NicRegistry::register_nic(NicDescriptor descriptor) {
    if (descriptor.nic_id.empty()) {
        throw RegistryError("NIC id must not be empty");
    }
    if (descriptor.raw_capacity <= 0) {
        throw RegistryError("NIC '" + descriptor.nic_id + "' has non-positive capacity");
    }
    std::unique_lock lock(mu_);
    if (nics_.contains(descriptor.nic_id)) {
        throw DuplicateNic("NIC '" + descriptor.nic_id + "' already registered");
    }
    const std::string id = descriptor.nic_id;
    nics_.emplace(id, Entry{std::move(descriptor), {}});
}

void NicRegistry::observe(const std::string& nic_id, std::optional<Elapsed> latency) {
    std::unique_lock lock(mu_);
    auto it = nics_.find(nic_id);
    if (it == nics_.end()) {
        throw RegistryError("unknown NIC '" + nic_id + "'");
    }
    auto& w = it->second.window;
    w.push_back(latency);
    while (w.size() > window_) {
        w.pop_front();
    }
}

const NicRegistry::Entry& NicRegistry::entry_locked(const std::string& nic_id) const {
    auto it = nics_.find(nic_id);
    if (it == nics_.end()) {
        throw RegistryError("unknown NIC '" + nic_id + "'");
    }
    return it->second;
}

Nature NicRegistry::nature_locked(const Entry& e) const {
    Nature n = e.descriptor.nature;
    std::int64_t sum = 0;
    std::size_t delivered = 0;
    for (const auto& s : e.window) {
        if (s) {
            sum += s->count();
            ++delivered;
        }
    }
    if (delivered > 0) {
        const double mean = static_cast<double>(sum) / static_cast<double>(delivered);
        double var = 0.0;
        for (const auto& s : e.window) {
            if (s) {
                const double d = static_cast<double>(s->count()) - mean;
                var += d * d;
            }
        }
        var /= static_cast<double>(delivered);
        const double loss = 1.0 - static_cast<double>(delivered) / static_cast<double>(e.window.size());
        const Nature measured = score_from_stats(Elapsed(std::llround(mean)), Elapsed(std::llround(std::sqrt(var))),
                                                 loss, e.descriptor.raw_capacity);
        n.delay = measured.delay;
        n.reliability = measured.reliability;
        n.bandwidth = measured.bandwidth;
    } else if (!e.window.empty()) {
        // Everything lost: the link is as bad as it gets on delay and reliability.
        n.delay = 0.0;
        n.reliability = 0.0;
        n.bandwidth = bandwidth_score(e.descriptor.raw_capacity);
    }
    const auto& o = e.descriptor.overrides;
    if (o.delay) n.delay = *o.delay;
    if (o.bandwidth) n.bandwidth = *o.bandwidth;
    if (o.reliability) n.reliability = *o.reliability;
    if (o.security) n.security = *o.security;
    return n;
}

Nature NicRegistry::nature(const std::string& nic_id) const {
    std::shared_lock lock(mu_);
    return nature_locked(entry_locked(nic_id));
}

const NicDescriptor& NicRegistry::descriptor(const std::string& nic_id) const {
    std::shared_lock lock(mu_);
    return entry_locked(nic_id).descriptor;
}

std::vector<std::string> NicRegistry::enumerate() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> ids;
    ids.reserve(nics_.size());
    for (const auto& [id, _] : nics_) {
        ids.push_back(id);
    }
    return ids;
}

std::size_t NicRegistry::size() const {
    std::shared_lock lock(mu_);
    return nics_.size();
}

std::vector<std::string> NicRegistry::select_nics(const NatureRequirement& req) const {
    if (req.count == 0) {
        throw ContractError("NatureRequirement.count must be >= 1");
    }
    std::shared_lock lock(mu_);
    if (nics_.empty()) {
        throw EmptyRegistry("no NICs registered");
    }
    auto meets = [](const std::optional<double>& floor, double v) { return !floor || v >= *floor; };
    std::vector<std::pair<double, std::string>> candidates;
    for (const auto& [id, e] : nics_) {
        const Nature n = nature_locked(e);
        if (meets(req.min_delay, n.delay) && meets(req.min_bandwidth, n.bandwidth) &&
            meets(req.min_reliability, n.reliability) && meets(req.min_security, n.security)) {
            candidates.emplace_back(field(n, req.rank_by), id);
        }
    }
    if (candidates.empty()) {
        throw NoMatchingNic("no NIC satisfies the requirement table");
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return std::tie(b.first, a.second) < std::tie(a.first, b.second);
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < candidates.size() && i < req.count; ++i) {
        out.push_back(candidates[i].second);
    }
    return out;
}

}  // namespace interneuron::net
