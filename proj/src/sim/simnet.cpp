#include "interneuron/sim/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace interneuron::sim {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng make_link_rng(std::uint64_t seed, const std::string& nic_id, Direction dir) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(fnv1a(nic_id)), static_cast<std::uint32_t>(fnv1a(nic_id) >> 32),
                      static_cast<std::uint32_t>(dir)};
    return Rng(seq);
}

}  // namespace

Timestamp ClockModel::read(TrueTime t) const {
    return Timestamp(t.micros() + offset.count() + drift.scale(Elapsed(t.micros())).count());
}

TrueTime ClockModel::true_time_of(Timestamp local) const {
    const std::int64_t shifted = local.micros() - offset.count();
    if (drift == Ratio{}) {
        return TrueTime(shifted);
    }
    auto t = static_cast<std::int64_t>(std::floor(static_cast<double>(shifted) / (1.0 + drift.to_double())));
    while (read(TrueTime(t)) < local) {
        ++t;
    }
    while (read(TrueTime(t - 1)) >= local) {
        --t;
    }
    return TrueTime(t);
}

void EventLoop::schedule_at(TrueTime at, Action action) {
    queue_.push(Item{std::max(at, now_), next_seq_++, std::move(action)});
}

void EventLoop::run_until(TrueTime until) {
    while (!queue_.empty() && queue_.top().at <= until) {
        Item item = queue_.top();
        queue_.pop();
        now_ = item.at;
        ++processed_;
        item.action();
    }
    now_ = std::max(now_, until);
}

void EventLoop::run() {
    while (!queue_.empty()) {
        Item item = queue_.top();
        queue_.pop();
        now_ = item.at;
        ++processed_;
        item.action();
    }
}

std::string_view to_string(Direction d) {
    return d == Direction::Uplink ? "up" : "down";
}

Network::Network(EventLoop& loop, std::uint64_t seed) : loop_(loop), seed_(seed) {}

void Network::add_node(const std::string& node, ClockModel clock) {
    if (!clocks_.emplace(node, clock).second) {
        throw ContractError("node '" + node + "' already added");
    }
}

void Network::add_nic(const std::string& nic_id, LatencyProfile profile) {
    profile.validate();
    if (links_.contains(nic_id)) {
        throw ContractError("NIC '" + nic_id + "' already added to the network");
    }
    Nic n{std::move(profile), Link{loop_.now(), loop_.now(), 0, Elapsed{}, make_link_rng(seed_, nic_id, Direction::Uplink)},
          Link{loop_.now(), loop_.now(), 0, Elapsed{}, make_link_rng(seed_, nic_id, Direction::Downlink)}};
    links_.emplace(nic_id, std::move(n));
}

const ClockModel& Network::clock(const std::string& node) const {
    auto it = clocks_.find(node);
    if (it == clocks_.end()) {
        throw ContractError("unknown node '" + node + "'");
    }
    return it->second;
}

Timestamp Network::now(const std::string& node) const {
    return read_clock(node, loop_.now());
}

Timestamp Network::read_clock(const std::string& node, TrueTime t) const {
    const Timestamp ts = clock(node).read(t);
    if (ts.micros() < 0) {
        throw ContractError("clock of node '" + node + "' reads negative; start the run later");
    }
    return ts;
}

void Network::schedule_at_local(const std::string& node, Timestamp local, EventLoop::Action action) {
    loop_.schedule_at(clock(node).true_time_of(local), std::move(action));
}

Network::Nic& Network::nic(const std::string& nic_id) {
    auto it = links_.find(nic_id);
    if (it == links_.end()) {
        throw ContractError("unknown NIC '" + nic_id + "'");
    }
    return it->second;
}

const Network::Nic& Network::nic(const std::string& nic_id) const {
    return const_cast<Network*>(this)->nic(nic_id);
}

Transit Network::schedule_delivery(const std::string& nic_id, Direction dir, Bytes size_bytes,
                                   EventLoop::Action on_arrival) {
    Nic& n = nic(nic_id);
    Link& link = dir == Direction::Uplink ? n.up : n.down;
    const Bytes wire_size = size_bytes + header_overhead_;
    const Elapsed ser = serialization_time(wire_size, n.profile.capacity);
    const TrueTime sent = loop_.now();
    const TrueTime tx_start = std::max(sent, link.free_at);
    link.free_at = tx_start + ser;

    const auto latency = sample_latency(n.profile, wire_size, link.rng, link.sent++);
    Transit t{sent, std::nullopt, std::nullopt};
    if (latency) {
        TrueTime arrival = tx_start + *latency + link.extra;
        arrival = std::max(arrival, link.last_arrival);
        link.last_arrival = arrival;
        t.arrives_at = arrival;
        t.observed_latency = (arrival - sent) - ser;
        loop_.schedule_at(arrival, std::move(on_arrival));
    }
    if (log_enabled_) {
        log_.push_back(fmt::format("{} send nic={} dir={} bytes={} arrive={}", sent.micros(), nic_id, to_string(dir),
                                   wire_size, t.arrives_at ? std::to_string(t.arrives_at->micros()) : "lost"));
    }
    return t;
}

void Network::set_base_latency(const std::string& nic_id, Elapsed base) {
    if (base < Elapsed::zero()) {
        throw ContractError("base latency must be >= 0");
    }
    nic(nic_id).profile.base_latency = base;
}

void Network::set_extra_latency(const std::string& nic_id, Direction dir, Elapsed extra) {
    Nic& n = nic(nic_id);
    (dir == Direction::Uplink ? n.up : n.down).extra = extra;
}

void Network::set_loss(const std::string& nic_id, double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw ContractError("loss rate must lie in [0, 1]");
    }
    nic(nic_id).profile.loss_rate = rate;
}

void Network::set_offset(const std::string& node, Elapsed offset) {
    auto it = clocks_.find(node);
    if (it == clocks_.end()) {
        throw ContractError("unknown node '" + node + "'");
    }
    it->second.offset = offset;
}

const LatencyProfile& Network::profile(const std::string& nic_id) const {
    return nic(nic_id).profile;
}

Elapsed Network::extra_latency(const std::string& nic_id, Direction dir) const {
    const Nic& n = nic(nic_id);
    return (dir == Direction::Uplink ? n.up : n.down).extra;
}

}  // namespace interneuron::sim
