#pragma once

#include "interneuron/core/types.hpp"
#include "interneuron/sim/profile.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace interneuron::sim {

/// Absolute simulation time, shared by all nodes. Nodes never see it
/// directly; they read their own ClockModel.
using TrueTime = Timestamp;

struct ClockModel {
    Elapsed offset{};
    /// Fractional rate error; 0 means the clock ticks at true rate.
    Ratio drift{};

    Timestamp read(TrueTime t) const;
    /// Earliest true time at which this clock reads at least `local`.
    TrueTime true_time_of(Timestamp local) const;
};

/// Single-threaded discrete-event loop. Events are totally ordered by
/// (true time, scheduling sequence number).
class EventLoop {
public:
    using Action = std::function<void()>;

    explicit EventLoop(TrueTime start = TrueTime(0)) : now_(start) {}

    TrueTime now() const { return now_; }

    /// Events in the past run at the current time, after already-due events.
    void schedule_at(TrueTime at, Action action);

    /// Runs events with time <= `until`, then advances the clock to `until`.
    void run_until(TrueTime until);
    void run();

    bool empty() const { return queue_.empty(); }
    std::uint64_t processed() const { return processed_; }

private:
    struct Item {
        TrueTime at;
        std::uint64_t seq;
        Action action;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    TrueTime now_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::priority_queue<Item, std::vector<Item>, Later> queue_;
};

enum class Direction : std::uint8_t { Uplink, Downlink };

std::string_view to_string(Direction d);

/// Outcome of handing one message to a NIC.
struct Transit {
    TrueTime sent_at;
    /// nullopt when the message is lost.
    std::optional<TrueTime> arrives_at;
    /// Latency excluding serialization, as a link monitor would measure it.
    std::optional<Elapsed> observed_latency;
};

/// Virtual NICs and node clocks on top of an EventLoop.
///
/// Each NIC has two independent links (uplink, downlink). A link serializes
/// messages one at a time and delivers in FIFO order; different NICs are
/// independent and may reorder relative to each other.
class Network {
public:
    Network(EventLoop& loop, std::uint64_t seed);

    void add_node(const std::string& node, ClockModel clock);
    void add_nic(const std::string& nic_id, LatencyProfile profile);

    bool has_nic(const std::string& nic_id) const { return links_.contains(nic_id); }

    /// The node's local clock reading at the current true time.
    Timestamp now(const std::string& node) const;
    Timestamp read_clock(const std::string& node, TrueTime t) const;
    /// Runs `action` when `node`'s clock reads `local`.
    void schedule_at_local(const std::string& node, Timestamp local, EventLoop::Action action);

    /// Sends `size_bytes` (plus header overhead) over `nic_id` now. The
    /// arrival callback runs at the receiver when the message lands; lost
    /// messages never invoke it.
    Transit schedule_delivery(const std::string& nic_id, Direction dir, Bytes size_bytes,
                              EventLoop::Action on_arrival);

    // Disturbance knobs, applied to messages sent after the call.
    void set_base_latency(const std::string& nic_id, Elapsed base);
    void set_extra_latency(const std::string& nic_id, Direction dir, Elapsed extra);
    void set_loss(const std::string& nic_id, double rate);
    void set_offset(const std::string& node, Elapsed offset);

    const LatencyProfile& profile(const std::string& nic_id) const;
    Elapsed extra_latency(const std::string& nic_id, Direction dir) const;

    void set_header_overhead(Bytes b) { header_overhead_ = b; }
    Bytes header_overhead() const { return header_overhead_; }

    /// One line per send/arrival/loss, for determinism checks.
    const std::vector<std::string>& event_log() const { return log_; }
    void enable_event_log(bool on) { log_enabled_ = on; }

private:
    struct Link {
        TrueTime free_at;
        TrueTime last_arrival;
        std::uint64_t sent = 0;
        Elapsed extra{};
        Rng rng;
    };
    struct Nic {
        LatencyProfile profile;
        Link up;
        Link down;
    };

    Nic& nic(const std::string& nic_id);
    const Nic& nic(const std::string& nic_id) const;
    const ClockModel& clock(const std::string& node) const;

    EventLoop& loop_;
    std::uint64_t seed_;
    std::map<std::string, ClockModel> clocks_;
    std::map<std::string, Nic> links_;
    Bytes header_overhead_ = 64;
    bool log_enabled_ = false;
    std::vector<std::string> log_;
};

}  // namespace interneuron::sim
