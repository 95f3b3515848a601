#include "interneuron/harness/experiment.hpp"
#include "interneuron/resilience/resilience.hpp"
#include "interneuron/sim/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <spdlog/spdlog.h>

namespace interneuron::harness {

std::string_view to_string(ControllerKind k) {
    switch (k) {
    case ControllerKind::Interneuron:
        return "interneuron";
    case ControllerKind::ComputeOnlyAdaptive:
        return "compute_only";
    case ControllerKind::Static:
        return "static";
    }
    return "unknown";
}

ControllerKind controller_from_string(std::string_view s) {
    if (s == "interneuron") return ControllerKind::Interneuron;
    if (s == "compute_only" || s == "compute_only_adaptive") return ControllerKind::ComputeOnlyAdaptive;
    if (s == "static") return ControllerKind::Static;
    throw std::invalid_argument("unknown controller '" + std::string(s) +
                                "' (expected interneuron|compute_only|static)");
}

net::Nature nominal_nature(const sim::LatencyProfile& profile, BytesPerSecond capacity, double security) {
    Elapsed mean = profile.base_latency;
    Elapsed sd{};
    if (const auto* ln = std::get_if<sim::LogNormal>(&profile.jitter)) {
        const double m = std::exp(ln->mu + ln->sigma * ln->sigma / 2.0);
        const double v = (std::exp(ln->sigma * ln->sigma) - 1.0) * m * m;
        mean += Elapsed(std::llround(m * 1000.0));
        sd = Elapsed(std::llround(std::sqrt(v) * 1000.0));
    }
    net::Nature n = net::score_from_stats(mean, sd, profile.loss_rate, capacity);
    n.security = security;
    return n;
}

std::string ExperimentConfig::run_id() const {
    return fmt::format("{}-{}-s{}", scenario_name, to_string(controller), seed);
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
    if (rounds == 0) fail("rounds must be >= 1");
    if (rt.d3 <= Elapsed::zero()) fail("rtguard.d3_ms must be > 0");
    if (rt.k < Ratio{} || rt.k > ratio_one()) fail("rtguard.k must lie in [0, 1]");
    if (rt.rho1 < Ratio{}) fail("rtguard.rho1 must be >= 0");
    if (rt.initial_x < resilience::kMinX) fail("rtguard.initial_x must be >= -1");
    if (resilience.recovery_step <= Ratio{}) fail("resilience.recovery_step must be > 0");
    if (resilience.backup_service_time <= Elapsed::zero()) fail("resilience.backup_service_ms must be > 0");
    if (frame_period < std::max(rt.d3, resilience.backup_service_time)) {
        fail("frame_period_ms must be >= max(d3, backup service time) so rounds stay sequential");
    }
    if (raw_frame_bytes <= 0 || result_bytes <= 0) fail("payload sizes must be > 0");
    if (header_overhead_bytes < 0) fail("header overhead must be >= 0");
    if (policy.sampling_ratio <= Ratio{} || policy.sampling_ratio > ratio_one()) {
        fail("policy.sampling_ratio must lie in (0, 1]");
    }
    if (policy.accuracy_penalty <= Ratio{} || policy.accuracy_penalty > ratio_one()) {
        fail("policy.accuracy_penalty must lie in (0, 1]");
    }
    if (policy_name != "down_sampling" && policy_name != "passthrough") {
        fail("policy.name must be down_sampling or passthrough");
    }
    if (nature_window == 0) fail("netlayer.window must be >= 1");
    if (nics.empty()) fail("at least one NIC is required");
    std::map<std::string, const sim::LatencyProfile*> by_name;
    for (const auto& p : profiles) {
        try {
            p.validate();
        } catch (const ContractError& e) {
            fail(e.what());
        }
        if (!by_name.emplace(p.name, &p).second) fail("duplicate profile '" + p.name + "'");
    }
    std::map<std::string, int> ids;
    for (const auto& n : nics) {
        if (!by_name.contains(n.profile)) fail("NIC '" + n.id + "' references unknown profile '" + n.profile + "'");
        if (n.capacity && *n.capacity <= 0) fail("NIC '" + n.id + "' capacity must be > 0");
        if (++ids[n.id] > 1) fail("duplicate NIC id '" + n.id + "'");
    }
    if (baseline_nic && !ids.contains(*baseline_nic)) fail("baseline.nic '" + *baseline_nic + "' is not a NIC");
    try {
        validate_quality_table(quality_table);
    } catch (const ContractError& e) {
        fail(e.what());
    }
    for (const auto& ev : scenario) {
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, SetOffset>) {
                    if (a.node != kOriginNode && a.node != kRemoteNode) fail("scenario: unknown node '" + a.node + "'");
                } else if constexpr (std::is_same_v<T, AddComputeDelay>) {
                    if (a.duration_rounds == 0) fail("scenario: duration_rounds must be >= 1");
                } else {
                    if (!ids.contains(a.nic)) fail("scenario: unknown NIC '" + a.nic + "'");
                    if constexpr (std::is_same_v<T, AddSpike>) {
                        if (a.duration_rounds == 0) fail("scenario: duration_rounds must be >= 1");
                    }
                    if constexpr (std::is_same_v<T, SetLoss>) {
                        if (a.rate && !(*a.rate >= 0.0 && *a.rate <= 1.0)) fail("scenario: loss rate must lie in [0, 1]");
                    }
                }
            },
            ev.action);
    }
}

Summary summarize(const std::vector<RoundTrace>& traces, const ExperimentConfig& cfg) {
    Summary s;
    s.run_id = cfg.run_id();
    s.controller = std::string(to_string(cfg.controller));
    s.seed = cfg.seed;
    s.rounds = traces.size();
    s.scenario = cfg.scenario_name;
    double e2e = 0.0, ap = 0.0, ar = 0.0;
    std::uint64_t ok = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        if (t.timeout) {
            ++s.timeouts;
            if (i + 1 < traces.size() && traces[i + 1].timeout) {
                ++s.consec_timeouts;
            }
            continue;
        }
        ++ok;
        e2e += static_cast<double>(t.delivered_at.value_or(Elapsed{}).count());
        ap += t.ap;
        ar += t.ar;
    }
    if (ok > 0) {
        s.mean_e2e_us = e2e / static_cast<double>(ok);
        s.mean_ap = ap / static_cast<double>(ok);
        s.mean_ar = ar / static_cast<double>(ok);
    }
    return s;
}

namespace {

std::string state_name(const RunState& s) {
    return is_overrun(s) ? "overrun" : "on_time";
}

class Pipeline {
public:
    explicit Pipeline(const ExperimentConfig& cfg);
    ExperimentResult run();

private:
    struct Round {
        MessageHeader header;
        std::optional<resilience::BackupTask> backup;
        bool resolved = false;
        bool expiry_deferred = false;
        bool sor_entered = false;
        std::optional<Elapsed> d1;
        double result_ap = 0.0;
        double result_ar = 0.0;
    };
    struct ActiveSpike {
        std::string nic;
        Elapsed value;
        std::uint64_t until;
        std::optional<sim::Direction> direction;
    };
    struct ActiveCompute {
        Elapsed value;
        std::uint64_t until;
    };

    bool interneuron() const { return cfg_.controller == ControllerKind::Interneuron; }
    bool backup_enabled() const { return interneuron() && cfg_.resilience.backup; }

    std::string pick_baseline_nic() const;
    void apply_scenario(std::uint64_t r);
    void start_round(std::uint64_t r);
    void send_frame(std::uint64_t r, const policy::Assignment& a);
    void on_frame_arrival(std::uint64_t r, const PayloadDescriptor& payload);
    void checkpoint1(std::uint64_t r, const PayloadDescriptor& frame);
    void checkpoint2(std::uint64_t r);
    void on_result_arrival(std::uint64_t r, const PayloadDescriptor& payload);
    void on_e2e_deadline(std::uint64_t r);
    void resolve(std::uint64_t r, std::optional<resilience::RemoteResult> remote);
    std::size_t budget_level(Elapsed theta1) const;
    void note_drop(std::uint64_t r, const policy::Dropped& d);
    void log(std::string line);

    const ExperimentConfig& cfg_;
    sim::EventLoop loop_;
    sim::Network net_;
    net::NicRegistry registry_;
    std::unique_ptr<policy::Policy> policy_;
    rt::TimingState sov_timing_;
    rt::TimingState sor_timing_;
    resilience::XState xstate_;
    resilience::BackupLauncher backups_;
    policy::FragmentMerger sor_merger_;
    policy::FragmentMerger sov_merger_;
    sim::TrueTime sor_compute_free_;
    std::string baseline_nic_;

    std::vector<Round> rounds_;
    std::vector<RoundTrace> traces_;
    bool next_indicator_ = true;

    std::map<std::uint64_t, std::vector<ScenarioAction>> events_;
    std::vector<ActiveSpike> spikes_;
    std::vector<ActiveCompute> compute_delays_;
    Elapsed compute_extra_{};
    std::map<std::string, double> profile_loss_;
    std::vector<std::string> log_;
};

constexpr std::int64_t kRunStartMicros = 1'000'000;

Pipeline::Pipeline(const ExperimentConfig& cfg)
    : cfg_(cfg),
      loop_(sim::TrueTime(kRunStartMicros)),
      net_(loop_, cfg.seed),
      registry_(cfg.nature_window),
      sor_compute_free_(kRunStartMicros) {
    cfg_.validate();
    net_.set_header_overhead(cfg.header_overhead_bytes);
    net_.enable_event_log(cfg.record_event_log);
    net_.add_node(kOriginNode, sim::ClockModel{cfg.origin_offset, {}});
    net_.add_node(kRemoteNode, sim::ClockModel{cfg.remote_offset, cfg.remote_drift});

    std::map<std::string, sim::LatencyProfile> profiles;
    for (const auto& p : cfg.profiles) {
        profiles.emplace(p.name, p);
    }
    for (const auto& n : cfg.nics) {
        sim::LatencyProfile p = profiles.at(n.profile);
        const BytesPerSecond cap = n.capacity.value_or(p.capacity);
        profile_loss_[n.id] = p.loss_rate;
        net::NicDescriptor d;
        d.nic_id = n.id;
        d.nature = nominal_nature(p, cap, n.security);
        d.raw_capacity = cap;
        d.profile_ref = n.profile;
        d.overrides = n.overrides;
        registry_.register_nic(std::move(d));
        net_.add_nic(n.id, std::move(p));
    }

    sov_timing_.k = sor_timing_.k = cfg.rt.k;
    sov_timing_.d3 = sor_timing_.d3 = cfg.rt.d3;
    sov_timing_.beta = sor_timing_.beta = cfg.rt.beta;
    xstate_.x = cfg.rt.initial_x;

    if (interneuron()) {
        policy_ = policy::make_policy(cfg.policy_name, cfg.policy);
    } else {
        baseline_nic_ = pick_baseline_nic();
        policy_ = std::make_unique<policy::PassthroughPolicy>(baseline_nic_);
    }

    std::vector<std::string> nic_ids;
    for (const auto& n : cfg.nics) {
        nic_ids.push_back(n.id);
    }
    for (const auto& ev : cfg.scenario) {
        events_[ev.at_round].push_back(ev.action);
    }
    for (const auto& ev : expand_random_injection(cfg.random, nic_ids, cfg.rounds, cfg.seed)) {
        events_[ev.at_round].push_back(ev.action);
    }
}

std::string Pipeline::pick_baseline_nic() const {
    if (cfg_.baseline_nic) {
        return *cfg_.baseline_nic;
    }
    net::NatureRequirement req;
    if (cfg_.qos.min_bandwidth > 0) {
        req.min_bandwidth = net::bandwidth_score(cfg_.qos.min_bandwidth);
    }
    req.rank_by = net::NatureField::Delay;
    req.count = 1;
    return registry_.select_nics(req).front();
}

void Pipeline::log(std::string line) {
    if (cfg_.record_event_log) {
        log_.push_back(std::move(line));
    }
}

void Pipeline::apply_scenario(std::uint64_t r) {
    std::erase_if(spikes_, [r](const ActiveSpike& s) { return s.until <= r; });
    std::erase_if(compute_delays_, [r](const ActiveCompute& c) { return c.until <= r; });
    if (auto it = events_.find(r); it != events_.end()) {
        for (const auto& action : it->second) {
            std::visit(
                [&](const auto& a) {
                    using T = std::decay_t<decltype(a)>;
                    if constexpr (std::is_same_v<T, SetBaseLatency>) {
                        net_.set_base_latency(a.nic, a.value);
                    } else if constexpr (std::is_same_v<T, AddSpike>) {
                        spikes_.push_back({a.nic, a.value, r + a.duration_rounds, a.direction});
                    } else if constexpr (std::is_same_v<T, SetLoss>) {
                        net_.set_loss(a.nic, a.rate.value_or(profile_loss_.at(a.nic)));
                    } else if constexpr (std::is_same_v<T, SetOffset>) {
                        net_.set_offset(a.node, a.value);
                    } else if constexpr (std::is_same_v<T, AddComputeDelay>) {
                        compute_delays_.push_back({a.value, r + a.duration_rounds});
                    }
                },
                action);
        }
    }
    for (const auto& n : cfg_.nics) {
        for (const auto dir : {sim::Direction::Uplink, sim::Direction::Downlink}) {
            Elapsed extra{};
            for (const auto& s : spikes_) {
                if (s.nic == n.id && (!s.direction || *s.direction == dir)) {
                    extra += s.value;
                }
            }
            net_.set_extra_latency(n.id, dir, extra);
        }
    }
    compute_extra_ = Elapsed{};
    for (const auto& c : compute_delays_) {
        compute_extra_ += c.value;
    }
}

void Pipeline::start_round(std::uint64_t r) {
    apply_scenario(r);
    Round& R = rounds_[r];
    RoundTrace& T = traces_[r];
    T.round_id = r;
    T.controller = std::string(to_string(cfg_.controller));
    T.warmup = r < cfg_.rt.warmup_rounds;
    T.backup_enabled = backup_enabled();
    T.d3 = cfg_.rt.d3;

    const Timestamp t0 = net_.now(kOriginNode);
    T.t0_us = t0.micros();
    const bool indicator = next_indicator_;
    T.indicator = indicator;

    rt::TransmitDirective directive = rt::TransmitDirective::Full;
    Ratio x{};
    if (interneuron()) {
        rt::update_base(sov_timing_, 3, indicator);
        const auto& base3 = sov_timing_.at(3).base;
        if (xstate_.pinned) {
            x = xstate_.x;
        } else if (!T.warmup && base3) {
            x = rt::compute_x(*base3, cfg_.rt.d3, cfg_.rt.beta);
        } else {
            x = cfg_.rt.initial_x;
        }
        xstate_.x = x;
        T.x = x;
        T.x_before = x;
        if (resilience::take_force_sampled(xstate_)) {
            directive = rt::TransmitDirective::ReduceTime;
            T.force_sampled = true;
        }
        if (backup_enabled()) {
            const auto& lowest = cfg_.quality_table.back();
            R.backup = backups_.start_backup(r, t0, cfg_.quality_table.size() - 1, cfg_.resilience.backup_service_time,
                                             lowest.ap, lowest.ar);
            T.backup_done = R.backup->completes_at - t0;
            log(fmt::format("{} round {} backup level={} t0={} done={}", loop_.now().micros(), r, R.backup->quality_index,
                            t0.micros(), R.backup->completes_at.micros()));
        }
    }

    PayloadDescriptor raw;
    raw.kind = PayloadKind::RawFrame;
    raw.size_bytes = cfg_.raw_frame_bytes;

    R.header.round_id = r;
    R.header.t0 = t0;
    R.header.indicator = indicator;
    R.header.x = x;
    R.header.qos = cfg_.qos;
    R.header.qos.max_e2e_deadline = cfg_.rt.d3;
    R.header.payload = raw;

    const auto plan = policy_->plan_send(R.header.qos, directive, registry_, raw);
    R.header.mode = plan.mode;
    T.transmit_mode = std::string(to_string(plan.mode));
    T.single_nic = plan.single_nic;
    log(fmt::format("{} round {} start t0={} x={} mode={}", loop_.now().micros(), r, t0.micros(), x.str(),
                    T.transmit_mode));
    for (const auto& a : plan.assignments) {
        send_frame(r, a);
    }
    net_.schedule_at_local(kOriginNode, t0 + cfg_.rt.d3, [this, r] { on_e2e_deadline(r); });
}

void Pipeline::send_frame(std::uint64_t r, const policy::Assignment& a) {
    auto observed = std::make_shared<std::optional<Elapsed>>();
    const std::string nic = a.nic_id;
    const PayloadDescriptor payload = a.payload;
    const auto transit = net_.schedule_delivery(nic, sim::Direction::Uplink, payload.size_bytes,
                                                [this, r, nic, payload, observed] {
                                                    registry_.observe(nic, *observed);
                                                    on_frame_arrival(r, payload);
                                                });
    if (transit.arrives_at) {
        *observed = transit.observed_latency;
    } else {
        loop_.schedule_at(transit.sent_at + cfg_.rt.d3, [this, nic] { registry_.observe(nic, std::nullopt); });
    }
}

void Pipeline::on_frame_arrival(std::uint64_t r, const PayloadDescriptor& payload) {
    Round& R = rounds_[r];
    const auto current = sor_merger_.current_round();
    if (!R.sor_entered && (!current || r > *current)) {
        R.sor_entered = true;
        if (interneuron()) {
            rt::update_base(sor_timing_, 1, R.header.indicator);
            if (const auto& base1 = sor_timing_.at(1).base) {
                R.d1 = rt::deadline(cfg_.rt.deadline_form, R.header.x, *base1, cfg_.rt.d3);
            }
        }
    }
    const Timestamp now = net_.now(kRemoteNode);
    // Without a reference yet, wait for the raw frame at most d3 past the
    // sample's arrival (a local duration, so clock offsets cancel).
    const Elapsed hold = R.d1.value_or(elapsed_since(R.header.t0, now) + cfg_.rt.d3);
    const auto decision = sor_merger_.on_fragment({r, payload, R.header.mode}, hold);
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, policy::DeliverNow>) {
                checkpoint1(r, d.payload);
            } else if constexpr (std::is_same_v<T, policy::HoldUntil>) {
                net_.schedule_at_local(kRemoteNode, R.header.t0 + d.deadline, [this, r] {
                    if (auto held = sor_merger_.on_hold_expiry(r)) {
                        checkpoint1(r, std::get<policy::DeliverHeld>(*held).payload);
                    }
                });
            } else if constexpr (std::is_same_v<T, policy::Dropped>) {
                note_drop(r, d);
            }
        },
        decision);
}

void Pipeline::note_drop(std::uint64_t r, const policy::Dropped& d) {
    if (d.reason == policy::DropReason::Stale) {
        ++traces_[r].stale;
    } else if (d.reason == policy::DropReason::Duplicate) {
        ++traces_[r].duplicates;
    }
}

std::size_t Pipeline::budget_level(Elapsed theta1) const {
    const auto& prof = net_.profile(baseline_nic_);
    const Elapsed ret =
        prof.base_latency + sim::serialization_time(cfg_.result_bytes + cfg_.header_overhead_bytes, prof.capacity);
    const Elapsed remaining = cfg_.rt.d3 - theta1;
    for (std::size_t i = 0; i < cfg_.quality_table.size(); ++i) {
        if (cfg_.quality_table[i].service_time + ret <= remaining) {
            return i;
        }
    }
    return cfg_.quality_table.size() - 1;
}

void Pipeline::checkpoint1(std::uint64_t r, const PayloadDescriptor& frame) {
    Round& R = rounds_[r];
    RoundTrace& T = traces_[r];
    const Timestamp now = net_.now(kRemoteNode);
    const Elapsed theta1 = rt::record_checkpoint(sor_timing_, 1, R.header, now);
    T.theta1 = theta1;
    T.frame_kind = std::string(to_string(frame.kind));

    std::size_t level = 0;
    if (interneuron()) {
        const Elapsed base1 = *sor_timing_.at(1).base;
        T.num1 = theta1 - base1;
        T.d1 = R.d1;
        RunState state = OnTime{};
        if (!T.warmup && R.d1) {
            state = rt::judge(theta1, *R.d1, rt::overrun_normalizer(cfg_.rt.deadline_form, base1, cfg_.rt.d3));
        }
        T.state1 = state_name(state);
        if (const auto* o = std::get_if<Overrun>(&state)) {
            T.rho1 = o->rho;
        }
        level = rt::directive_for_compute(state, cfg_.quality_table.size(), cfg_.rt.rho1).quality_level_index;
    } else if (cfg_.controller == ControllerKind::ComputeOnlyAdaptive) {
        level = budget_level(theta1);
    }
    T.quality = level;

    const auto outcome = compute_service(cfg_.quality_table[level], frame);
    R.result_ap = outcome.ap;
    R.result_ar = outcome.ar;
    const sim::TrueTime start = std::max(loop_.now(), sor_compute_free_);
    const sim::TrueTime done = start + outcome.duration + compute_extra_;
    sor_compute_free_ = done;
    log(fmt::format("{} round {} checkpoint1 theta={} frame={} level={}", loop_.now().micros(), r, theta1.count(),
                    T.frame_kind, level));
    loop_.schedule_at(done, [this, r] { checkpoint2(r); });
}

void Pipeline::checkpoint2(std::uint64_t r) {
    Round& R = rounds_[r];
    RoundTrace& T = traces_[r];
    const Timestamp now = net_.now(kRemoteNode);
    std::optional<Elapsed> d2;
    if (interneuron()) {
        rt::update_base(sor_timing_, 2, R.header.indicator);
        if (const auto& base2 = sor_timing_.at(2).base) {
            d2 = rt::deadline(cfg_.rt.deadline_form, R.header.x, *base2, cfg_.rt.d3);
        }
    }
    const Elapsed theta2 = rt::record_checkpoint(sor_timing_, 2, R.header, now);
    T.theta2 = theta2;

    rt::TransmitDirective directive = rt::TransmitDirective::Full;
    if (interneuron()) {
        const Elapsed base2 = *sor_timing_.at(2).base;
        T.num2 = theta2 - base2;
        T.d2 = d2;
        RunState state = OnTime{};
        if (!T.warmup && d2) {
            state = rt::judge(theta2, *d2, rt::overrun_normalizer(cfg_.rt.deadline_form, base2, cfg_.rt.d3));
        }
        T.state2 = state_name(state);
        if (const auto* o = std::get_if<Overrun>(&state)) {
            T.rho2 = o->rho;
        }
        directive = rt::directive_for_transmit(state);
    }
    T.return_mode = std::string(rt::to_string(directive));

    PayloadDescriptor result;
    result.kind = PayloadKind::Result;
    result.size_bytes = cfg_.result_bytes;
    result.ap = R.result_ap;
    result.ar = R.result_ar;
    const auto plan = policy_->plan_reply(directive, registry_, result);
    log(fmt::format("{} round {} checkpoint2 theta={} return={}", loop_.now().micros(), r, theta2.count(),
                    T.return_mode));
    for (const auto& a : plan.assignments) {
        auto observed = std::make_shared<std::optional<Elapsed>>();
        const std::string nic = a.nic_id;
        const auto transit = net_.schedule_delivery(nic, sim::Direction::Downlink, a.payload.size_bytes,
                                                    [this, r, nic, payload = a.payload, observed] {
                                                        registry_.observe(nic, *observed);
                                                        on_result_arrival(r, payload);
                                                    });
        if (transit.arrives_at) {
            *observed = transit.observed_latency;
        } else {
            loop_.schedule_at(transit.sent_at + cfg_.rt.d3, [this, nic] { registry_.observe(nic, std::nullopt); });
        }
    }
}

void Pipeline::on_result_arrival(std::uint64_t r, const PayloadDescriptor& payload) {
    Round& R = rounds_[r];
    RoundTrace& T = traces_[r];
    const auto decision = sov_merger_.on_fragment({r, payload, TransmitMode::Normal}, Elapsed{});
    if (const auto* d = std::get_if<policy::Dropped>(&decision)) {
        note_drop(r, *d);
        return;
    }
    const Elapsed theta3 = elapsed_since(R.header.t0, net_.now(kOriginNode));
    T.remote_theta3 = theta3;
    if (R.resolved) {
        T.late_result = theta3;
        log(fmt::format("{} round {} late result theta3={} discarded", loop_.now().micros(), r, theta3.count()));
        if (!backup_enabled() && T.result_source == "none") {
            // Without a backup the application keeps waiting for the late result.
            T.result_source = "remote";
            T.payload_kind = std::string(to_string(payload.kind));
            T.ap = payload.ap;
            T.ar = payload.ar;
            T.delivered_at = theta3;
        }
        return;
    }
    resolve(r, resilience::RemoteResult{payload, theta3});
}

void Pipeline::on_e2e_deadline(std::uint64_t r) {
    Round& R = rounds_[r];
    if (R.resolved) {
        return;
    }
    if (!R.expiry_deferred) {
        // Let arrivals landing at exactly d3 run first: the boundary is on time.
        R.expiry_deferred = true;
        loop_.schedule_at(loop_.now(), [this, r] { on_e2e_deadline(r); });
        return;
    }
    resolve(r, std::nullopt);
}

void Pipeline::resolve(std::uint64_t r, std::optional<resilience::RemoteResult> remote) {
    Round& R = rounds_[r];
    RoundTrace& T = traces_[r];
    R.resolved = true;

    if (backup_enabled()) {
        const auto res = resilience::resolve_round(remote, *R.backup, cfg_.rt.d3, R.header.t0);
        T.timeout = res.timeout;
        T.result_source = std::string(resilience::to_string(res.source));
        T.payload_kind = std::string(to_string(res.payload.kind));
        T.ap = res.payload.ap;
        T.ar = res.payload.ar;
        T.delivered_at = res.delivered_at;
    } else if (remote && remote->theta3 <= cfg_.rt.d3) {
        T.timeout = false;
        T.result_source = "remote";
        T.payload_kind = std::string(to_string(remote->payload.kind));
        T.ap = remote->payload.ap;
        T.ar = remote->payload.ar;
        T.delivered_at = remote->theta3;
    } else {
        T.timeout = true;
        T.result_source = "none";
        T.payload_kind = "none";
    }

    if (interneuron()) {
        if (remote && !T.timeout) {
            const Elapsed theta3 = rt::record_checkpoint(sov_timing_, 3, R.header, R.header.t0 + remote->theta3);
            T.theta3 = theta3;
            T.num3 = theta3 - *sov_timing_.at(3).base;
        }
        if (cfg_.resilience.timeout_handler) {
            if (T.timeout) {
                resilience::on_timeout(xstate_);
            } else {
                resilience::on_round_success(xstate_, cfg_.resilience.recovery_step);
            }
        }
        T.x_after = xstate_.x;
    } else if (remote) {
        T.theta3 = remote->theta3;
    }
    next_indicator_ = !T.timeout;
    log(fmt::format("{} round {} resolved source={} timeout={}", loop_.now().micros(), r, T.result_source, T.timeout));
}

ExperimentResult Pipeline::run() {
    rounds_.assign(cfg_.rounds, Round{});
    traces_.assign(cfg_.rounds, RoundTrace{});
    for (std::uint64_t r = 0; r < cfg_.rounds; ++r) {
        const sim::TrueTime at(kRunStartMicros + static_cast<std::int64_t>(r) * cfg_.frame_period.count());
        loop_.schedule_at(at, [this, r] { start_round(r); });
    }
    loop_.run();

    ExperimentResult out;
    out.traces = std::move(traces_);
    out.summary = summarize(out.traces, cfg_);
    if (cfg_.record_event_log) {
        out.event_log = net_.event_log();
        out.event_log.insert(out.event_log.end(), log_.begin(), log_.end());
    }
    spdlog::debug("{}: {} rounds, {} timeouts", out.summary.run_id, out.summary.rounds, out.summary.timeouts);
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    Pipeline p(cfg);
    return p.run();
}

}  // namespace interneuron::harness
