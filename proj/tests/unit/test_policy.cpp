#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "interneuron/policy/policy.hpp"

#include <random>

using namespace interneuron;
using namespace interneuron::policy;

namespace {

net::NicDescriptor fixed(const std::string& id, double delay, double bw, double sec = 50) {
    net::NicDescriptor d;
    d.nic_id = id;
    d.raw_capacity = 1'000'000;
    d.nature = {delay, bw, 50, sec};
    d.overrides = {delay, bw, 50.0, sec};
    return d;
}

PayloadDescriptor raw(Bytes size = 512'000) {
    PayloadDescriptor p;
    p.kind = PayloadKind::RawFrame;
    p.size_bytes = size;
    return p;
}

PayloadDescriptor sampled() { return downsample(raw(), {}); }

void add_two(net::NicRegistry& r) {
    r.register_nic(fixed("A", 80, 40));
    r.register_nic(fixed("B", 60, 90));
}

}  // namespace

TEST_CASE("downsample") {
    const auto s = downsample(raw(), {});
    CHECK(s.kind == PayloadKind::SampledFrame);
    CHECK(s.size_bytes == 128'000);
    CHECK(s.accuracy_factor == Ratio::parse("0.94"));

    PolicyConfig identity;
    identity.sampling_ratio = ratio_one();
    const auto same = downsample(raw(), identity);
    CHECK(same.size_bytes == 512'000);
    CHECK(same.kind == PayloadKind::SampledFrame);

    CHECK_THROWS_AS(downsample(raw(0), {}), ContractError);
    CHECK_THROWS_AS(downsample(s, {}), ContractError);
    PolicyConfig bad;
    bad.sampling_ratio = Ratio{};
    CHECK_THROWS_AS(downsample(raw(), bad), ContractError);
}

TEST_CASE("down-sampling send plans") {
    net::NicRegistry reg;
    add_two(reg);
    const DownSamplingPolicy p;
    const auto normal = p.plan_send({}, rt::TransmitDirective::Full, reg, raw());
    CHECK(normal.mode == TransmitMode::Normal);
    CHECK_FALSE(normal.single_nic);
    REQUIRE(normal.assignments.size() == 2);
    CHECK(normal.assignments[0] == Assignment{"B", raw()});
    CHECK(normal.assignments[1] == Assignment{"A", sampled()});

    const auto reduce = p.plan_send({}, rt::TransmitDirective::ReduceTime, reg, raw());
    CHECK(reduce.mode == TransmitMode::DegradedSampledOnly);
    REQUIRE(reduce.assignments.size() == 2);
    for (const auto& a : reduce.assignments) CHECK(a.payload == sampled());

    net::NicRegistry one;
    one.register_nic(fixed("solo", 50, 50));
    const auto single = p.plan_send({}, rt::TransmitDirective::Full, one, raw());
    CHECK(single.single_nic);
    REQUIRE(single.assignments.size() == 1);
    CHECK(single.assignments[0] == Assignment{"solo", raw()});
}

TEST_CASE("qos floors filter NICs before assignment") {
    net::NicRegistry r;
    r.register_nic(fixed("fast-narrow", 90, 10));
    r.register_nic(fixed("slow-wide", 40, 90));
    r.register_nic(fixed("mid", 60, 70, 10));
    const DownSamplingPolicy p;

    QosRequirement q;
    q.min_bandwidth = 10'000'000;  // score 50
    const auto plan = p.plan_send(q, rt::TransmitDirective::Full, r, raw());
    for (const auto& a : plan.assignments) {
        CHECK(a.nic_id != "fast-narrow");
        if (a.payload.kind == PayloadKind::RawFrame) {
            CHECK(r.nature(a.nic_id).bandwidth >= net::bandwidth_score(q.min_bandwidth));
        }
    }

    q.security_floor = 40;
    const auto secure = p.plan_send(q, rt::TransmitDirective::Full, r, raw());
    REQUIRE(secure.assignments.size() == 1);
    CHECK(secure.assignments[0].nic_id == "slow-wide");

    q.security_floor = 99;
    CHECK_THROWS_AS(p.plan_send(q, rt::TransmitDirective::Full, r, raw()), net::NoMatchingNic);
}

TEST_CASE("reply plans") {
    net::NicRegistry reg;
    add_two(reg);
    const DownSamplingPolicy p;
    PayloadDescriptor result;
    result.kind = PayloadKind::Result;
    result.size_bytes = 5'000;
    const auto full = p.plan_reply(rt::TransmitDirective::Full, reg, result);
    REQUIRE(full.assignments.size() == 1);
    CHECK(full.assignments[0].nic_id == "A");
    const auto both = p.plan_reply(rt::TransmitDirective::ReduceTime, reg, result);
    CHECK(both.assignments.size() == 2);
    CHECK(both.mode == TransmitMode::DegradedSampledOnly);
}

TEST_CASE("passthrough") {
    net::NicRegistry reg;
    add_two(reg);
    const PassthroughPolicy best;
    const auto plan = best.plan_send({}, rt::TransmitDirective::ReduceTime, reg, raw());
    REQUIRE(plan.assignments.size() == 1);
    CHECK(plan.assignments[0] == Assignment{"A", raw()});
    CHECK(plan.single_nic);

    const PassthroughPolicy pinned("B");
    CHECK(pinned.plan_send({}, rt::TransmitDirective::Full, reg, raw()).assignments[0].nic_id == "B");
    CHECK(pinned.plan_reply(rt::TransmitDirective::ReduceTime, reg, raw()).assignments.size() == 1);

    CHECK(make_policy("down_sampling", {})->name() == "down_sampling");
    CHECK(make_policy("passthrough", {})->name() == "passthrough");
    CHECK_THROWS_AS(make_policy("flood", {}), std::invalid_argument);
}

namespace {

struct Delivery {
    PayloadKind kind;
    Elapsed at;
};

// Replays fragment arrivals (nullopt = lost) through a merger, firing the hold
// timer at the deadline the merger asks for.
std::vector<Delivery> replay(std::optional<Elapsed> raw_at, std::optional<Elapsed> sampled_at, Elapsed d,
                             TransmitMode mode, std::uint64_t round = 1) {
    FragmentMerger m;
    struct Ev {
        Elapsed at;
        int what;  // 0 raw, 1 sampled, 2 hold expiry
    };
    std::vector<Ev> evs;
    if (raw_at && mode == TransmitMode::Normal) evs.push_back({*raw_at, 0});
    if (sampled_at) evs.push_back({*sampled_at, 1});
    std::stable_sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.at < b.at; });
    std::vector<Delivery> out;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const auto e = evs[i];
        if (e.what == 2) {
            if (auto dec = m.on_hold_expiry(round)) {
                out.push_back({std::get<DeliverHeld>(*dec).payload.kind, e.at});
            }
            continue;
        }
        const auto payload = e.what == 0 ? raw() : sampled();
        const auto dec = m.on_fragment({round, payload, mode}, d);
        if (const auto* now = std::get_if<DeliverNow>(&dec)) {
            out.push_back({now->payload.kind, e.at});
        } else if (const auto* hold = std::get_if<HoldUntil>(&dec)) {
            // Insert the expiry in time order; a past deadline fires at once.
            const Ev ex{std::max(hold->deadline, e.at), 2};
            auto pos = std::upper_bound(evs.begin() + static_cast<std::ptrdiff_t>(i) + 1, evs.end(), ex,
                                        [](const Ev& a, const Ev& b) { return a.at < b.at; });
            evs.insert(pos, ex);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("merge examples") {
    auto r = replay(ms(55), ms(40), ms(60), TransmitMode::Normal);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == PayloadKind::RawFrame);
    CHECK(r[0].at == ms(55));

    r = replay(ms(70), ms(40), ms(60), TransmitMode::Normal);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == PayloadKind::SampledFrame);
    CHECK(r[0].at == ms(60));

    r = replay(std::nullopt, ms(35), ms(60), TransmitMode::DegradedSampledOnly);
    REQUIRE(r.size() == 1);
    CHECK(r[0].kind == PayloadKind::SampledFrame);
    CHECK(r[0].at == ms(35));

    // A lost raw frame behaves like an infinitely late one.
    r = replay(std::nullopt, ms(40), ms(60), TransmitMode::Normal);
    REQUIRE(r.size() == 1);
    CHECK(r[0].at == ms(60));
}

TEST_CASE("merge invariants over random arrival orders") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::int64_t> t(0, 150'000);
    std::uniform_int_distribution<int> lost(0, 4);
    for (int i = 0; i < 2000; ++i) {
        const Elapsed d(t(rng));
        std::optional<Elapsed> ra = Elapsed(t(rng)), sa = Elapsed(t(rng));
        if (lost(rng) == 0) ra.reset();
        if (lost(rng) == 0) sa.reset();
        if (!ra && !sa) continue;
        const auto out = replay(ra, sa, d, TransmitMode::Normal);
        REQUIRE(out.size() == 1);
        const Elapsed first = std::min(ra.value_or(Elapsed::max()), sa.value_or(Elapsed::max()));
        CHECK(out[0].at <= std::max(first, d));
        if (ra && sa && *ra <= d && *sa <= d) CHECK(out[0].kind == PayloadKind::RawFrame);
        if (ra && *ra <= d) CHECK(out[0].kind == PayloadKind::RawFrame);
    }
}

TEST_CASE("stale, duplicate and already-delivered fragments are dropped") {
    FragmentMerger m;
    CHECK(std::holds_alternative<DeliverNow>(m.on_fragment({5, raw(), TransmitMode::Normal}, ms(10))));
    CHECK(std::get<Dropped>(m.on_fragment({5, raw(), TransmitMode::Normal}, ms(10))).reason ==
          DropReason::Duplicate);
    CHECK(std::get<Dropped>(m.on_fragment({5, sampled(), TransmitMode::Normal}, ms(10))).reason ==
          DropReason::AlreadyDelivered);
    CHECK(std::get<Dropped>(m.on_fragment({4, raw(), TransmitMode::Normal}, ms(10))).reason == DropReason::Stale);
    CHECK(m.stale_count() == 1);
    CHECK(m.duplicate_count() == 1);

    // A new round resets the state; an expiry for an old round is ignored.
    CHECK(std::holds_alternative<HoldUntil>(m.on_fragment({6, sampled(), TransmitMode::Normal}, ms(10))));
    CHECK_FALSE(m.on_hold_expiry(5).has_value());
    CHECK(m.on_hold_expiry(6).has_value());
    CHECK_FALSE(m.on_hold_expiry(6).has_value());
    CHECK(m.current_round() == 6u);
    CHECK(m.delivered());
}
