#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "interneuron/net/registry.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <thread>

using namespace interneuron;
using namespace interneuron::net;

namespace {

NicDescriptor nic(const std::string& id, Nature n, BytesPerSecond cap = 1'000'000) {
    NicDescriptor d;
    d.nic_id = id;
    d.nature = n;
    d.raw_capacity = cap;
    return d;
}

// Fixes every field, so the registry's answer depends on the Nature alone.
NicDescriptor fixed(const std::string& id, Nature n) {
    auto d = nic(id, n);
    d.overrides = {n.delay, n.bandwidth, n.reliability, n.security};
    return d;
}

}  // namespace

TEST_CASE("register and enumerate") {
    NicRegistry r;
    r.register_nic(nic("net4g", {}));
    r.register_nic(nic("net5g", {}));
    CHECK(r.enumerate() == std::vector<std::string>{"net4g", "net5g"});
    CHECK(r.size() == 2);
}

TEST_CASE("registration errors") {
    NicRegistry r;
    r.register_nic(nic("net4g", {}));
    CHECK_THROWS_AS(r.register_nic(nic("net4g", {})), DuplicateNic);
    CHECK_THROWS_AS(r.register_nic(nic("zero", {}, 0)), RegistryError);
    CHECK_THROWS_AS(r.register_nic(nic("", {})), RegistryError);
    CHECK(r.size() == 1);
    CHECK_THROWS_AS(r.nature("nope"), RegistryError);
    CHECK_THROWS_AS(r.observe("nope", ms(1)), RegistryError);
    CHECK_THROWS_AS(NicRegistry(0), ContractError);
}

TEST_CASE("scores rank 5G above 4G on delay and reliability") {
    const auto g4 = score_from_stats(ms(173), ms(258), 0.0, 2'500'000);
    const auto g5 = score_from_stats(ms(26), ms(12), 0.0, 2'500'000);
    CHECK(g5.delay > g4.delay);
    CHECK(g5.reliability > g4.reliability);
}

TEST_CASE("scoring is deterministic and monotone") {
    CHECK(score_from_stats(ms(40), ms(10), 0.1, 1'000'000) == score_from_stats(ms(40), ms(10), 0.1, 1'000'000));
    CHECK(bandwidth_score(2'000'000) > bandwidth_score(1'000'000));
    CHECK(bandwidth_score(100'000) == 0.0);
    CHECK(bandwidth_score(10'000'000'000) == 100.0);
    CHECK(bandwidth_score(0) == 0.0);
    for (int m = 0; m < 500; m += 7) {
        CHECK(score_from_stats(ms(m + 1), {}, 0, 1).delay < score_from_stats(ms(m), {}, 0, 1).delay);
        CHECK(score_from_stats(ms(10), ms(m + 1), 0, 1).reliability <
              score_from_stats(ms(10), ms(m), 0, 1).reliability);
    }
    CHECK(score_from_stats(ms(10), {}, 0.5, 1).reliability < score_from_stats(ms(10), {}, 0.1, 1).reliability);
    const auto zero = score_from_stats({}, {}, 0, 1);
    CHECK(zero.delay == doctest::Approx(100.0));
    CHECK(zero.reliability == doctest::Approx(100.0));
}

TEST_CASE("nature switches from descriptor to measured and honors overrides") {
    NicRegistry r(3);
    auto d = nic("a", {10, 20, 30, 40}, 1'000'000);
    d.overrides.security = 77;
    r.register_nic(d);
    CHECK(r.nature("a") == Nature{10, 20, 30, 77});

    r.observe("a", ms(20));
    const auto measured = score_from_stats(ms(20), {}, 0.0, 1'000'000);
    CHECK(r.nature("a").delay == doctest::Approx(measured.delay));
    CHECK(r.nature("a").bandwidth == doctest::Approx(measured.bandwidth));
    CHECK(r.nature("a").security == 77);

    // The window keeps only the latest three samples.
    r.observe("a", ms(20));
    r.observe("a", ms(20));
    r.observe("a", std::nullopt);
    const auto lossy = score_from_stats(ms(20), {}, 1.0 / 3.0, 1'000'000);
    CHECK(r.nature("a").reliability == doctest::Approx(lossy.reliability));

    NicRegistry all_lost(2);
    all_lost.register_nic(nic("b", {50, 50, 50, 50}));
    all_lost.observe("b", std::nullopt);
    CHECK(all_lost.nature("b").delay == 0.0);
    CHECK(all_lost.nature("b").reliability == 0.0);
}

TEST_CASE("select_nics examples") {
    NicRegistry r;
    r.register_nic(fixed("net4g", {40, 60, 50, 50}));
    r.register_nic(fixed("net5g", {70, 80, 60, 50}));
    r.register_nic(fixed("netlocal", {90, 20, 90, 50}));
    NatureRequirement req;
    req.min_bandwidth = 30;
    req.count = 2;
    CHECK(r.select_nics(req) == std::vector<std::string>{"net5g", "net4g"});

    NicRegistry one;
    one.register_nic(fixed("only", {1, 1, 1, 1}));
    CHECK(one.select_nics({}) == std::vector<std::string>{"only"});

    NatureRequirement secure;
    secure.min_security = 99;
    CHECK_THROWS_AS(r.select_nics(secure), NoMatchingNic);
    CHECK_THROWS_AS(NicRegistry().select_nics({}), EmptyRegistry);

    NatureRequirement zero;
    zero.count = 0;
    CHECK_THROWS_AS(r.select_nics(zero), ContractError);
}

TEST_CASE("empty-registry and no-match errors are distinct") {
    bool empty_is_nomatch = false;
    try {
        NicRegistry().select_nics({});
    } catch (const NoMatchingNic&) {
        empty_is_nomatch = true;
    } catch (const EmptyRegistry&) {
    }
    CHECK_FALSE(empty_is_nomatch);
}

TEST_CASE("ties break by nic_id") {
    NicRegistry r;
    r.register_nic(fixed("b", {50, 50, 50, 50}));
    r.register_nic(fixed("a", {50, 50, 50, 50}));
    r.register_nic(fixed("c", {50, 50, 50, 50}));
    NatureRequirement req;
    req.count = 2;
    CHECK(r.select_nics(req) == std::vector<std::string>{"a", "b"});
}

namespace {

struct Candidate {
    std::string id;
    Nature n;
};

bool qualifies(const Nature& n, const NatureRequirement& q) {
    auto ok = [](const std::optional<double>& f, double v) { return !f || v >= *f; };
    return ok(q.min_delay, n.delay) && ok(q.min_bandwidth, n.bandwidth) && ok(q.min_reliability, n.reliability) &&
           ok(q.min_security, n.security);
}

// Exhaustive oracle: among all subsets of qualifying NICs of the expected
// size, exactly one dominates every excluded NIC under (score desc, id asc).
std::vector<std::string> oracle(const std::vector<Candidate>& all, const NatureRequirement& q) {
    std::vector<Candidate> ok;
    for (const auto& c : all) {
        if (qualifies(c.n, q)) ok.push_back(c);
    }
    const std::size_t m = std::min(q.count, ok.size());
    auto before = [&](const Candidate& a, const Candidate& b) {
        const double sa = field(a.n, q.rank_by), sb = field(b.n, q.rank_by);
        return sa > sb || (sa == sb && a.id < b.id);
    };
    std::vector<std::vector<std::string>> winners;
    for (std::uint32_t mask = 0; mask < (1u << ok.size()); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
        bool dominates = true;
        for (std::size_t i = 0; i < ok.size() && dominates; ++i) {
            if (!(mask >> i & 1)) continue;
            for (std::size_t j = 0; j < ok.size(); ++j) {
                if (!(mask >> j & 1) && before(ok[j], ok[i])) {
                    dominates = false;
                    break;
                }
            }
        }
        if (!dominates) continue;
        std::vector<Candidate> picked;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            if (mask >> i & 1) picked.push_back(ok[i]);
        }
        std::sort(picked.begin(), picked.end(), before);
        std::vector<std::string> ids;
        for (const auto& p : picked) ids.push_back(p.id);
        winners.push_back(ids);
    }
    REQUIRE(winners.size() == 1);
    return winners.front();
}

}  // namespace

TEST_CASE("select_nics matches an exhaustive oracle and its properties hold") {
    std::mt19937_64 rng(2024);
    // Coarse score grid so ties are common.
    std::uniform_int_distribution<int> score(0, 10), size(1, 7), cnt(1, 4), fld(0, 3), coin(0, 2);
    for (int iter = 0; iter < 500; ++iter) {
        NicRegistry r;
        std::vector<Candidate> all;
        const int n = size(rng);
        for (int i = 0; i < n; ++i) {
            const Nature nat{score(rng) * 10.0, score(rng) * 10.0, score(rng) * 10.0, score(rng) * 10.0};
            const std::string id = "nic" + std::to_string(i);
            r.register_nic(fixed(id, nat));
            all.push_back({id, nat});
        }
        NatureRequirement q;
        q.count = static_cast<std::size_t>(cnt(rng));
        q.rank_by = static_cast<NatureField>(fld(rng));
        if (coin(rng) == 0) q.min_delay = score(rng) * 10.0;
        if (coin(rng) == 0) q.min_bandwidth = score(rng) * 10.0;
        if (coin(rng) == 0) q.min_reliability = score(rng) * 10.0;

        const bool any = std::any_of(all.begin(), all.end(), [&](const Candidate& c) { return qualifies(c.n, q); });
        if (!any) {
            CHECK_THROWS_AS(r.select_nics(q), NoMatchingNic);
            continue;
        }
        const auto got = r.select_nics(q);
        CHECK(got == oracle(all, q));
        CHECK(got.size() <= q.count);
        CHECK(std::set<std::string>(got.begin(), got.end()).size() == got.size());
        const auto ids = r.enumerate();
        for (const auto& g : got) CHECK(std::find(ids.begin(), ids.end(), g) != ids.end());
        CHECK(r.select_nics(q) == got);

        // Raising a floor never enlarges the result.
        auto raised = q;
        raised.min_delay = q.min_delay.value_or(0) + 10;
        std::size_t raised_size = 0;
        try {
            raised_size = r.select_nics(raised).size();
        } catch (const NoMatchingNic&) {
        }
        CHECK(raised_size <= got.size());
    }
}

TEST_CASE("concurrent readers and writers see consistent snapshots") {
    NicRegistry r(20);
    r.register_nic(nic("a", {50, 50, 50, 50}));
    r.register_nic(nic("b", {50, 50, 50, 50}));
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 2000; ++i) {
                if (t % 2) {
                    r.observe(t == 1 ? "a" : "b", ms(i % 50));
                } else {
                    NatureRequirement q;
                    q.count = 2;
                    const auto got = r.select_nics(q);
                    if (got.size() != 2) throw std::runtime_error("bad selection");
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(r.size() == 2);
}
