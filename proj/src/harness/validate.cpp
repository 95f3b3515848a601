#include "interneuron/harness/validate.hpp"

#include "interneuron/resilience/resilience.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace interneuron::harness {

namespace {

std::string us_str(const std::optional<Elapsed>& d) {
    return d ? std::to_string(d->count()) : "null";
}

std::string ratio_str(const std::optional<Ratio>& r) {
    return r ? r->str() : "null";
}

struct Checker {
    const ValidateOptions& opt;
    std::vector<Violation> out;

    void fail(std::optional<std::uint64_t> round, const char* inv, std::string detail) {
        out.push_back({round, inv, std::move(detail)});
    }

    void results(const std::vector<RoundTrace>& ts) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& t = ts[i];
            if (t.round_id != i) {
                fail(t.round_id, "one_result_per_round", fmt::format("record {} has round_id {}", i, t.round_id));
            }
            const auto& src = t.result_source;
            if (src != "remote" && src != "backup" && src != "none") {
                fail(t.round_id, "one_result_per_round", fmt::format("unknown result_source '{}'", src));
                continue;
            }
            if (src == "backup" && !t.timeout) {
                fail(t.round_id, "one_result_per_round", "backup delivered on a round that met d3");
            }
            if (!t.timeout && src != "remote") {
                fail(t.round_id, "one_result_per_round", "on-time round without a remote result");
            }
            if (src != "none" && !t.delivered_at) {
                fail(t.round_id, "one_result_per_round", "result delivered without delivered_at");
            }
            if (t.backup_enabled) {
                if (src == "none") {
                    fail(t.round_id, "liveness", "no result delivered");
                } else if (t.delivered_at && t.d3) {
                    const Elapsed limit = std::max(*t.d3, t.backup_done.value_or(*t.d3));
                    if (*t.delivered_at > limit) {
                        fail(t.round_id, "liveness",
                             fmt::format("delivered at {}us, bound {}us", t.delivered_at->count(), limit.count()));
                    }
                }
            }
        }
    }

    void boundary(const RoundTrace& t) {
        auto check = [&](int n, const std::optional<Elapsed>& theta, const std::optional<Elapsed>& d,
                         const std::string& state, const std::optional<Ratio>& rho) {
            if (state.empty()) return;
            if (state != "on_time" && state != "overrun") {
                fail(t.round_id, "boundary", fmt::format("checkpoint {}: unknown state '{}'", n, state));
                return;
            }
            if (state == "overrun" && !(rho && *rho > Ratio{})) {
                fail(t.round_id, "boundary", fmt::format("checkpoint {}: overrun with rho {}", n, ratio_str(rho)));
            }
            if (t.warmup || !theta || !d) {
                if (state != "on_time") {
                    fail(t.round_id, "boundary", fmt::format("checkpoint {}: overrun without a deadline", n));
                }
                return;
            }
            const bool on_time = *theta <= *d;
            if (on_time != (state == "on_time")) {
                fail(t.round_id, "boundary",
                     fmt::format("checkpoint {}: theta {}us vs D {}us judged {}", n, theta->count(), d->count(),
                                 state));
            }
        };
        check(1, t.theta1, t.d1, t.state1, t.rho1);
        check(2, t.theta2, t.d2, t.state2, t.rho2);
        if (t.d3) {
            const bool met = t.remote_theta3 && *t.remote_theta3 <= *t.d3;
            if (met == t.timeout) {
                fail(t.round_id, "boundary",
                     fmt::format("checkpoint 3: remote {}us vs d3 {}us but timeout={}", us_str(t.remote_theta3),
                                 t.d3->count(), t.timeout));
            }
        }
    }

    void x_floor(const RoundTrace& t) {
        for (const auto* r : {&t.x, &t.x_before, &t.x_after}) {
            if (*r && **r < resilience::kMinX) {
                fail(t.round_id, "x_floor", fmt::format("x = {} < -1", (*r)->str()));
                return;
            }
        }
    }

    // The trace does not say whether the timeout handler ran, so infer it:
    // any x movement means it did, after which every rule must hold.
    static bool handler_active(const std::vector<RoundTrace>& ts) {
        return std::any_of(ts.begin(), ts.end(), [](const RoundTrace& t) {
            return t.x_before && t.x_after && *t.x_before != *t.x_after;
        });
    }

    void ladder(const std::vector<RoundTrace>& ts) {
        std::size_t qmax = 0;
        for (const auto& t : ts) {
            qmax = std::max(qmax, t.quality.value_or(0));
        }
        const bool handler = handler_active(ts);
        bool episode = false;
        std::size_t flips = 0;
        const RoundTrace* prev = nullptr;
        for (const auto& t : ts) {
            if (!t.x_before || !t.x_after) {
                prev = &t;
                continue;
            }
            const Ratio before = *t.x_before;
            const Ratio after = *t.x_after;
            // x is carried over (not recomputed) after a timeout and while negative.
            const bool carried = handler && prev && prev->x_after && (prev->timeout || *prev->x_after < Ratio{});
            if (carried && before != *prev->x_after) {
                fail(t.round_id, "recovery_ladder",
                     fmt::format("x_before {} does not continue previous x_after {}", before.str(),
                                 prev->x_after->str()));
            }
            if (episode && prev && !prev->timeout && !t.timeout && prev->quality && t.quality && qmax > 0) {
                const auto a = *prev->quality, b = *t.quality;
                if ((a == 0 && b == qmax) || (a == qmax && b == 0)) {
                    if (++flips > opt.max_flips_per_episode) {
                        fail(t.round_id, "quality_oscillation",
                             fmt::format("{} min/max quality flips in one recovery episode", flips));
                    }
                }
            }
            if (episode && before >= Ratio{}) {
                episode = false;
            }

            Ratio expected = before;
            if (handler) {
                if (t.timeout) {
                    expected = std::max(before - ratio_one(), resilience::kMinX);
                    if (!episode && expected < Ratio{}) {
                        episode = true;
                        flips = 0;
                    }
                } else if (before < Ratio{}) {
                    expected = before + opt.recovery_step;
                }
            }
            if (after != expected) {
                fail(t.round_id, "recovery_ladder",
                     fmt::format("{} round moved x {} -> {}, expected {}", t.timeout ? "timeout" : "on-time",
                                 before.str(), after.str(), expected.str()));
            }
            prev = &t;
        }
    }
};

}  // namespace

std::vector<Violation> validate_trace(const std::vector<RoundTrace>& traces, const ValidateOptions& opt) {
    Checker c{opt, {}};
    c.results(traces);
    for (const auto& t : traces) {
        c.x_floor(t);
        c.boundary(t);
    }
    c.ladder(traces);
    std::stable_sort(c.out.begin(), c.out.end(), [](const Violation& a, const Violation& b) {
        return a.round.value_or(0) < b.round.value_or(0);
    });
    return c.out;
}

std::string format_violation(const Violation& v) {
    return fmt::format("round {}: {}: {}", v.round ? std::to_string(*v.round) : "-", v.invariant, v.detail);
}

}  // namespace interneuron::harness
