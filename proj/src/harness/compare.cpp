#include "interneuron/harness/compare.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <set>

namespace interneuron::harness {

double reduction_pct(double candidate, double reference) {
    if (reference == 0.0) {
        return candidate == 0.0 ? 0.0 : -100.0 * candidate;
    }
    return 100.0 * (reference - candidate) / reference;
}

CompareReport compare_summaries(const std::vector<Summary>& a, const std::vector<Summary>& b) {
    if (a.empty() || b.empty()) {
        throw CompareError("both sides need at least one summary row");
    }
    std::set<std::string> scenarios;
    std::multiset<std::uint64_t> seeds_a, seeds_b;
    for (const auto& s : a) {
        scenarios.insert(s.scenario);
        seeds_a.insert(s.seed);
    }
    for (const auto& s : b) {
        scenarios.insert(s.scenario);
        seeds_b.insert(s.seed);
    }
    if (scenarios.size() != 1) {
        throw CompareError(fmt::format("summaries come from different scenarios ({})", fmt::join(scenarios, ", ")));
    }
    if (seeds_a != seeds_b) {
        throw CompareError("summaries cover different seed sets");
    }

    CompareReport r;
    r.scenario = *scenarios.begin();
    double e2e_a = 0, e2e_b = 0, ap_a = 0, ap_b = 0, ar_a = 0, ar_b = 0;
    for (const auto& s : a) {
        r.timeouts_a += s.timeouts;
        r.consec_a += s.consec_timeouts;
        e2e_a += s.mean_e2e_us;
        ap_a += s.mean_ap;
        ar_a += s.mean_ar;
    }
    for (const auto& s : b) {
        r.timeouts_b += s.timeouts;
        r.consec_b += s.consec_timeouts;
        e2e_b += s.mean_e2e_us;
        ap_b += s.mean_ap;
        ar_b += s.mean_ar;
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    r.mean_e2e_a_us = e2e_a / na;
    r.mean_e2e_b_us = e2e_b / nb;
    r.ap_delta = ap_a / na - ap_b / nb;
    r.ar_delta = ar_a / na - ar_b / nb;
    r.timeout_reduction_pct = reduction_pct(static_cast<double>(r.timeouts_a), static_cast<double>(r.timeouts_b));
    r.consec_reduction_pct = reduction_pct(static_cast<double>(r.consec_a), static_cast<double>(r.consec_b));
    return r;
}

std::string format_report(const CompareReport& r) {
    return fmt::format(
        "scenario               {}\n"
        "timeouts               {} vs {}  ({:.1f}% reduction)\n"
        "consecutive timeouts   {} vs {}  ({:.1f}% reduction)\n"
        "mean e2e (on time)     {:.1f} ms vs {:.1f} ms\n"
        "mean ap delta          {:+.4f}\n"
        "mean ar delta          {:+.4f}\n",
        r.scenario, r.timeouts_a, r.timeouts_b, r.timeout_reduction_pct, r.consec_a, r.consec_b,
        r.consec_reduction_pct, r.mean_e2e_a_us / 1000.0, r.mean_e2e_b_us / 1000.0, r.ap_delta, r.ar_delta);
}

}  // namespace interneuron::harness
