#pragma once

#include "interneuron/harness/experiment.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace interneuron::harness {

class CompareError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `a` is the candidate, `b` the reference. Reductions are (b - a) / b in
/// percent, 0 when both are 0.
struct CompareReport {
    std::string scenario;
    std::uint64_t timeouts_a = 0, timeouts_b = 0;
    std::uint64_t consec_a = 0, consec_b = 0;
    double timeout_reduction_pct = 0.0;
    double consec_reduction_pct = 0.0;
    double mean_e2e_a_us = 0.0, mean_e2e_b_us = 0.0;
    double ap_delta = 0.0;
    double ar_delta = 0.0;
};

double reduction_pct(double candidate, double reference);

/// Each side may hold several rows (one per seed); counts are summed and
/// means averaged. Throws CompareError when the sides cover different
/// scenarios or seed sets.
CompareReport compare_summaries(const std::vector<Summary>& a, const std::vector<Summary>& b);

std::string format_report(const CompareReport& r);

}  // namespace interneuron::harness
