#include "interneuron/harness/quality.hpp"

#include <stdexcept>

namespace interneuron::harness {

void validate_quality_table(const QualityTable& table) {
    if (table.empty()) {
        throw ContractError("quality table must not be empty");
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& l = table[i];
        if (l.service_time <= Elapsed::zero()) {
            throw ContractError("quality level '" + l.name + "': service time must be positive");
        }
        if (l.ap < 0.0 || l.ap > 1.0 || l.ar < 0.0 || l.ar > 1.0) {
            throw ContractError("quality level '" + l.name + "': ap/ar must lie in [0, 1]");
        }
        if (i > 0) {
            const auto& prev = table[i - 1];
            if (l.ap > prev.ap || l.service_time > prev.service_time) {
                throw ContractError("quality table must be ordered best-first (ap and service time non-increasing)");
            }
        }
    }
}

QualityTable default_quality_table() {
    return {
        {"large", ms(90), 0.55, 0.71, "104.7M"},
        {"medium", ms(45), 0.49, 0.65, "46.5M"},
        {"nano", ms(12), 0.37, 0.52, "1.9M"},
    };
}

ServiceOutcome compute_service(const QualityLevel& level, const PayloadDescriptor& frame) {
    if (frame.kind != PayloadKind::RawFrame && frame.kind != PayloadKind::SampledFrame) {
        throw ContractError("compute_service: input must be a frame");
    }
    const double f = frame.accuracy_factor.to_double();
    return {level.service_time, level.ap * f, level.ar * f};
}

}  // namespace interneuron::harness
