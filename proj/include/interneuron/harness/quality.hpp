#pragma once

#include "interneuron/core/types.hpp"

#include <string>
#include <vector>

namespace interneuron::harness {

/// One configuration of the remote compute task.
struct QualityLevel {
    std::string name;
    Elapsed service_time{};
    double ap = 0.0;
    double ar = 0.0;
    std::string param_label;
};

/// Ordered best-first: ap and service time are non-increasing down the table.
using QualityTable = std::vector<QualityLevel>;

void validate_quality_table(const QualityTable& table);

/// Stand-in for three detector sizes, 12/45/90 ms.
QualityTable default_quality_table();

struct ServiceOutcome {
    Elapsed duration{};
    double ap = 0.0;
    double ar = 0.0;
};

/// Service time does not depend on the input frame (frames are rescaled
/// before inference); accuracy is the level's, scaled by the frame's
/// accuracy factor.
ServiceOutcome compute_service(const QualityLevel& level, const PayloadDescriptor& frame);

}  // namespace interneuron::harness
