#pragma once

#include <array>

#include "leafsev/background.hpp"
#include "leafsev/segment.hpp"

namespace leafsev {

struct SeverityReport {
    std::int64_t leaf_pixels = 0;
    std::int64_t damaged_pixels = 0;
    double severity_percent = 0.0;  // 100 * damaged / leaf
    // Diagnostics filled by the pipeline.
    double gamma_used = 1.0;
    std::array<double, 2> fcm_centers{};
    int fcm_iterations = 0;
};

// Severity ratio from the two masks. Throws EmptyLeafError on an empty
// leaf mask; requires damage restricted to the leaf.
SeverityReport estimate_severity(const DamageMask& damage, const LeafMask& leaf);

}  // namespace leafsev
