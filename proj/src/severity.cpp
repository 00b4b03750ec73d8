#include "leafsev/severity.hpp"

namespace leafsev {

SeverityReport estimate_severity(const DamageMask& damage, const LeafMask& leaf) {
    if (leaf.pixels <= 0) throw EmptyLeafError();
    if ((damage.mask && !leaf.mask).any())
        throw std::invalid_argument("estimate_severity: damage outside leaf");
    SeverityReport report;
    report.leaf_pixels = leaf.pixels;
    report.damaged_pixels = damage.pixels;
    report.severity_percent =
        100.0 * static_cast<double>(damage.pixels) / static_cast<double>(leaf.pixels);
    return report;
}

}  // namespace leafsev
