#pragma once

#include <array>
#include <span>
#include <vector>

#include "leafsev/background.hpp"
#include "leafsev/types.hpp"

namespace leafsev {

struct FcmParams {
    double fuzzifier = 2.0;   // m > 1
    double tolerance = 1e-4;  // max center movement
    int max_iters = 100;

    void validate() const;
};

struct FcmResult {
    std::array<double, 2> centers{};  // ascending
    std::vector<std::array<double, 2>> memberships;  // one pair per input value
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

// 256-point lattice histogram of a real-valued channel.
struct VHistogram {
    std::array<double, 256> values{};
    std::array<std::int64_t, 256> counts{};
};

// Affine quantization of values onto a 256-point lattice spanning [min, max].
VHistogram quantize_histogram(std::span<const double> values);

// Two-cluster FCM over raw values. Deterministic init: centers at the 5th
// and 95th nearest-rank percentiles (min/max when those coincide).
// Throws DegenerateChannelError with fewer than 2 distinct values.
FcmResult fcm_cluster(std::span<const double> values, const FcmParams& params = {});

// Same fixed-point updates with bin counts as weights; memberships are
// per non-empty bin, in ascending bin order.
FcmResult fcm_cluster_hist(const VHistogram& hist, const FcmParams& params = {});

enum class DamageClusterRule { kHigherV, kLowerV };

struct DamageMask {
    BinaryMask mask;
    std::int64_t pixels = 0;
};

// Assign every leaf pixel to its max-membership cluster; the cluster picked
// by `rule` is the damage. Ties and equal centers count as healthy.
DamageMask classify_damage(const FloatMap& img_v, const LeafMask& leaf,
                           const FcmResult& result,
                           DamageClusterRule rule = DamageClusterRule::kHigherV);

}  // namespace leafsev
