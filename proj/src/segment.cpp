#include "leafsev/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace leafsev {

namespace {

// Memberships of one value against two centers; coincident value/center
// pairs get crisp (or evenly split) memberships.
std::array<double, 2> memberships_for(double x, const std::array<double, 2>& c,
                                      double exponent) {
    const double d0 = std::abs(x - c[0]);
    const double d1 = std::abs(x - c[1]);
    if (d0 == 0.0 && d1 == 0.0) return {0.5, 0.5};
    if (d0 == 0.0) return {1.0, 0.0};
    if (d1 == 0.0) return {0.0, 1.0};
    const double u0 = 1.0 / (1.0 + std::pow(d0 / d1, exponent));
    const double u1 = 1.0 / (1.0 + std::pow(d1 / d0, exponent));
    return {u0, u1};
}

void sort_result(FcmResult& r) {
    if (r.centers[0] <= r.centers[1]) return;
    std::swap(r.centers[0], r.centers[1]);
    for (auto& u : r.memberships) std::swap(u[0], u[1]);
}

}  // namespace

void FcmParams::validate() const {
    if (!(fuzzifier > 1.0)) throw std::invalid_argument("fcm fuzzifier must be > 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("fcm tolerance must be > 0");
    if (max_iters < 1) throw std::invalid_argument("fcm max_iters must be >= 1");
}

VHistogram quantize_histogram(std::span<const double> values) {
    if (values.empty()) throw DegenerateChannelError();
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    VHistogram hist;
    if (hi == lo) {
        hist.values.fill(lo);
        hist.counts[0] = static_cast<std::int64_t>(values.size());
        return hist;
    }
    const double step = (hi - lo) / 255.0;
    for (int i = 0; i < 256; ++i) hist.values[i] = lo + i * step;
    for (double v : values) {
        int idx = static_cast<int>(std::lround((v - lo) / step));
        idx = std::clamp(idx, 0, 255);
        ++hist.counts[idx];
    }
    return hist;
}

FcmResult fcm_cluster(std::span<const double> values, const FcmParams& params) {
    params.validate();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty() || sorted.front() == sorted.back())
        throw DegenerateChannelError();

    const std::size_t n = sorted.size();
    auto rank_value = [&](double q) {
        std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
        k = std::clamp<std::size_t>(k, 1, n);
        return sorted[k - 1];
    };
    std::array<double, 2> centers = {rank_value(0.05), rank_value(0.95)};
    if (centers[0] == centers[1]) centers = {sorted.front(), sorted.back()};

    const double exponent = 2.0 / (params.fuzzifier - 1.0);
    FcmResult result;
    result.memberships.resize(values.size());

    for (int it = 1; it <= params.max_iters; ++it) {
        for (std::size_t i = 0; i < values.size(); ++i)
            result.memberships[i] = memberships_for(values[i], centers, exponent);

        std::array<double, 2> num{}, den{};
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                const double um = std::pow(result.memberships[i][k], params.fuzzifier);
                num[k] += um * values[i];
                den[k] += um;
            }
        }
        std::array<double, 2> next = centers;
        double movement = 0.0;
        for (int k = 0; k < 2; ++k) {
            if (den[k] > 0.0) next[k] = num[k] / den[k];
            movement = std::max(movement, std::abs(next[k] - centers[k]));
        }
        centers = next;

        double objective = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                const double d = values[i] - centers[k];
                objective +=
                    std::pow(result.memberships[i][k], params.fuzzifier) * d * d;
            }
        }
        result.objective_trace.push_back(objective);
        result.iterations = it;
        if (movement < params.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.centers = centers;
    sort_result(result);
    return result;
}

FcmResult fcm_cluster_hist(const VHistogram& hist, const FcmParams& params) {
    params.validate();
    std::vector<double> xs;
    std::vector<double> ws;
    for (int i = 0; i < 256; ++i) {
        if (hist.counts[i] <= 0) continue;
        xs.push_back(hist.values[i]);
        ws.push_back(static_cast<double>(hist.counts[i]));
    }
    if (xs.size() < 2) throw DegenerateChannelError();

    // Nearest-rank percentiles over the weighted bins, ascending order.
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    double total = 0.0;
    for (double w : ws) total += w;
    auto rank_value = [&](double q) {
        const double k = std::max(1.0, std::ceil(q * total));
        double cum = 0.0;
        for (std::size_t i : order) {
            cum += ws[i];
            if (cum >= k) return xs[i];
        }
        return xs[order.back()];
    };
    std::array<double, 2> centers = {rank_value(0.05), rank_value(0.95)};
    if (centers[0] == centers[1])
        centers = {xs[order.front()], xs[order.back()]};

    const double exponent = 2.0 / (params.fuzzifier - 1.0);
    FcmResult result;
    result.memberships.resize(xs.size());

    for (int it = 1; it <= params.max_iters; ++it) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            result.memberships[i] = memberships_for(xs[i], centers, exponent);

        std::array<double, 2> num{}, den{};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                const double um =
                    ws[i] * std::pow(result.memberships[i][k], params.fuzzifier);
                num[k] += um * xs[i];
                den[k] += um;
            }
        }
        std::array<double, 2> next = centers;
        double movement = 0.0;
        for (int k = 0; k < 2; ++k) {
            if (den[k] > 0.0) next[k] = num[k] / den[k];
            movement = std::max(movement, std::abs(next[k] - centers[k]));
        }
        centers = next;

        double objective = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                const double d = xs[i] - centers[k];
                objective += ws[i] *
                             std::pow(result.memberships[i][k], params.fuzzifier) *
                             d * d;
            }
        }
        result.objective_trace.push_back(objective);
        result.iterations = it;
        if (movement < params.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.centers = centers;
    sort_result(result);
    return result;
}

DamageMask classify_damage(const FloatMap& img_v, const LeafMask& leaf,
                           const FcmResult& result, DamageClusterRule rule) {
    const int h = static_cast<int>(img_v.rows());
    const int w = static_cast<int>(img_v.cols());
    if (leaf.mask.rows() != h || leaf.mask.cols() != w)
        throw std::invalid_argument("classify_damage: dimension mismatch");

    DamageMask damage{BinaryMask::Constant(h, w, false), 0};
    const double c_lo = result.centers[0];
    const double c_hi = result.centers[1];
    if (c_lo == c_hi) return damage;  // degenerate: no damage declared

    const double damage_center = rule == DamageClusterRule::kHigherV ? c_hi : c_lo;
    const double other_center = rule == DamageClusterRule::kHigherV ? c_lo : c_hi;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!leaf.mask(y, x)) continue;
            const double v = img_v(y, x);
            // For two clusters, max membership is the nearer center for any
            // fuzzifier; ties go to the healthy cluster.
            if (std::abs(v - damage_center) < std::abs(v - other_center)) {
                damage.mask(y, x) = true;
                ++damage.pixels;
            }
        }
    }
    return damage;
}

}  // namespace leafsev
