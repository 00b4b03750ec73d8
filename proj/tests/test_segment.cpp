#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "leafsev/color.hpp"
#include "leafsev/segment.hpp"
#include "leafsev/synth.hpp"
#include "test_helpers.hpp"

using namespace leafsev;

namespace {

// Straight-line reference solver used to validate fixed points; no
// histogram, no shared code with the library loops.
std::array<double, 2> reference_fcm_centers(std::vector<double> xs, double m,
                                            double tol, int iters) {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    auto rank = [&](double q) {
        std::size_t k = static_cast<std::size_t>(std::ceil(q * n));
        k = std::clamp<std::size_t>(k, 1, n);
        return sorted[k - 1];
    };
    double c0 = rank(0.05), c1 = rank(0.95);
    if (c0 == c1) {
        c0 = sorted.front();
        c1 = sorted.back();
    }
    for (int it = 0; it < iters; ++it) {
        double n0 = 0, d0 = 0, n1 = 0, d1 = 0;
        for (double x : xs) {
            const double da = std::abs(x - c0), db = std::abs(x - c1);
            double u0;
            if (da == 0 && db == 0)
                u0 = 0.5;
            else if (da == 0)
                u0 = 1.0;
            else if (db == 0)
                u0 = 0.0;
            else
                u0 = 1.0 / (1.0 + std::pow(da / db, 2.0 / (m - 1.0)));
            const double u1 = 1.0 - u0;
            n0 += std::pow(u0, m) * x;
            d0 += std::pow(u0, m);
            n1 += std::pow(u1, m) * x;
            d1 += std::pow(u1, m);
        }
        const double nc0 = d0 > 0 ? n0 / d0 : c0;
        const double nc1 = d1 > 0 ? n1 / d1 : c1;
        const double move = std::max(std::abs(nc0 - c0), std::abs(nc1 - c1));
        c0 = nc0;
        c1 = nc1;
        if (move < tol) break;
    }
    if (c0 > c1) std::swap(c0, c1);
    return {c0, c1};
}

std::vector<double> random_values(std::uint32_t seed, int n, double lo, double hi) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("fcm bimodal values converge to the modes") {
    const std::vector<double> values = {0, 0, 0, 10, 10, 10};
    const FcmResult result = fcm_cluster(values);
    CHECK(std::abs(result.centers[0] - 0.0) < 1e-3);
    CHECK(std::abs(result.centers[1] - 10.0) < 1e-3);
    CHECK(result.converged);

    const auto ref = reference_fcm_centers(values, 2.0, 1e-4, 100);
    CHECK(std::abs(ref[0] - 0.0) < 1e-3);
    CHECK(std::abs(ref[1] - 10.0) < 1e-3);
}

TEST_CASE("fcm matches the reference solver on random data") {
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        std::vector<double> values = random_values(seed, 300, 0.0, 50.0);
        for (int i = 0; i < 150; ++i) values[i] += 120.0;  // two lobes
        const FcmResult result = fcm_cluster(values);
        const auto ref = reference_fcm_centers(values, 2.0, 1e-4, 100);
        CHECK(std::abs(result.centers[0] - ref[0]) < 1e-6);
        CHECK(std::abs(result.centers[1] - ref[1]) < 1e-6);
    }
}

TEST_CASE("fcm memberships sum to one") {
    const std::vector<double> values = random_values(7, 500, -30.0, 80.0);
    const FcmResult result = fcm_cluster(values);
    for (const auto& u : result.memberships) {
        CHECK(std::abs(u[0] + u[1] - 1.0) <= 1e-9);
        CHECK(u[0] >= 0.0);
        CHECK(u[0] <= 1.0);
        CHECK(u[1] >= 0.0);
        CHECK(u[1] <= 1.0);
    }
}

TEST_CASE("fcm objective trace never increases") {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const std::vector<double> values = random_values(seed + 100, 200, 0.0, 255.0);
        const FcmResult result = fcm_cluster(values);
        for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
            CHECK(result.objective_trace[i] <=
                  result.objective_trace[i - 1] + 1e-9);
    }
}

TEST_CASE("fcm is translation equivariant") {
    std::vector<double> values = {1, 2, 2, 3, 9, 10, 10, 11};
    const FcmResult base = fcm_cluster(values);
    std::vector<double> shifted = values;
    for (double& v : shifted) v += 16.0;  // integers stay exact
    const FcmResult moved = fcm_cluster(shifted);
    CHECK(std::abs(moved.centers[0] - (base.centers[0] + 16.0)) < 1e-12);
    CHECK(std::abs(moved.centers[1] - (base.centers[1] + 16.0)) < 1e-12);
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(moved.memberships[i][0] == doctest::Approx(base.memberships[i][0])
                                             .epsilon(1e-12));
    }
}

TEST_CASE("fcm is scale equivariant") {
    const std::vector<double> values = {1, 2, 2, 3, 9, 10, 10, 11};
    const FcmResult base = fcm_cluster(values);
    for (double k : {2.0, 3.0}) {
        std::vector<double> scaled = values;
        for (double& v : scaled) v *= k;
        const FcmResult s = fcm_cluster(scaled);
        CHECK(s.centers[0] == doctest::Approx(k * base.centers[0]).epsilon(1e-9));
        CHECK(s.centers[1] == doctest::Approx(k * base.centers[1]).epsilon(1e-9));
    }
}

TEST_CASE("fcm rejects degenerate input") {
    CHECK_THROWS_AS(fcm_cluster(std::vector<double>{5, 5, 5, 5}),
                    DegenerateChannelError);
    CHECK_THROWS_AS(fcm_cluster(std::vector<double>{}), DegenerateChannelError);

    VHistogram hist;
    hist.values[42] = 42.0;
    hist.counts[42] = 100;
    CHECK_THROWS_AS(fcm_cluster_hist(hist), DegenerateChannelError);
}

TEST_CASE("histogram path equals pixel path on the bimodal example") {
    VHistogram hist;
    for (int i = 0; i < 256; ++i) hist.values[i] = i;
    hist.counts[0] = 3;
    hist.counts[10] = 3;
    const FcmResult h = fcm_cluster_hist(hist);
    const FcmResult p = fcm_cluster(std::vector<double>{0, 0, 0, 10, 10, 10});
    CHECK(std::abs(h.centers[0] - p.centers[0]) < 1e-9);
    CHECK(std::abs(h.centers[1] - p.centers[1]) < 1e-9);
    CHECK(h.iterations == p.iterations);
}

TEST_CASE("histogram path equals pixel path on quantized random data") {
    // 10k values drawn from a 256-point lattice, i.e. 8-bit-derived data.
    const double lo = -50.0, hi = 90.0;
    const double step = (hi - lo) / 255.0;
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> bin(0, 255);
    std::uniform_int_distribution<int> mode(0, 99);

    std::vector<double> values;
    VHistogram hist;
    for (int i = 0; i < 256; ++i) hist.values[i] = lo + i * step;
    for (int i = 0; i < 10000; ++i) {
        int b = bin(rng);
        if (mode(rng) < 60) b = b / 4;  // skew mass low to force iterations
        values.push_back(lo + b * step);
        ++hist.counts[b];
    }

    const FcmResult p = fcm_cluster(values);
    const FcmResult h = fcm_cluster_hist(hist);
    CHECK(std::abs(h.centers[0] - p.centers[0]) < 1e-9);
    CHECK(std::abs(h.centers[1] - p.centers[1]) < 1e-9);
    CHECK(h.iterations == p.iterations);
    CHECK(h.converged == p.converged);

    // Both results classify a map identically.
    FloatMap v_map(100, 100);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) v_map(y, x) = values[y * 100 + x];
    LeafMask leaf{BinaryMask::Constant(100, 100, true), 100 * 100};
    const DamageMask dp = classify_damage(v_map, leaf, p);
    const DamageMask dh = classify_damage(v_map, leaf, h);
    CHECK((dp.mask == dh.mask).all());
    CHECK(dp.pixels == dh.pixels);
}

TEST_CASE("quantize_histogram spans min..max on a 256-point lattice") {
    const std::vector<double> values = {-10.0, 0.0, 5.0, 244.0, 245.0};
    const VHistogram hist = quantize_histogram(values);
    CHECK(hist.values[0] == doctest::Approx(-10.0));
    CHECK(hist.values[255] == doctest::Approx(245.0));
    std::int64_t total = 0;
    for (auto c : hist.counts) total += c;
    CHECK(total == 5);
}

TEST_CASE("classify_damage assigns by nearest center") {
    FloatMap v(1, 6);
    v << -25, -18, 5, 30, 34, 40;
    LeafMask leaf{BinaryMask::Constant(1, 6, true), 6};
    FcmResult result;
    result.centers = {-20.0, 35.0};

    const DamageMask damage = classify_damage(v, leaf, result);
    CHECK(damage.pixels == 3);
    CHECK(!damage.mask(0, 0));
    CHECK(!damage.mask(0, 1));
    CHECK(!damage.mask(0, 2));  // 5 is 25 from -20, 30 from 35 -> healthy
    CHECK(damage.mask(0, 3));
    CHECK(damage.mask(0, 4));
    CHECK(damage.mask(0, 5));

    const DamageMask inverted =
        classify_damage(v, leaf, result, DamageClusterRule::kLowerV);
    CHECK(inverted.pixels == 3);
    CHECK(inverted.mask(0, 0));
    CHECK(!inverted.mask(0, 3));
}

TEST_CASE("classify_damage ties and degenerate centers are healthy") {
    FloatMap v(1, 3);
    v << 0, 5, 10;
    LeafMask leaf{BinaryMask::Constant(1, 3, true), 3};
    FcmResult result;
    result.centers = {0.0, 10.0};
    const DamageMask damage = classify_damage(v, leaf, result);
    CHECK(!damage.mask(0, 1));  // exact midpoint goes healthy
    CHECK(damage.mask(0, 2));

    result.centers = {7.0, 7.0};
    CHECK(classify_damage(v, leaf, result).pixels == 0);
}

TEST_CASE("classify_damage stays inside the leaf") {
    FloatMap v = FloatMap::Constant(8, 8, 50.0);
    v(0, 0) = -50.0;
    BinaryMask leaf_mask = BinaryMask::Constant(8, 8, false);
    leaf_mask(0, 0) = leaf_mask(0, 1) = true;
    LeafMask leaf{leaf_mask, 2};
    FcmResult result;
    result.centers = {-50.0, 50.0};
    const DamageMask damage = classify_damage(v, leaf, result);
    CHECK((damage.mask && !leaf.mask).count() == 0);
    CHECK(damage.pixels == 1);
}

TEST_CASE("fcm damage recovery on a synthetic leaf") {
    SynthSpec spec;
    spec.width = 256;
    spec.height = 256;
    spec.damage_fraction = 0.2;
    spec.seed = 77;
    const SynthResult synth = generate(spec);

    // V channel of the raw image, clustered over the truth leaf mask.
    const FloatMap v = rgb_to_yuv(synth.image).v;
    std::vector<double> values;
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x)
            if (synth.leaf_truth.mask(y, x)) values.push_back(v(y, x));
    const FcmResult result = fcm_cluster(values);
    const DamageMask damage = classify_damage(v, synth.leaf_truth, result);
    CHECK(test::mask_iou(damage.mask, synth.damage_truth.mask) >= 0.85);
}
