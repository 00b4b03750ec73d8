#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "leafsev/background.hpp"
#include "leafsev/color.hpp"
#include "leafsev/synth.hpp"
#include "test_helpers.hpp"

using namespace leafsev;

namespace {

// Two balanced +/- delta blocks keep the channel means at the base value
// exactly, so the deviation at a block center is the delta itself.
LabImage balanced_lab_fixture(double dl, double da, double db) {
    const int n = 32;
    LabImage lab{FloatMap::Constant(n, n, 50.0), FloatMap::Constant(n, n, 10.0),
                 FloatMap::Constant(n, n, 20.0)};
    auto put = [](FloatMap& m, int r0, int c0, double v) {
        for (int y = r0; y < r0 + 7; ++y)
            for (int x = c0; x < c0 + 7; ++x) m(y, x) = v;
    };
    put(lab.l, 4, 4, 50.0 + dl);
    put(lab.a, 4, 4, 10.0 + da);
    put(lab.b, 4, 4, 20.0 + db);
    put(lab.l, 20, 20, 50.0 - dl);
    put(lab.a, 20, 20, 10.0 - da);
    put(lab.b, 20, 20, 20.0 - db);
    return lab;
}

BinaryMask rect_mask(int h, int w, int r0, int c0, int rh, int cw) {
    BinaryMask m = BinaryMask::Constant(h, w, false);
    for (int y = r0; y < r0 + rh; ++y)
        for (int x = c0; x < c0 + cw; ++x) m(y, x) = true;
    return m;
}

// Reference Canny written as straight-line code: full 2-D Gaussian
// convolution, comparison-based sector selection, sort-based percentiles.
BinaryMask reference_canny(const RasterImage& gray, const BackgroundParams& p) {
    const int h = gray.height, w = gray.width;
    const int radius = static_cast<int>(std::ceil(3.0 * p.canny_sigma));
    std::vector<std::vector<double>> kernel(2 * radius + 1,
                                            std::vector<double>(2 * radius + 1));
    double ksum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = std::exp(-0.5 * (dx * dx + dy * dy) /
                                      (p.canny_sigma * p.canny_sigma));
            kernel[dy + radius][dx + radius] = v;
            ksum += v;
        }
    auto src = [&](int y, int x) {
        return static_cast<double>(
            gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
    };
    FloatMap sm(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    acc += kernel[dy + radius][dx + radius] * src(y + dy, x + dx);
            sm(y, x) = acc / ksum;
        }

    FloatMap gx(h, w), gy(h, w), mag(h, w);
    auto s = [&](int y, int x) {
        return sm(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            gx(y, x) = s(y - 1, x + 1) + 2 * s(y, x + 1) + s(y + 1, x + 1) -
                       s(y - 1, x - 1) - 2 * s(y, x - 1) - s(y + 1, x - 1);
            gy(y, x) = s(y + 1, x - 1) + 2 * s(y + 1, x) + s(y + 1, x + 1) -
                       s(y - 1, x - 1) - 2 * s(y - 1, x) - s(y - 1, x + 1);
            mag(y, x) = std::sqrt(gx(y, x) * gx(y, x) + gy(y, x) * gy(y, x));
        }

    std::vector<double> nz;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mag(y, x) > 0) nz.push_back(mag(y, x));
    if (nz.empty()) return BinaryMask::Constant(h, w, false);
    std::sort(nz.begin(), nz.end());
    auto rank = [&](double q) {
        std::size_t k = static_cast<std::size_t>(std::ceil(q * nz.size()));
        k = std::clamp<std::size_t>(k, 1, nz.size());
        return nz[k - 1];
    };
    const double low = rank(p.canny_low_pct), high = rank(p.canny_high_pct);

    const double t1 = std::tan(M_PI / 8.0), t3 = std::tan(3.0 * M_PI / 8.0);
    BinaryMask cand = BinaryMask::Constant(h, w, false);
    auto mat = [&](int y, int x) {
        return (x < 0 || x >= w || y < 0 || y >= h) ? 0.0 : mag(y, x);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mag(y, x) <= 0) continue;
            double ax = gx(y, x), ay = gy(y, x);
            if (ay < 0 || (ay == 0 && ax < 0)) {
                ax = -ax;
                ay = -ay;
            }
            int dx, dy;
            if (std::abs(ay) < t1 * std::abs(ax)) {
                dx = 1, dy = 0;
            } else if (std::abs(ay) > t3 * std::abs(ax)) {
                dx = 0, dy = 1;
            } else {
                dx = ax > 0 ? 1 : -1, dy = 1;
            }
            if (mag(y, x) > mat(y - dy, x - dx) && mag(y, x) >= mat(y + dy, x + dx))
                cand(y, x) = true;
        }

    BinaryMask edges = BinaryMask::Constant(h, w, false);
    std::vector<std::pair<int, int>> todo;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (cand(y, x) && mag(y, x) >= high) {
                edges(y, x) = true;
                todo.emplace_back(x, y);
            }
    while (!todo.empty()) {
        auto [cx, cy] = todo.back();
        todo.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = cx + dx, yy = cy + dy;
                if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                if (edges(yy, xx) || !cand(yy, xx) || mag(yy, xx) < low) continue;
                edges(yy, xx) = true;
                todo.emplace_back(xx, yy);
            }
    }
    return edges;
}

RasterImage step_edge_image(std::uint8_t left, std::uint8_t right) {
    RasterImage img(32, 32, 1, left);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x) img.at(x, y) = right;
    return img;
}

}  // namespace

TEST_CASE("salience matches the formula on a balanced fixture") {
    const LabImage lab = balanced_lab_fixture(2.0, 1.0, 3.0);
    const FloatMap o4 = salience_from_lab(lab, 4);
    CHECK(o4(7, 7) == doctest::Approx(4.0 + 1.0 + 9.0).epsilon(1e-12));
    const FloatMap o2 = salience_from_lab(lab, 2);
    CHECK(o2(7, 7) == doctest::Approx(14.0).epsilon(1e-12));

    // The exponent choice shows at |da| = 2: 16 vs 4 on the a-term.
    const LabImage lab2 = balanced_lab_fixture(2.0, 2.0, 3.0);
    CHECK(salience_from_lab(lab2, 4)(7, 7) == doctest::Approx(29.0).epsilon(1e-12));
    CHECK(salience_from_lab(lab2, 2)(7, 7) == doctest::Approx(17.0).epsilon(1e-12));
}

TEST_CASE("salience of a uniform image is zero") {
    RasterImage img(24, 24, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i] = 80;
        img.data[3 * i + 1] = 120;
        img.data[3 * i + 2] = 60;
    }
    CHECK(salience_map(img).maxCoeff() <= 1e-18);
}

TEST_CASE("salience is non-negative") {
    const RasterImage img = test::random_image(31, 17, 3, 41);
    CHECK(salience_map(img).minCoeff() >= 0.0);
}

TEST_CASE("adaptive_threshold") {
    FloatMap m(2, 2);
    m << 0, 0, 0, 4;  // mean 1
    const BinaryMask mask = adaptive_threshold(m);
    CHECK(mask.count() == 1);
    CHECK(mask(1, 1));

    CHECK(adaptive_threshold(FloatMap::Constant(5, 5, 3.3)).count() == 0);
}

TEST_CASE("adaptive_threshold is scale invariant") {
    const FloatMap m = test::random_map(16, 16, 13, 0.0, 10.0);
    const BinaryMask base = adaptive_threshold(m);
    for (double k : {0.5, 3.0, 1e6}) {
        const BinaryMask scaled = adaptive_threshold(FloatMap(k * m));
        CHECK((scaled == base).all());
    }
}

TEST_CASE("canny on a constant image is empty") {
    CHECK(canny_edges(RasterImage(16, 16, 1, 90), {}).count() == 0);
}

TEST_CASE("canny on a vertical step is a single one-pixel line") {
    const BinaryMask edges = canny_edges(step_edge_image(0, 255), {});
    int column = -1;
    for (int y = 0; y < 32; ++y) {
        int count = 0, where = -1;
        for (int x = 0; x < 32; ++x)
            if (edges(y, x)) {
                ++count;
                where = x;
            }
        CHECK(count == 1);
        if (column < 0) column = where;
        CHECK(where == column);
    }
    CHECK(column >= 14);
    CHECK(column <= 17);
}

TEST_CASE("canny is invariant under a constant intensity shift") {
    const BinaryMask a = canny_edges(step_edge_image(20, 230), {});
    const BinaryMask b = canny_edges(step_edge_image(30, 240), {});
    CHECK((a == b).all());
}

TEST_CASE("canny agrees with an independent reference implementation") {
    // Bright ellipse over a dark ramp; curved edges exercise all sectors.
    RasterImage img(96, 96, 1);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            const double dx = (x - 48.0) / 30.0, dy = (y - 48.0) / 20.0;
            img.at(x, y) = dx * dx + dy * dy <= 1.0
                               ? static_cast<std::uint8_t>(200)
                               : static_cast<std::uint8_t>(40 + x / 6);
        }
    const BackgroundParams params;
    const BinaryMask ours = canny_edges(img, params);
    const BinaryMask ref = reference_canny(img, params);
    CHECK(ours.count() > 0);
    CHECK(ref.count() > 0);
    // Identical algorithms up to floating-point tie-breaks.
    CHECK(test::mask_iou(ours, ref) >= 0.98);
}

TEST_CASE("fuse_masks") {
    const BinaryMask rect = rect_mask(16, 16, 4, 4, 8, 8);
    const BinaryMask empty = BinaryMask::Constant(16, 16, false);

    // Empty edges: result is the closing of the threshold mask; a solid
    // rectangle is its own closing.
    CHECK((fuse_masks(rect, empty) == rect).all());

    // Empty threshold keeps a closed contour.
    BinaryMask ring = BinaryMask::Constant(20, 20, false);
    for (int i = 4; i <= 14; ++i) {
        ring(4, i) = ring(14, i) = true;
        ring(i, 4) = ring(i, 14) = true;
    }
    const BinaryMask fused_ring =
        fuse_masks(BinaryMask::Constant(20, 20, false), ring);
    for (int i = 4; i <= 14; ++i) {
        CHECK(fused_ring(4, i));
        CHECK(fused_ring(i, 14));
    }

    CHECK_THROWS_AS(fuse_masks(rect, BinaryMask::Constant(4, 4, false)),
                    std::invalid_argument);
}

TEST_CASE("fuse_masks bridges a one-pixel gap spanned by an edge") {
    BinaryMask thresh = rect_mask(16, 16, 4, 2, 5, 5);          // cols 2..6
    thresh = thresh || rect_mask(16, 16, 4, 8, 5, 5);           // cols 8..12
    BinaryMask edges = BinaryMask::Constant(16, 16, false);
    edges(6, 7) = true;  // spans the gap at column 7
    const BinaryMask fused = fuse_masks(thresh, edges);
    CHECK(test::count_components(fused) == 1);
}

TEST_CASE("largest_component") {
    BinaryMask m = rect_mask(24, 24, 2, 2, 2, 5);    // area 10
    m = m || rect_mask(24, 24, 10, 4, 5, 6);          // area 30
    const BinaryMask kept = largest_component(m);
    CHECK(kept.count() == 30);
    CHECK(kept(12, 6));
    CHECK(!kept(2, 2));

    const BinaryMask single = rect_mask(10, 10, 3, 3, 4, 4);
    CHECK((largest_component(single) == single).all());

    CHECK_THROWS_AS(largest_component(BinaryMask::Constant(8, 8, false)),
                    EmptyMaskError);
}

TEST_CASE("largest_component breaks area ties in raster order") {
    BinaryMask m = rect_mask(20, 20, 1, 1, 2, 2);
    m = m || rect_mask(20, 20, 10, 10, 2, 2);
    const BinaryMask kept = largest_component(m);
    CHECK(kept(1, 1));
    CHECK(!kept(10, 10));
}

TEST_CASE("morph_refine") {
    // A blob smaller than the disk is annihilated.
    CHECK(morph_refine(rect_mask(32, 32, 10, 10, 3, 3), 5).count() == 0);

    // A large rectangle survives up to rounded corners.
    const BinaryMask rect = rect_mask(64, 64, 10, 10, 28, 40);
    const BinaryMask opened = morph_refine(rect, 5);
    CHECK((opened && !rect).count() == 0);  // opening is anti-extensive
    for (int y = 16; y < 32; ++y)
        for (int x = 16; x < 44; ++x) CHECK(opened(y, x));  // interior retained
    CHECK(opened(10, 30));  // straight edge midpoints survive
    CHECK(opened(37, 30));
    CHECK(!opened(10, 10));  // corners round off

    CHECK_THROWS_AS(morph_refine(rect, 0), std::invalid_argument);
}

TEST_CASE("morph_refine is idempotent") {
    const BinaryMask m = test::random_mask(48, 48, 31, 0.45);
    const BinaryMask once = morph_refine(m, 3);
    const BinaryMask twice = morph_refine(once, 3);
    CHECK((once == twice).all());
}

TEST_CASE("fill_holes") {
    const int n = 32;
    BinaryMask annulus(n, n), disk(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double r = std::hypot(x - 15.5, y - 15.5);
            annulus(y, x) = r <= 10.0 && r > 4.0;
            disk(y, x) = r <= 10.0;
        }
    CHECK((fill_holes(annulus) == disk).all());
    CHECK((fill_holes(disk) == disk).all());

    // A cavity open to the border is not a hole.
    BinaryMask u_shape = BinaryMask::Constant(16, 16, false);
    for (int y = 0; y <= 12; ++y) u_shape(y, 4) = u_shape(y, 12) = true;
    for (int x = 4; x <= 12; ++x) u_shape(12, x) = true;
    CHECK((fill_holes(u_shape) == u_shape).all());
}

TEST_CASE("fill_holes never removes foreground") {
    const BinaryMask m = test::random_mask(40, 40, 71, 0.35);
    const BinaryMask filled = fill_holes(m);
    CHECK((m && !filled).count() == 0);
}

TEST_CASE("extract_leaf recovers a synthetic leaf on textured background") {
    SynthSpec spec;
    spec.width = 256;
    spec.height = 256;
    spec.leaf_rx_frac = 0.72;
    spec.leaf_ry_frac = 0.71;  // ~40% of the frame by area
    spec.background = BackgroundKind::kTwoTone;
    spec.seed = 5;
    const SynthResult synth = generate(spec);

    const auto [masked, leaf] = extract_leaf(synth.image);
    CHECK(test::mask_iou(leaf.mask, synth.leaf_truth.mask) >= 0.90);
    CHECK(test::count_components(leaf.mask) == 1);
    CHECK(!test::has_enclosed_holes(leaf.mask));
    CHECK(leaf.pixels == leaf.mask.count());
    CHECK(leaf.pixels >= static_cast<std::int64_t>(0.005 * 256 * 256));

    // Outside the mask exactly black, inside bit-identical to the input.
    int mismatches = 0;
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x)
            for (int c = 0; c < 3; ++c) {
                const std::uint8_t expected =
                    leaf.mask(y, x) ? synth.image.at(x, y, c) : 0;
                mismatches += masked.at(x, y, c) != expected;
            }
    CHECK(mismatches == 0);
}

TEST_CASE("extract_leaf rejects specks and sub-minimum blobs") {
    // A 4x4 colored square: salient, but the opening disk annihilates it.
    RasterImage tiny(128, 128, 3, 110);
    for (int y = 60; y < 64; ++y)
        for (int x = 60; x < 64; ++x) {
            tiny.at(x, y, 0) = 30;
            tiny.at(x, y, 1) = 160;
            tiny.at(x, y, 2) = 40;
        }
    CHECK_THROWS_AS(extract_leaf(tiny), NoForegroundError);

    // A 14x14 square survives the opening but sits below min_leaf_fraction
    // of a 512x512 frame.
    RasterImage speck(512, 512, 3, 110);
    for (int y = 250; y < 264; ++y)
        for (int x = 250; x < 264; ++x) {
            speck.at(x, y, 0) = 30;
            speck.at(x, y, 1) = 160;
            speck.at(x, y, 2) = 40;
        }
    CHECK_THROWS_AS(extract_leaf(speck), NoForegroundError);
}

TEST_CASE("extract_leaf rejects a uniform image") {
    RasterImage img(64, 64, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i] = 80;
        img.data[3 * i + 1] = 120;
        img.data[3 * i + 2] = 60;
    }
    CHECK_THROWS_AS(extract_leaf(img), NoForegroundError);
}

TEST_CASE("extract_leaf is deterministic") {
    SynthSpec spec;
    spec.width = 128;
    spec.height = 128;
    spec.leaf_rx_frac = 0.6;
    spec.leaf_ry_frac = 0.5;
    spec.seed = 9;
    const SynthResult synth = generate(spec);
    const auto [img_a, leaf_a] = extract_leaf(synth.image);
    const auto [img_b, leaf_b] = extract_leaf(synth.image);
    CHECK(img_a.data == img_b.data);
    CHECK((leaf_a.mask == leaf_b.mask).all());
}
