#include "leafsev/background.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "leafsev/filters.hpp"

namespace leafsev {

namespace {

// Offsets of a discrete disk: all |(dx,dy)| <= radius.
std::vector<std::pair<int, int>> disk_offsets(int radius) {
    std::vector<std::pair<int, int>> offs;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
    return offs;
}

// Erosion treats out-of-image as background, dilation clips at the border.
BinaryMask erode(const BinaryMask& mask, const std::vector<std::pair<int, int>>& se) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    BinaryMask out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool keep = mask(y, x);
            for (std::size_t i = 0; keep && i < se.size(); ++i) {
                const int xx = x + se[i].first;
                const int yy = y + se[i].second;
                keep = xx >= 0 && xx < w && yy >= 0 && yy < h && mask(yy, xx);
            }
            out(y, x) = keep;
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, const std::vector<std::pair<int, int>>& se) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    BinaryMask out = BinaryMask::Constant(h, w, false);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            for (const auto& [dx, dy] : se) {
                const int xx = x + dx;
                const int yy = y + dy;
                if (xx >= 0 && xx < w && yy >= 0 && yy < h) out(yy, xx) = true;
            }
        }
    }
    return out;
}

const std::vector<std::pair<int, int>>& square3_offsets() {
    static const std::vector<std::pair<int, int>> offs = {
        {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0},
        {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
    return offs;
}

// Nearest-rank percentile of a value set, q in (0,1).
double percentile(std::vector<double> values, double q) {
    const std::size_t n = values.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n) k = n;
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

}  // namespace

void BackgroundParams::validate() const {
    if (!(canny_sigma > 0.0)) throw std::invalid_argument("canny_sigma must be > 0");
    if (!(canny_low_pct > 0.0 && canny_low_pct < canny_high_pct && canny_high_pct < 1.0))
        throw std::invalid_argument("require 0 < canny_low_pct < canny_high_pct < 1");
    if (disk_radius < 1) throw std::invalid_argument("disk_radius must be >= 1");
    if (a_exponent != 2 && a_exponent != 4)
        throw std::invalid_argument("a_exponent must be 2 or 4");
    if (!(min_leaf_fraction >= 0.0 && min_leaf_fraction < 1.0))
        throw std::invalid_argument("min_leaf_fraction must be in [0, 1)");
}

FloatMap salience_from_lab(const LabImage& lab, int a_exponent) {
    if (a_exponent != 2 && a_exponent != 4)
        throw std::invalid_argument("a_exponent must be 2 or 4");
    const double mean_l = lab.l.mean();
    const double mean_a = lab.a.mean();
    const double mean_b = lab.b.mean();
    const FloatMap dl = mean_l - binomial_blur5(lab.l);
    const FloatMap da = mean_a - binomial_blur5(lab.a);
    const FloatMap db = mean_b - binomial_blur5(lab.b);
    const FloatMap a_sq = da.square();
    const FloatMap a_term = a_exponent == 4 ? FloatMap(a_sq.square()) : a_sq;
    return dl.square() + a_term + db.square();
}

FloatMap salience_map(const RasterImage& img, int a_exponent) {
    return salience_from_lab(rgb_to_lab(img), a_exponent);
}

BinaryMask adaptive_threshold(const FloatMap& salience) {
    return salience > salience.mean();
}

BinaryMask canny_edges(const RasterImage& gray, const BackgroundParams& params) {
    if (gray.channels != 1)
        throw std::invalid_argument("canny_edges: expected a 1-channel image");
    const int h = gray.height;
    const int w = gray.width;
    const FloatMap smoothed = gaussian_blur(channel_to_map(gray, 0), params.canny_sigma);

    auto clamped = [&](int y, int x) {
        return smoothed(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
    };

    FloatMap gx(h, w), gy(h, w), mag(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double p00 = clamped(y - 1, x - 1), p01 = clamped(y - 1, x),
                         p02 = clamped(y - 1, x + 1), p10 = clamped(y, x - 1),
                         p12 = clamped(y, x + 1), p20 = clamped(y + 1, x - 1),
                         p21 = clamped(y + 1, x), p22 = clamped(y + 1, x + 1);
            gx(y, x) = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
            gy(y, x) = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
            mag(y, x) = std::hypot(gx(y, x), gy(y, x));
        }
    }

    std::vector<double> nonzero;
    nonzero.reserve(static_cast<std::size_t>(h) * w / 4);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mag(y, x) > 0.0) nonzero.push_back(mag(y, x));
    if (nonzero.empty()) return BinaryMask::Constant(h, w, false);

    const double low = percentile(nonzero, params.canny_low_pct);
    const double high = percentile(std::move(nonzero), params.canny_high_pct);

    // Non-maximum suppression along the quantized gradient direction. The
    // strict test on the -dir side keeps two-pixel plateaus single.
    BinaryMask candidate = BinaryMask::Constant(h, w, false);
    auto mag_at = [&](int y, int x) {
        return (x < 0 || x >= w || y < 0 || y >= h) ? 0.0 : mag(y, x);
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = mag(y, x);
            if (m <= 0.0) continue;
            const double angle = std::atan2(gy(y, x), gx(y, x));
            const int oct = static_cast<int>(std::lround(angle * 4.0 / M_PI)) & 3;
            static constexpr int kDx[4] = {1, 1, 0, -1};
            static constexpr int kDy[4] = {0, 1, 1, 1};
            const double before = mag_at(y - kDy[oct], x - kDx[oct]);
            const double after = mag_at(y + kDy[oct], x + kDx[oct]);
            candidate(y, x) = m > before && m >= after;
        }
    }

    // Hysteresis: grow strong candidates through weak ones, 8-connected.
    BinaryMask edges = BinaryMask::Constant(h, w, false);
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (candidate(y, x) && mag(y, x) >= high) {
                edges(y, x) = true;
                stack.emplace_back(x, y);
            }
    while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = cx + dx;
                const int yy = cy + dy;
                if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                if (edges(yy, xx) || !candidate(yy, xx) || mag(yy, xx) < low) continue;
                edges(yy, xx) = true;
                stack.emplace_back(xx, yy);
            }
        }
    }
    return edges;
}

BinaryMask fuse_masks(const BinaryMask& thresh, const BinaryMask& edges) {
    if (thresh.rows() != edges.rows() || thresh.cols() != edges.cols())
        throw std::invalid_argument("fuse_masks: dimension mismatch");
    const BinaryMask merged = thresh || edges;
    return erode(dilate(merged, square3_offsets()), square3_offsets());
}

BinaryMask largest_component(const BinaryMask& mask) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    Plane<int> label = Plane<int>::Constant(h, w, -1);
    std::int64_t best_area = 0;
    int best_label = -1;
    int next_label = 0;
    std::vector<std::pair<int, int>> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x) || label(y, x) >= 0) continue;
            const int cur = next_label++;
            std::int64_t area = 0;
            label(y, x) = cur;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++area;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = cx + dx;
                        const int yy = cy + dy;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        if (!mask(yy, xx) || label(yy, xx) >= 0) continue;
                        label(yy, xx) = cur;
                        stack.emplace_back(xx, yy);
                    }
                }
            }
            if (area > best_area) {  // ties keep the earlier (raster-first) label
                best_area = area;
                best_label = cur;
            }
        }
    }
    if (best_label < 0) throw EmptyMaskError();
    return label == best_label;
}

BinaryMask morph_refine(const BinaryMask& mask, int disk_radius) {
    if (disk_radius < 1)
        throw std::invalid_argument("morph_refine: disk_radius must be >= 1");
    const auto se = disk_offsets(disk_radius);
    return dilate(erode(mask, se), se);
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    BinaryMask outside = BinaryMask::Constant(h, w, false);
    std::vector<std::pair<int, int>> stack;
    auto seed = [&](int x, int y) {
        if (!mask(y, x) && !outside(y, x)) {
            outside(y, x) = true;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        static constexpr int kDx[4] = {1, -1, 0, 0};
        static constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int xx = cx + kDx[k];
            const int yy = cy + kDy[k];
            if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
            if (mask(yy, xx) || outside(yy, xx)) continue;
            outside(yy, xx) = true;
            stack.emplace_back(xx, yy);
        }
    }
    return !outside;
}

std::pair<RasterImage, LeafMask> extract_leaf(const RasterImage& img,
                                              const BackgroundParams& params,
                                              BackgroundTrace* trace) {
    if (img.channels != 3)
        throw std::invalid_argument("extract_leaf: expected a 3-channel image");
    params.validate();

    const FloatMap salience = salience_map(img, params.a_exponent);
    const BinaryMask thresh = adaptive_threshold(salience);
    if (!thresh.any()) throw NoForegroundError("adaptive threshold");

    const BinaryMask edges = canny_edges(to_gray(img), params);
    const BinaryMask fused = fuse_masks(thresh, edges);
    if (!fused.any()) throw NoForegroundError("mask fusion");

    BinaryMask mask = largest_component(fused);
    mask = morph_refine(mask, params.disk_radius);
    if (!mask.any()) throw NoForegroundError("morphological opening");
    mask = largest_component(mask);  // opening can split the blob
    mask = fill_holes(mask);

    const std::int64_t pixels = mask.count();
    const double min_pixels = params.min_leaf_fraction * img.pixel_count();
    if (static_cast<double>(pixels) < min_pixels)
        throw NoForegroundError("leaf below minimum size");

    RasterImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (!mask(y, x))
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = 0;

    if (trace) {
        trace->salience = salience;
        trace->threshold = thresh;
        trace->edges = edges;
        trace->fused = fused;
        trace->final = mask;
    }
    return {std::move(out), LeafMask{std::move(mask), pixels}};
}

}  // namespace leafsev
