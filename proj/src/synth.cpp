#include "leafsev/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace leafsev {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Position-keyed jitter so rendering order never matters.
int pixel_jitter(std::uint32_t seed, int x, int y, int channel, int amplitude) {
    if (amplitude <= 0) return 0;
    const std::uint64_t key = (static_cast<std::uint64_t>(seed) << 32) ^
                              (static_cast<std::uint64_t>(y) << 20) ^
                              (static_cast<std::uint64_t>(x) << 2) ^
                              static_cast<std::uint64_t>(channel);
    const std::uint64_t h = splitmix64(key);
    return static_cast<int>(h % (2 * amplitude + 1)) - amplitude;
}

std::uint8_t clamp_byte(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

struct Ellipse {
    double cx, cy, rx, ry, cos_t, sin_t;

    double norm_radius(double x, double y) const {
        const double dx = x - cx;
        const double dy = y - cy;
        const double u = (dx * cos_t + dy * sin_t) / rx;
        const double v = (-dx * sin_t + dy * cos_t) / ry;
        return std::sqrt(u * u + v * v);
    }
};

std::array<int, 3> lerp_color(const std::array<int, 3>& a,
                              const std::array<int, 3>& b, double t) {
    return {static_cast<int>(std::lround(a[0] + t * (b[0] - a[0]))),
            static_cast<int>(std::lround(a[1] + t * (b[1] - a[1]))),
            static_cast<int>(std::lround(a[2] + t * (b[2] - a[2])))};
}

// Smoothly interpolated value noise over a coarse lattice.
class ValueNoise {
public:
    ValueNoise(std::uint32_t seed, int cell) : seed_(seed), cell_(cell) {}

    double at(int x, int y) const {
        const double fx = static_cast<double>(x) / cell_;
        const double fy = static_cast<double>(y) / cell_;
        const int x0 = static_cast<int>(std::floor(fx));
        const int y0 = static_cast<int>(std::floor(fy));
        const double tx = smooth(fx - x0);
        const double ty = smooth(fy - y0);
        const double v00 = lattice(x0, y0);
        const double v10 = lattice(x0 + 1, y0);
        const double v01 = lattice(x0, y0 + 1);
        const double v11 = lattice(x0 + 1, y0 + 1);
        const double a = v00 + tx * (v10 - v00);
        const double b = v01 + tx * (v11 - v01);
        return a + ty * (b - a);
    }

private:
    static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

    double lattice(int x, int y) const {
        const std::uint64_t key = (static_cast<std::uint64_t>(seed_) << 32) ^
                                  (static_cast<std::uint64_t>(x) << 16) ^
                                  static_cast<std::uint64_t>(y & 0xFFFF);
        return static_cast<double>(splitmix64(key) >> 11) /
               static_cast<double>(1ULL << 53);
    }

    std::uint32_t seed_;
    int cell_;
};

std::array<int, 3> background_color(const SynthSpec& spec, const ValueNoise& noise,
                                    int x, int y) {
    // Desaturated browns: small red-minus-luma so they sit far from the
    // lesion side of the V axis.
    static constexpr std::array<int, 3> kBrownA = {98, 88, 72};
    static constexpr std::array<int, 3> kBrownB = {120, 107, 88};
    switch (spec.background) {
        case BackgroundKind::kUniform:
            return kBrownA;
        case BackgroundKind::kTwoTone: {
            const int block = std::max(32, std::max(spec.width, spec.height) / 4);
            const bool odd = ((x / block) + (y / block)) % 2 != 0;
            return odd ? kBrownB : kBrownA;
        }
        case BackgroundKind::kFoliageNoise:
            return lerp_color(kBrownA, kBrownB, noise.at(x, y));
    }
    return kBrownA;
}

}  // namespace

void SynthSpec::validate() const {
    if (width < 32 || height < 32)
        throw std::invalid_argument("synth: image must be at least 32x32");
    if (!(leaf_rx_frac > 0.0 && leaf_rx_frac <= 0.95) ||
        !(leaf_ry_frac > 0.0 && leaf_ry_frac <= 0.95))
        throw std::invalid_argument("synth: leaf axis fractions must be in (0, 0.95]");
    if (!(damage_fraction >= 0.0 && damage_fraction <= 0.9))
        throw std::invalid_argument("synth: damage fraction must be in [0, 0.9]");
    if (!(brightness > 0.0))
        throw std::invalid_argument("synth: brightness must be positive");
    if (color_jitter < 0) throw std::invalid_argument("synth: negative jitter");
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    const int w = spec.width;
    const int h = spec.height;

    const double theta = spec.rotation_deg * kPi / 180.0;
    const Ellipse leaf{w / 2.0,
                       h / 2.0,
                       spec.leaf_rx_frac * (w / 2.0),
                       spec.leaf_ry_frac * (h / 2.0),
                       std::cos(theta),
                       std::sin(theta)};

    BinaryMask leaf_mask(h, w);
    std::int64_t leaf_count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            leaf_mask(y, x) = leaf.norm_radius(x, y) <= 1.0;
            leaf_count += leaf_mask(y, x);
        }
    }
    if (leaf_count == 0) throw InfeasibleSpecError("leaf ellipse rasterizes empty");

    // Carve circular lesions until the damage count reaches the target.
    // Lesions stay clear of the leaf rim so blur never bleeds them into
    // the background during extraction.
    BinaryMask damage_mask = BinaryMask::Constant(h, w, false);
    std::int64_t damage_count = 0;
    const std::int64_t target =
        std::llround(spec.damage_fraction * static_cast<double>(leaf_count));
    const std::int64_t tol =
        std::max<std::int64_t>(1, std::llround(0.01 * static_cast<double>(leaf_count)));

    std::mt19937 rng(spec.seed);
    const double min_axis = std::min(leaf.rx, leaf.ry);
    const int rim_guard = 10;
    const int max_radius = std::max(2, static_cast<int>(min_axis / 8.0));
    std::uniform_int_distribution<int> px_dist(0, w - 1);
    std::uniform_int_distribution<int> py_dist(0, h - 1);

    int attempts = 0;
    const int max_attempts = 200000;
    while (damage_count < target - tol && attempts < max_attempts) {
        ++attempts;
        const std::int64_t remaining = target - damage_count;
        int radius = static_cast<int>(
            std::lround(std::sqrt(static_cast<double>(remaining) / kPi)));
        radius = std::clamp(radius, 1, max_radius);

        const int cx = px_dist(rng);
        const int cy = py_dist(rng);

        bool placed = false;
        for (int r = radius; r >= 1 && !placed; r = r / 2) {
            const double allowed = 1.0 - (r + rim_guard) / min_axis;
            if (allowed <= 0.0) continue;
            if (leaf.norm_radius(cx, cy) > allowed) continue;

            std::int64_t fresh = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (dx * dx + dy * dy <= r * r) {
                        const int xx = cx + dx;
                        const int yy = cy + dy;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        fresh += leaf_mask(yy, xx) && !damage_mask(yy, xx);
                    }
            if (fresh == 0 || damage_count + fresh > target + tol) continue;

            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    if (dx * dx + dy * dy <= r * r) {
                        const int xx = cx + dx;
                        const int yy = cy + dy;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        if (leaf_mask(yy, xx) && !damage_mask(yy, xx)) {
                            damage_mask(yy, xx) = true;
                            ++damage_count;
                        }
                    }
            placed = true;
        }
    }
    if (std::abs(damage_count - target) > tol)
        throw InfeasibleSpecError("cannot reach requested damage fraction");

    RasterImage image(w, h, 3);
    const ValueNoise noise(spec.seed ^ 0xA5A5A5A5u, std::max(16, std::min(w, h) / 8));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::array<int, 3> base;
            bool jittered = true;
            if (damage_mask(y, x))
                base = spec.lesion_color;
            else if (leaf_mask(y, x))
                base = spec.leaf_color;
            else {
                base = background_color(spec, noise, x, y);
                jittered = false;
            }
            for (int c = 0; c < 3; ++c) {
                const int j =
                    jittered ? pixel_jitter(spec.seed, x, y, c, spec.color_jitter) : 0;
                image.at(x, y, c) = clamp_byte((base[c] + j) * spec.brightness);
            }
        }
    }

    return SynthResult{std::move(image),
                       LeafMask{std::move(leaf_mask), leaf_count},
                       DamageMask{std::move(damage_mask), damage_count}};
}

const char* background_kind_name(BackgroundKind kind) {
    switch (kind) {
        case BackgroundKind::kUniform: return "uniform";
        case BackgroundKind::kTwoTone: return "two-tone";
        case BackgroundKind::kFoliageNoise: return "foliage-noise";
    }
    return "uniform";
}

BackgroundKind background_kind_from_name(const std::string& name) {
    if (name == "uniform") return BackgroundKind::kUniform;
    if (name == "two-tone" || name == "two_tone") return BackgroundKind::kTwoTone;
    if (name == "foliage-noise" || name == "foliage")
        return BackgroundKind::kFoliageNoise;
    throw std::invalid_argument("unknown background kind: " + name);
}

}  // namespace leafsev
