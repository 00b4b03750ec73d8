#include "leafsev/enhance.hpp"

#include <cmath>

#include "leafsev/color.hpp"
#include "leafsev/filters.hpp"

namespace leafsev {

namespace {
constexpr double kHalfEpsilon = 1e-9;
}

GammaDecision auto_gamma(const RasterImage& gray, GammaLimits limits) {
    if (gray.channels != 1)
        throw std::invalid_argument("auto_gamma: expected a 1-channel image");
    GammaDecision d;
    d.i_avg = mean_intensity(gray);
    d.r = d.i_avg / 255.0;
    if (std::abs(d.r - 0.5) <= kHalfEpsilon)
        d.gamma_raw = 1.0;
    else if (d.r > 0.5)
        d.gamma_raw = 10.0 * d.r - 4.0;
    else
        d.gamma_raw = std::pow(d.r, 0.1) - 0.4;
    d.gamma_clamped = std::clamp(d.gamma_raw, limits.min, limits.max);
    return d;
}

GammaLut build_lut(double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("build_lut: gamma must be positive");
    GammaLut lut;
    lut.gamma = gamma;
    const double inv = 1.0 / gamma;
    for (int v = 0; v < 256; ++v) {
        const double mapped = 255.0 * std::pow(v / 255.0, inv);
        const long r = std::lround(mapped);
        lut.table[v] = static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
    }
    return lut;
}

RasterImage apply_lut(const RasterImage& img, const GammaLut& lut) {
    RasterImage out = img;
    for (std::uint8_t& v : out.data) v = lut.table[v];
    return out;
}

std::pair<RasterImage, GammaDecision> enhance_contrast(const RasterImage& img,
                                                       GammaLimits limits) {
    if (img.channels != 3)
        throw std::invalid_argument("enhance_contrast: expected a 3-channel image");
    const GammaDecision decision = auto_gamma(to_gray(img), limits);
    return {apply_lut(img, build_lut(decision.gamma_clamped)), decision};
}

}  // namespace leafsev
