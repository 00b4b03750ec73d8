#pragma once

#include <array>

#include "leafsev/types.hpp"

namespace leafsev {

struct GammaLimits {
    double min = 0.1;
    double max = 10.0;
};

// The automatic gamma choice for one image: mean gray intensity, its
// normalization to [0,1], and the raw/clamped gamma derived from it.
struct GammaDecision {
    double i_avg = 0.0;
    double r = 0.0;
    double gamma_raw = 0.0;
    double gamma_clamped = 0.0;
};

// 256-entry intensity remap table[v] = round(255 (v/255)^(1/gamma)).
struct GammaLut {
    double gamma = 1.0;
    std::array<std::uint8_t, 256> table{};
};

// Gamma from the mean gray intensity:
//   10r - 4        for r > 0.5
//   1              for r = 0.5 (|r - 0.5| <= 1e-9)
//   r^0.1 - 0.4    for r < 0.5
// clamped into [limits.min, limits.max].
GammaDecision auto_gamma(const RasterImage& gray, GammaLimits limits = {});

// Rejects gamma <= 0.
GammaLut build_lut(double gamma);

// Table lookup per sample, every channel; dimensions preserved.
RasterImage apply_lut(const RasterImage& img, const GammaLut& lut);

// to_gray -> auto_gamma -> build_lut -> apply_lut on all three channels.
std::pair<RasterImage, GammaDecision> enhance_contrast(const RasterImage& img,
                                                       GammaLimits limits = {});

}  // namespace leafsev
