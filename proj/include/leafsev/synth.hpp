#pragma once

#include <array>
#include <cstdint>

#include "leafsev/background.hpp"
#include "leafsev/segment.hpp"
#include "leafsev/types.hpp"

namespace leafsev {

enum class BackgroundKind { kUniform, kTwoTone, kFoliageNoise };

struct SynthSpec {
    int width = 512;
    int height = 512;
    // Ellipse semi-axes as fractions of the half-extents, plus rotation.
    double leaf_rx_frac = 0.55;
    double leaf_ry_frac = 0.42;
    double rotation_deg = 18.0;
    std::array<int, 3> leaf_color = {45, 110, 40};
    double damage_fraction = 0.0;  // p in [0, 0.9]
    std::array<int, 3> lesion_color = {215, 140, 35};
    std::uint32_t seed = 0;
    BackgroundKind background = BackgroundKind::kUniform;
    double brightness = 1.0;
    int color_jitter = 12;

    void validate() const;
};

struct SynthResult {
    RasterImage image;
    LeafMask leaf_truth;
    DamageMask damage_truth;
};

// Renders a jittered leaf ellipse with circular lesions over the requested
// background and returns exact rasterizer-counted truth masks. The damage
// pixel count lands within 1% of damage_fraction * |leaf| or the call
// throws InfeasibleSpecError.
SynthResult generate(const SynthSpec& spec);

const char* background_kind_name(BackgroundKind kind);
BackgroundKind background_kind_from_name(const std::string& name);

}  // namespace leafsev
