#pragma once

#include "leafsev/color.hpp"
#include "leafsev/types.hpp"

namespace leafsev {

struct BackgroundParams {
    double canny_sigma = 1.4;
    double canny_low_pct = 0.70;   // hysteresis thresholds as percentiles of
    double canny_high_pct = 0.90;  // the nonzero gradient magnitudes
    int disk_radius = 5;
    int a_exponent = 4;  // exponent of the a-channel salience term, 2 or 4
    double min_leaf_fraction = 0.005;

    void validate() const;
};

struct LeafMask {
    BinaryMask mask;
    std::int64_t pixels = 0;
};

// Per-stage masks kept for diagnostics.
struct BackgroundTrace {
    FloatMap salience;
    BinaryMask threshold;
    BinaryMask edges;
    BinaryMask fused;
    BinaryMask final;
};

// Salience from already-converted Lab planes:
//   O = (mean_l - blur(l))^2 + (mean_a - blur(a))^a_exp + (mean_b - blur(b))^2
// where the means are taken over the unblurred planes.
FloatMap salience_from_lab(const LabImage& lab, int a_exponent);

// rgb_to_lab + salience_from_lab.
FloatMap salience_map(const RasterImage& img, int a_exponent = 4);

// Foreground = salience strictly above its own mean.
BinaryMask adaptive_threshold(const FloatMap& salience);

// Gaussian smooth, Sobel, non-maximum suppression, percentile double
// threshold, hysteresis linking.
BinaryMask canny_edges(const RasterImage& gray, const BackgroundParams& params);

// Pixel-wise OR then a single 3x3 closing.
BinaryMask fuse_masks(const BinaryMask& thresh, const BinaryMask& edges);

// Keep only the 8-connected component of maximal area (ties: first in
// raster order). Throws EmptyMaskError on an all-background mask.
BinaryMask largest_component(const BinaryMask& mask);

// Morphological opening with a discrete Euclidean disk.
BinaryMask morph_refine(const BinaryMask& mask, int disk_radius);

// Background flood fill from the border (4-connected); unreached
// background becomes foreground.
BinaryMask fill_holes(const BinaryMask& mask);

// Full background-removal chain. Returns the masked image (non-leaf pixels
// zeroed) and the leaf mask. Throws NoForegroundError when any stage comes
// up empty or the final mask is below min_leaf_fraction of the image.
std::pair<RasterImage, LeafMask> extract_leaf(const RasterImage& img,
                                              const BackgroundParams& params = {},
                                              BackgroundTrace* trace = nullptr);

}  // namespace leafsev
