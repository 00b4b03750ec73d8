#pragma once

#include "leafsev/types.hpp"

namespace leafsev {

struct LabImage {
    FloatMap l;  // [0, 100]
    FloatMap a;
    FloatMap b;
};

struct YuvImage {
    FloatMap y;  // [0, 255]
    FloatMap u;  // signed, BT.601 full range
    FloatMap v;
};

// BT.601 luma, rounded to the nearest integer. Rejects 1-channel input.
RasterImage to_gray(const RasterImage& img);

// sRGB decode -> XYZ (D65) -> CIELab.
LabImage rgb_to_lab(const RasterImage& img);

// Analog BT.601 full-range: Y = 0.299R + 0.587G + 0.114B,
// U = 0.492 (B - Y), V = 0.877 (R - Y).
YuvImage rgb_to_yuv(const RasterImage& img);

}  // namespace leafsev
