#include "leafsev/color.hpp"

#include <cmath>

namespace leafsev {

namespace {

constexpr double kYr = 0.299;
constexpr double kYg = 0.587;
constexpr double kYb = 0.114;

double srgb_decode(double v8) {
    const double u = v8 / 255.0;
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double kDelta = 6.0 / 29.0;
    return t > kDelta * kDelta * kDelta
               ? std::cbrt(t)
               : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

RasterImage to_gray(const RasterImage& img) {
    if (img.channels != 3)
        throw std::invalid_argument("to_gray: expected a 3-channel image");
    RasterImage out(img.width, img.height, 1);
    const std::uint8_t* src = img.data.data();
    std::uint8_t* dst = out.data.data();
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double g = kYr * src[3 * i] + kYg * src[3 * i + 1] + kYb * src[3 * i + 2];
        const long r = std::lround(g);
        dst[i] = static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
    }
    return out;
}

LabImage rgb_to_lab(const RasterImage& img) {
    if (img.channels != 3)
        throw std::invalid_argument("rgb_to_lab: expected a 3-channel image");
    // D65 reference white.
    constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

    LabImage lab{FloatMap(img.height, img.width), FloatMap(img.height, img.width),
                 FloatMap(img.height, img.width)};
    // 256-entry decode table; the pixel loop then stays in linear light.
    double lut[256];
    for (int v = 0; v < 256; ++v) lut[v] = srgb_decode(v);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double r = lut[img.at(x, y, 0)];
            const double g = lut[img.at(x, y, 1)];
            const double b = lut[img.at(x, y, 2)];
            const double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
            const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
            const double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
            const double fx = lab_f(X / kXn);
            const double fy = lab_f(Y / kYn);
            const double fz = lab_f(Z / kZn);
            lab.l(y, x) = 116.0 * fy - 16.0;
            lab.a(y, x) = 500.0 * (fx - fy);
            lab.b(y, x) = 200.0 * (fy - fz);
        }
    }
    return lab;
}

YuvImage rgb_to_yuv(const RasterImage& img) {
    if (img.channels != 3)
        throw std::invalid_argument("rgb_to_yuv: expected a 3-channel image");
    YuvImage yuv{FloatMap(img.height, img.width), FloatMap(img.height, img.width),
                 FloatMap(img.height, img.width)};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double r = img.at(x, y, 0);
            const double g = img.at(x, y, 1);
            const double b = img.at(x, y, 2);
            const double luma = kYr * r + kYg * g + kYb * b;
            yuv.y(y, x) = luma;
            yuv.u(y, x) = 0.492 * (b - luma);
            yuv.v(y, x) = 0.877 * (r - luma);
        }
    }
    return yuv;
}

}  // namespace leafsev
