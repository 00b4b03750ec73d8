#include "leafsev/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace leafsev {

namespace {

// 1-D convolution along both axes with clamped (replicated) indexing.
FloatMap separable_convolve(const FloatMap& map, const std::vector<double>& kernel) {
    const int h = static_cast<int>(map.rows());
    const int w = static_cast<int>(map.cols());
    const int radius = static_cast<int>(kernel.size()) / 2;

    FloatMap horiz(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, w - 1);
                acc += kernel[k + radius] * map(y, xx);
            }
            horiz(y, x) = acc;
        }
    }
    FloatMap out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                acc += kernel[k + radius] * horiz(yy, x);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

}  // namespace

FloatMap binomial_blur5(const FloatMap& map) {
    static const std::vector<double> kernel = {1.0 / 16, 4.0 / 16, 6.0 / 16,
                                               4.0 / 16, 1.0 / 16};
    return separable_convolve(map, kernel);
}

FloatMap gaussian_blur(const FloatMap& map, double sigma) {
    if (sigma <= 0.0) return map;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        sum += kernel[k + radius];
    }
    for (double& v : kernel) v /= sum;
    return separable_convolve(map, kernel);
}

double mean_intensity(const RasterImage& img) {
    if (img.channels != 1)
        throw std::invalid_argument("mean_intensity: expected a 1-channel image");
    double acc = 0.0;
    for (std::uint8_t v : img.data) acc += v;
    return acc / static_cast<double>(img.pixel_count());
}

FloatMap channel_to_map(const RasterImage& img, int channel) {
    if (channel < 0 || channel >= img.channels)
        throw std::invalid_argument("channel_to_map: channel out of range");
    FloatMap out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out(y, x) = img.at(x, y, channel);
    return out;
}

}  // namespace leafsev
