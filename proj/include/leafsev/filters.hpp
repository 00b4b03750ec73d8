#pragma once

#include "leafsev/types.hpp"

namespace leafsev {

// Separable [1 4 6 4 1]/16 convolution, horizontal then vertical,
// borders replicated.
FloatMap binomial_blur5(const FloatMap& map);

// Separable Gaussian with kernel radius ceil(3 sigma), borders replicated.
FloatMap gaussian_blur(const FloatMap& map, double sigma);

// Mean of all samples of a 1-channel image.
double mean_intensity(const RasterImage& img);

// Float view of a single channel.
FloatMap channel_to_map(const RasterImage& img, int channel);

}  // namespace leafsev
