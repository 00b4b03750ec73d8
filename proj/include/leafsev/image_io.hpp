#pragma once

#include <filesystem>

#include "leafsev/types.hpp"

namespace leafsev {

// Decode a PNG or JPEG (sniffed by magic bytes) into an 8-bit 1- or
// 3-channel raster. Palette images expand to RGB, 16-bit depth narrows to
// 8, and alpha is dropped with a warning on stderr.
RasterImage load_image(const std::filesystem::path& path);

// Encoders pick the format from the loaded/served image path extension.
void save_png(const std::filesystem::path& path, const RasterImage& img);
void save_jpeg(const std::filesystem::path& path, const RasterImage& img,
               int quality = 92);

// Grayscale helpers for masks and normalized float maps.
RasterImage mask_to_image(const BinaryMask& mask);
RasterImage map_to_image(const FloatMap& map);  // min..max stretched to 0..255

}  // namespace leafsev
