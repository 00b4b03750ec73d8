#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace leafsev {

// Dense per-pixel plane, row-major so (row, col) indexing matches raster order.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FloatMap = Plane<double>;
using BinaryMask = Plane<bool>;

// 8-bit interleaved raster, 1 (gray) or 3 (RGB) channels.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        if (w < 1 || h < 1 || (c != 1 && c != 3))
            throw std::invalid_argument("RasterImage: bad dimensions");
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
    bool same_size(const RasterImage& o) const {
        return width == o.width && height == o.height;
    }
};

struct EmptyMaskError : std::runtime_error {
    EmptyMaskError() : std::runtime_error("mask has no foreground pixels") {}
};

struct NoForegroundError : std::runtime_error {
    explicit NoForegroundError(const std::string& stage)
        : std::runtime_error("no foreground object found (" + stage + ")") {}
};

struct DegenerateChannelError : std::runtime_error {
    DegenerateChannelError()
        : std::runtime_error("channel has fewer than 2 distinct values") {}
};

struct EmptyLeafError : std::runtime_error {
    EmptyLeafError() : std::runtime_error("leaf mask is empty") {}
};

struct InfeasibleSpecError : std::runtime_error {
    explicit InfeasibleSpecError(const std::string& why)
        : std::runtime_error("infeasible synth spec: " + why) {}
};

struct ImageIoError : std::runtime_error {
    explicit ImageIoError(const std::string& why) : std::runtime_error(why) {}
};

}  // namespace leafsev
