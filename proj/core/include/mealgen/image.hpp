#pragma once

#include <cstdint>
#include <vector>

namespace mealgen {

// Row-major raster with C interleaved channels per pixel.
template <typename T, int C>
struct Image {
    int width = 0, height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h * C, fill) {}

    T& at(int x, int y, int c = 0) { return data[(static_cast<size_t>(y) * width + x) * C + c]; }
    const T& at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * C + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    bool operator==(const Image& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

using RgbImage = Image<uint8_t, 3>;    // 8-bit RGB
using MaskImage = Image<uint16_t, 1>;  // semantic / instance ids, 0 = background
using BinaryMask = Image<uint8_t, 1>;  // amodal silhouettes, 0 or 1
using DepthMap = Image<float, 1>;      // meters along camera forward; +inf = background

} // namespace mealgen
