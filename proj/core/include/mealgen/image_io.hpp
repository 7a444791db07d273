#pragma once

#include <string>

#include "mealgen/image.hpp"

namespace mealgen {

// PNG (via libpng). Masks use 16-bit grayscale, amodal masks 8-bit grayscale
// (0 / 255 on disk, 0 / 1 in memory). All throw Error(Io/Parse) on failure.
void write_png_rgb(const std::string& path, const RgbImage& img);
RgbImage read_png_rgb(const std::string& path);

void write_png_gray16(const std::string& path, const MaskImage& img);
MaskImage read_png_gray16(const std::string& path);

void write_png_gray8(const std::string& path, const BinaryMask& img);
BinaryMask read_png_gray8(const std::string& path);

// PFM, grayscale ("Pf"), little-endian (scale -1.0), rows bottom-to-top as
// the format prescribes. Background pixels carry +inf.
void write_pfm(const std::string& path, const DepthMap& img);
DepthMap read_pfm(const std::string& path);

} // namespace mealgen
