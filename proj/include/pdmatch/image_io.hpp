#pragma once

#include <string>

#include "pdmatch/image.hpp"

namespace pdmatch {

// Decode an 8-bit PNG or JPEG (sniffed by magic bytes, not extension).
// 8-bit value u maps to 2*u/255 - 1. Grayscale gives C=1, color C=3;
// alpha channels are stripped. 16-bit PNGs are rejected with a decode error.
Image load_image(const std::string& path);

// Write an 8-bit PNG. Values are clipped to [-1, 1], then quantized with
// round(255 * (v + 1) / 2).
void save_image(const Image& img, const std::string& path);

}  // namespace pdmatch
