#pragma once

#include <cstddef>
#include <vector>

#include "pdmatch/rng.hpp"

namespace pdmatch {

// H x W x C image of doubles in (nominally) [-1, 1], row-major,
// channel-interleaved. Channels are 1 (gray) or 3 (RGB).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  static Image zeros(int height, int width, int channels);

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t value_count() const { return data.size(); }
  int min_dim() const { return height < width ? height : width; }
  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width && channels == other.channels;
  }
};

bool bitwise_equal(const Image& a, const Image& b);

// Clamp every value to [-1, 1].
Image clip(Image img);

// Bilinear resampling with pixel-center alignment and edge clamping.
// Interpolation is written in lerp form so constant images are preserved
// exactly and identity sizes return a bit-identical copy.
Image resize(const Image& img, int new_height, int new_width);

struct PyramidConfig {
  double ratio = 0.85;   // downscale factor per level, in (0, 1)
  int coarse_dim = 28;   // stop before min(H, W) would fall below this
};

// Coarse-to-fine pyramid; the finest level is the input itself, untouched.
// Working dimensions are tracked as floats and rounded half-up per level;
// construction stops before either rounded dimension drops below coarse_dim.
std::vector<Image> build_pyramid(const Image& img, const PyramidConfig& cfg);

// Add i.i.d. N(0, sigma^2) to every value. No clipping here; clipping happens
// at the end of each synthesis level.
Image add_noise(const Image& img, double sigma, Rng& rng);

// Separable Gaussian blur, kernel truncated at 2*sigma, edge clamped.
// sigma <= 0 returns the input unchanged.
Image gaussian_blur(const Image& img, double sigma);

}  // namespace pdmatch
