#pragma once

#include <cmath>
#include <cstdint>

#include "pdmatch/image.hpp"
#include "pdmatch/rng.hpp"

namespace fixtures {

inline pdmatch::Image random_image(int h, int w, int c, std::uint64_t seed) {
  pdmatch::Image img = pdmatch::Image::zeros(h, w, c);
  pdmatch::Rng rng(seed);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

// Colored speckle: per-pixel random binary contrast with a red tint.
inline pdmatch::Image speckle_texture(int h, int w, std::uint64_t seed) {
  pdmatch::Image img = pdmatch::Image::zeros(h, w, 3);
  pdmatch::Rng rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s = rng.uniform01() < 0.5 ? -0.6 : 0.6;
      img.at(y, x, 0) = 0.35 + s;
      img.at(y, x, 1) = -0.3 + 0.3 * s;
      img.at(y, x, 2) = -0.5 + 0.2 * s;
    }
  return pdmatch::clip(img);
}

// Smooth diagonal stripes with a blue tint.
inline pdmatch::Image stripe_texture(int h, int w, double period = 6.0) {
  pdmatch::Image img = pdmatch::Image::zeros(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double s = std::sin(2.0 * 3.14159265358979 * (x + y) / period);
      img.at(y, x, 0) = -0.55 + 0.15 * s;
      img.at(y, x, 1) = -0.15 + 0.25 * s;
      img.at(y, x, 2) = 0.45 + 0.35 * s;
    }
  return img;
}

// Natural-ish color texture: sum of sinusoids at mixed frequencies plus a
// little speckle; used by the convergence fixtures.
inline pdmatch::Image multiscale_texture(int h, int w, std::uint64_t seed) {
  pdmatch::Image img = pdmatch::Image::zeros(h, w, 3);
  pdmatch::Rng rng(seed);
  const double phase1 = rng.uniform(0.0, 6.28);
  const double phase2 = rng.uniform(0.0, 6.28);
  const double phase3 = rng.uniform(0.0, 6.28);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = std::sin(0.9 * x + 0.4 * y + phase1);
      const double b = std::sin(0.13 * x - 0.21 * y + phase2);
      const double c = std::sin(0.05 * (x + y) + phase3);
      const double noise = rng.uniform(-0.15, 0.15);
      img.at(y, x, 0) = 0.45 * a + 0.25 * c + noise;
      img.at(y, x, 1) = 0.40 * b + 0.20 * a + noise;
      img.at(y, x, 2) = 0.35 * c + 0.30 * b - noise;
    }
  return pdmatch::clip(img);
}

// Two-texture target: the left `fraction` of the columns is speckle, the rest
// stripes.
inline pdmatch::Image two_region_target(int h, int w, double fraction, std::uint64_t seed) {
  const pdmatch::Image a = speckle_texture(h, w, seed);
  const pdmatch::Image b = stripe_texture(h, w);
  pdmatch::Image img = pdmatch::Image::zeros(h, w, 3);
  const int split = static_cast<int>(fraction * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = x < split ? a.at(y, x, c) : b.at(y, x, c);
  return img;
}

inline pdmatch::Image checkerboard(int h, int w, double lo = -1.0, double hi = 1.0) {
  pdmatch::Image img = pdmatch::Image::zeros(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(y, x, 0) = ((x + y) % 2 == 0) ? lo : hi;
  return img;
}

inline double mean_abs_diff(const pdmatch::Image& a, const pdmatch::Image& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) sum += std::abs(a.data[i] - b.data[i]);
  return sum / static_cast<double>(a.data.size());
}

inline double fraction_differing(const pdmatch::Image& a, const pdmatch::Image& b, double threshold) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (std::abs(a.data[i] - b.data[i]) > threshold) ++n;
  return static_cast<double>(n) / static_cast<double>(a.data.size());
}

}  // namespace fixtures
