#include "pdmatch/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmatch {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

Image Image::zeros(int height, int width, int channels) {
  if (height < 1 || width < 1 || (channels != 1 && channels != 3))
    throw std::invalid_argument("Image::zeros: bad shape");
  Image img;
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.data.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
  return img;
}

bool bitwise_equal(const Image& a, const Image& b) {
  return a.same_shape(b) && a.data == b.data;
}

Image clip(Image img) {
  for (double& v : img.data) v = std::min(1.0, std::max(-1.0, v));
  return img;
}

Image resize(const Image& img, int new_height, int new_width) {
  if (new_height < 1 || new_width < 1) throw std::invalid_argument("resize: target dims must be >= 1");
  Image out = Image::zeros(new_height, new_width, img.channels);
  const double sy = static_cast<double>(img.height) / new_height;
  const double sx = static_cast<double>(img.width) / new_width;
  for (int y = 0; y < new_height; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < new_width; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = lerp(img.at(y0, x0, c), img.at(y0, x1, c), tx);
        const double bottom = lerp(img.at(y1, x0, c), img.at(y1, x1, c), tx);
        out.at(y, x, c) = lerp(top, bottom, ty);
      }
    }
  }
  return out;
}

std::vector<Image> build_pyramid(const Image& img, const PyramidConfig& cfg) {
  if (!(cfg.ratio > 0.0 && cfg.ratio < 1.0)) throw std::invalid_argument("build_pyramid: ratio must be in (0, 1)");
  if (cfg.coarse_dim < 1) throw std::invalid_argument("build_pyramid: coarse_dim must be >= 1");
  std::vector<Image> levels;
  levels.push_back(img);
  double fh = img.height;
  double fw = img.width;
  for (;;) {
    fh *= cfg.ratio;
    fw *= cfg.ratio;
    const int nh = round_half_up(fh);
    const int nw = round_half_up(fw);
    if (std::min(nh, nw) < cfg.coarse_dim) break;
    levels.push_back(resize(levels.back(), nh, nw));
  }
  std::reverse(levels.begin(), levels.end());
  return levels;
}

Image add_noise(const Image& img, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  Image out = img;
  if (sigma == 0.0) return out;
  for (double& v : out.data) v += sigma * rng.gaussian();
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(2.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  Image horizontal = Image::zeros(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xi = std::min(std::max(x + i, 0), img.width - 1);
          acc += kernel[i + radius] * img.at(y, xi, c);
        }
        horizontal.at(y, x, c) = acc;
      }

  Image out = Image::zeros(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int yi = std::min(std::max(y + i, 0), img.height - 1);
          acc += kernel[i + radius] * horizontal.at(yi, x, c);
        }
        out.at(y, x, c) = acc;
      }
  return out;
}

}  // namespace pdmatch
