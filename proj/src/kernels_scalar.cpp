#include "pdmatch/kernels.hpp"

#include <cmath>

namespace pdmatch::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void conv_valid_scalar(const double* img, int height, int width, int channels,
                       const double* filter, int patch, int stride,
                       double* out, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double acc = 0.0;
      for (int dy = 0; dy < patch; ++dy) {
        const double* src = img + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        for (int i = 0; i < row_len; ++i) acc += src[i] * frow[i];
      }
      out[static_cast<std::size_t>(oy) * out_w + ox] = acc;
    }
  }
}

void conv_valid_adjoint_scalar(double* img_grad, int height, int width, int channels,
                               const double* filter, int patch, int stride,
                               const double* coeff, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double g = coeff[static_cast<std::size_t>(oy) * out_w + ox];
      if (g == 0.0) continue;
      for (int dy = 0; dy < patch; ++dy) {
        double* dst = img_grad + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        for (int i = 0; i < row_len; ++i) dst[i] += g * frow[i];
      }
    }
  }
}

void adam_update_scalar(double* value, double* first_moment, double* second_moment,
                        const double* grad, std::size_t n,
                        double lr, double beta1, double beta2, double eps,
                        double bias1, double bias2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * g;
    second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * g * g;
    const double m_hat = first_moment[i] / bias1;
    const double v_hat = second_moment[i] / bias2;
    value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void nn_argmin_block_scalar(const double* a, std::size_t na, const double* a_sq,
                            const double* b, std::size_t nb, const double* b_sq,
                            std::size_t b_offset, std::size_t dim,
                            std::int64_t* best_idx, double* best_dist) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * dim;
    double bd = best_dist[i];
    std::int64_t bi = best_idx[i];
    for (std::size_t j = 0; j < nb; ++j) {
      const double d = a_sq[i] + b_sq[j] - 2.0 * dot_scalar(ai, b + j * dim, dim);
      if (d < bd) {
        bd = d;
        bi = static_cast<std::int64_t>(b_offset + j);
      }
    }
    best_dist[i] = bd;
    best_idx[i] = bi;
  }
}

}  // namespace

const KernelOps& scalar_ops() {
  static const KernelOps ops = {
      "scalar",
      dot_scalar,
      axpy_scalar,
      conv_valid_scalar,
      conv_valid_adjoint_scalar,
      adam_update_scalar,
      nn_argmin_block_scalar,
  };
  return ops;
}

}  // namespace pdmatch::kernels
