// NEON kernel variants for aarch64 (float64x2).

#include "pdmatch/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace pdmatch::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  if (i + 2 <= n) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    i += 2;
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t yv = vld1q_f64(y + i);
    yv = vfmaq_f64(yv, av, vld1q_f64(x + i));
    vst1q_f64(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void conv_valid_neon(const double* img, int height, int width, int channels,
                     const double* filter, int patch, int stride,
                     double* out, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  const int vec_len = row_len & ~1;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      float64x2_t acc = vdupq_n_f64(0.0);
      double tail = 0.0;
      for (int dy = 0; dy < patch; ++dy) {
        const double* src = img + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        int i = 0;
        for (; i < vec_len; i += 2) acc = vfmaq_f64(acc, vld1q_f64(src + i), vld1q_f64(frow + i));
        for (; i < row_len; ++i) tail += src[i] * frow[i];
      }
      out[static_cast<std::size_t>(oy) * out_w + ox] = vaddvq_f64(acc) + tail;
    }
  }
}

void conv_valid_adjoint_neon(double* img_grad, int height, int width, int channels,
                             const double* filter, int patch, int stride,
                             const double* coeff, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  const int vec_len = row_len & ~1;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double g = coeff[static_cast<std::size_t>(oy) * out_w + ox];
      if (g == 0.0) continue;
      const float64x2_t gv = vdupq_n_f64(g);
      for (int dy = 0; dy < patch; ++dy) {
        double* dst = img_grad + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        int i = 0;
        for (; i < vec_len; i += 2) {
          float64x2_t dv = vld1q_f64(dst + i);
          dv = vfmaq_f64(dv, gv, vld1q_f64(frow + i));
          vst1q_f64(dst + i, dv);
        }
        for (; i < row_len; ++i) dst[i] += g * frow[i];
      }
    }
  }
}

void adam_update_neon(double* value, double* first_moment, double* second_moment,
                      const double* grad, std::size_t n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2) {
  const float64x2_t b1 = vdupq_n_f64(beta1);
  const float64x2_t b2 = vdupq_n_f64(beta2);
  const float64x2_t one_minus_b1 = vdupq_n_f64(1.0 - beta1);
  const float64x2_t one_minus_b2 = vdupq_n_f64(1.0 - beta2);
  const float64x2_t inv_bias1 = vdupq_n_f64(1.0 / bias1);
  const float64x2_t inv_bias2 = vdupq_n_f64(1.0 / bias2);
  const float64x2_t lr_v = vdupq_n_f64(lr);
  const float64x2_t eps_v = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    float64x2_t m = vld1q_f64(first_moment + i);
    float64x2_t v = vld1q_f64(second_moment + i);
    m = vfmaq_f64(vmulq_f64(one_minus_b1, g), b1, m);
    v = vfmaq_f64(vmulq_f64(one_minus_b2, vmulq_f64(g, g)), b2, v);
    vst1q_f64(first_moment + i, m);
    vst1q_f64(second_moment + i, v);
    const float64x2_t m_hat = vmulq_f64(m, inv_bias1);
    const float64x2_t v_hat = vmulq_f64(v, inv_bias2);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(v_hat), eps_v);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr_v, m_hat), denom);
    vst1q_f64(value + i, vsubq_f64(vld1q_f64(value + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * g;
    second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * g * g;
    const double m_hat = first_moment[i] / bias1;
    const double v_hat = second_moment[i] / bias2;
    value[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void nn_argmin_block_neon(const double* a, std::size_t na, const double* a_sq,
                          const double* b, std::size_t nb, const double* b_sq,
                          std::size_t b_offset, std::size_t dim,
                          std::int64_t* best_idx, double* best_dist) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * dim;
    double bd = best_dist[i];
    std::int64_t bi = best_idx[i];
    for (std::size_t j = 0; j < nb; ++j) {
      const double d = a_sq[i] + b_sq[j] - 2.0 * dot_neon(ai, b + j * dim, dim);
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

const KernelOps& neon_ops() {
  static const KernelOps ops = {
      "neon",
      dot_neon,
      axpy_neon,
      conv_valid_neon,
      conv_valid_adjoint_neon,
      adam_update_neon,
      nn_argmin_block_neon,
  };
  return ops;
}

}  // namespace pdmatch::kernels

#endif  // __aarch64__
