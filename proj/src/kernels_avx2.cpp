// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma; only dispatched to
// after a runtime cpuid check (see kernels.cpp).

#include "pdmatch/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace pdmatch::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void conv_valid_avx2(const double* img, int height, int width, int channels,
                     const double* filter, int patch, int stride,
                     double* out, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  const int vec_len = row_len & ~3;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      __m256d acc = _mm256_setzero_pd();
      double tail = 0.0;
      for (int dy = 0; dy < patch; ++dy) {
        const double* src = img + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        int i = 0;
        for (; i < vec_len; i += 4)
          acc = _mm256_fmadd_pd(_mm256_loadu_pd(src + i), _mm256_loadu_pd(frow + i), acc);
        for (; i < row_len; ++i) tail += src[i] * frow[i];
      }
      out[static_cast<std::size_t>(oy) * out_w + ox] = hsum(acc) + tail;
    }
  }
}

void conv_valid_adjoint_avx2(double* img_grad, int height, int width, int channels,
                             const double* filter, int patch, int stride,
                             const double* coeff, int out_h, int out_w) {
  (void)height;
  const int row_len = patch * channels;
  const int vec_len = row_len & ~3;
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double g = coeff[static_cast<std::size_t>(oy) * out_w + ox];
      if (g == 0.0) continue;
      const __m256d gv = _mm256_set1_pd(g);
      for (int dy = 0; dy < patch; ++dy) {
        double* dst = img_grad + (static_cast<std::size_t>(oy * stride + dy) * width + ox * stride) * channels;
        const double* frow = filter + static_cast<std::size_t>(dy) * row_len;
        int i = 0;
        for (; i < vec_len; i += 4) {
          __m256d dv = _mm256_loadu_pd(dst + i);
          dv = _mm256_fmadd_pd(gv, _mm256_loadu_pd(frow + i), dv);
          _mm256_storeu_pd(dst + i, dv);
        }
        for (; i < row_len; ++i) dst[i] += g * frow[i];
      }
    }
  }
}

void adam_update_avx2(double* value, double* first_moment, double* second_moment,
                      const double* grad, std::size_t n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d one_minus_b1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d one_minus_b2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d inv_bias1 = _mm256_set1_pd(1.0 / bias1);
  const __m256d inv_bias2 = _mm256_set1_pd(1.0 / bias2);
  const __m256d lr_v = _mm256_set1_pd(lr);
  const __m256d eps_v = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d m = _mm256_loadu_pd(first_moment + i);
    __m256d v = _mm256_loadu_pd(second_moment + i);
    m = _mm256_fmadd_pd(b1, m, _mm256_mul_pd(one_minus_b1, g));
    v = _mm256_fmadd_pd(b2, v, _mm256_mul_pd(one_minus_b2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(first_moment + i, m);
    _mm256_storeu_pd(second_moment + i, v);
    const __m256d m_hat = _mm256_mul_pd(m, inv_bias1);
    const __m256d v_hat = _mm256_mul_pd(v, inv_bias2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps_v);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr_v, m_hat), denom);
    _mm256_storeu_pd(value + i, _mm256_sub_pd(_mm256_loadu_pd(value + i), step));
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

void nn_argmin_block_avx2(const double* a, std::size_t na, const double* a_sq,
                          const double* b, std::size_t nb, const double* b_sq,
                          std::size_t b_offset, std::size_t dim,
                          std::int64_t* best_idx, double* best_dist) {
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * dim;
    double bd = best_dist[i];
    std::int64_t bi = best_idx[i];
    for (std::size_t j = 0; j < nb; ++j) {
      const double d = a_sq[i] + b_sq[j] - 2.0 * dot_avx2(ai, b + j * dim, dim);
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

const KernelOps& avx2_ops() {
  static const KernelOps ops = {
      "avx2",
      dot_avx2,
      axpy_avx2,
      conv_valid_avx2,
      conv_valid_adjoint_avx2,
      adam_update_avx2,
      nn_argmin_block_avx2,
  };
  return ops;
}

}  // namespace pdmatch::kernels

#endif  // x86_64
