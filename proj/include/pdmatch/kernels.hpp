#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pdmatch::kernels {

// The data-parallel inner loops of the library. One scalar reference
// implementation plus SIMD variants (AVX2, NEON) selected at runtime;
// all variants are equivalence-tested against the scalar reference.
//
// Layout conventions: images are height x width x channels, row-major,
// channel-interleaved doubles. Filters are patch x patch x channels in the
// same order, so one filter row covers patch*channels contiguous values.
struct KernelOps {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // Valid (no padding) cross-correlation at the given stride:
  //   out[oy*out_w + ox] = <image patch at (oy*stride, ox*stride), filter>
  void (*conv_valid)(const double* img, int height, int width, int channels,
                     const double* filter, int patch, int stride,
                     double* out, int out_h, int out_w);

  // Adjoint of conv_valid: scatter-add coeff[j] * filter onto every pixel
  // patch j covers. Patches are processed in row-major patch order so the
  // accumulation order is fixed and results are reproducible.
  void (*conv_valid_adjoint)(double* img_grad, int height, int width, int channels,
                             const double* filter, int patch, int stride,
                             const double* coeff, int out_h, int out_w);

  // One Adam update over n values. bias1/bias2 are the precomputed
  // 1 - beta^t correction factors.
  void (*adam_update)(double* value, double* first_moment, double* second_moment,
                      const double* grad, std::size_t n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2);

  // For each row a_i (na rows of `dim` values), scan all nb rows b_j and
  // update (best_dist, best_idx) with the squared L2 distance computed via
  // a_sq[i] + b_sq[j] - 2<a_i, b_j>. b rows are indexed b_offset..b_offset+nb-1
  // in best_idx; scanning is in ascending j with strict-< updates, so the
  // lowest index wins ties. Callers own blocking and best_* initialization.
  void (*nn_argmin_block)(const double* a, std::size_t na, const double* a_sq,
                          const double* b, std::size_t nb, const double* b_sq,
                          std::size_t b_offset, std::size_t dim,
                          std::int64_t* best_idx, double* best_dist);
};

const KernelOps& scalar_ops();

// Currently selected backend (auto-detected at startup).
const KernelOps& active();

// Switch backend: "auto", "scalar", "avx2", "neon". Returns false (and leaves
// the selection unchanged) if the name is unknown or unsupported on this CPU.
bool select(std::string_view name);

std::vector<std::string_view> available();

}  // namespace pdmatch::kernels
