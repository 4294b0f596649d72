#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdmatch/image.hpp"
#include "pdmatch/rng.hpp"

namespace pdmatch {

// Random patch-shaped projection filter, unit L2 norm.
struct ProjectionFilter {
  int patch_size = 0;
  int channels = 0;
  std::vector<double> weights;  // patch_size * patch_size * channels
};

// Entries i.i.d. standard normal, then scaled to unit L2 norm.
ProjectionFilter sample_projection(int patch_size, int channels, Rng& rng);

// k filters drawn from independent substreams of (seed, step) — filter i uses
// derive_seed(derive_seed(seed, step, i)).
std::vector<ProjectionFilter> make_filter_bank(int k, int patch_size, int channels,
                                               std::uint64_t seed, std::uint64_t step = 0);

// All patch projections of one image: value j is the dot product of patch j
// with the filter, patches in row-major grid order.
struct ProjectedSamples {
  std::vector<double> values;
  std::vector<std::int32_t> source_index;  // top-left pixel, linear y*width + x
  int grid_h = 0;
  int grid_w = 0;
};

ProjectedSamples project_patches(const Image& img, const ProjectionFilter& filter, int stride);

// Pairs i-th order statistics of p and q.
//   loss      = mean_i |sort(p)_i - sort(q)_i|
//   grad_q[j] = sign(q_j - matched p value) / M, with sign(0) = 0
struct SortedL1 {
  double loss = 0.0;
  std::vector<double> grad_q;
};

SortedL1 sorted_l1(std::span<const double> p, std::span<const double> q);

// Cyclic duplication of the smaller list until both lengths match:
// expanded[i] = original[i mod m]. The larger list is returned unchanged.
void equalize_counts(std::vector<double>& a, std::vector<double>& b);
void equalize_counts(ProjectedSamples& a, ProjectedSamples& b);

// Per-target-patch duplication multiplicities (>= 1), applied identically in
// every projection before pairing. Produced by apply_frequency_mask.
struct DuplicationSpec {
  std::vector<std::int32_t> multiplicity;
};

struct SwdParams {
  int patch_size = 7;
  int stride = 1;
  int num_projections = 64;
};

struct LossGrad {
  double loss = 0.0;
  Image grad;  // shaped like the synthesized image
};

// Monte-Carlo patch-SWD with fresh random filters (substreams of (seed, step))
// and its analytic gradient with respect to `synth` — the exact adjoint of the
// strided valid cross-correlation. Projections are computed independently and
// reduced in fixed index order, so results are reproducible for any `threads`.
LossGrad patch_swd_loss_and_grad(const Image& target, const Image& synth, const SwdParams& params,
                                 std::uint64_t seed, std::uint64_t step = 0,
                                 const DuplicationSpec* target_augment = nullptr,
                                 int threads = 1);

// Loss only (skips the adjoint pass).
double patch_swd_loss(const Image& target, const Image& synth, const SwdParams& params,
                      std::uint64_t seed, std::uint64_t step = 0,
                      const DuplicationSpec* target_augment = nullptr);

// Same estimator over a caller-supplied filter bank; used for gradient checks
// and fixed-filter evaluation.
LossGrad swd_with_filters(const Image& target, const Image& synth,
                          std::span<const ProjectionFilter> filters, int stride,
                          const DuplicationSpec* target_augment = nullptr,
                          bool want_grad = true);

struct AdamState {
  std::int64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  static AdamState for_image(const Image& img) {
    AdamState s;
    s.first_moment.assign(img.value_count(), 0.0);
    s.second_moment.assign(img.value_count(), 0.0);
    return s;
  }
};

// Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8, bias correction), in place.
// No clipping here.
void adam_step(Image& img, const Image& grad, AdamState& state, double learning_rate);

}  // namespace pdmatch
