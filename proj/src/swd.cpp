#include "pdmatch/swd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include "pdmatch/kernels.hpp"

namespace pdmatch {

namespace {

int out_grid(int size, int patch, int stride) { return (size - patch) / stride + 1; }

void check_patch_fits(const Image& img, int patch_size, int stride) {
  if (patch_size < 1) throw std::invalid_argument("patch_size must be >= 1");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (patch_size > img.min_dim())
    throw std::invalid_argument("patch larger than image (" + std::to_string(patch_size) + " > min dim " +
                                std::to_string(img.min_dim()) + ")");
}

// Expand target-side samples per the duplication spec: patch j contributes
// multiplicity[j] consecutive copies, in patch order.
std::vector<double> expand_by_multiplicity(const std::vector<double>& values,
                                           const DuplicationSpec& spec) {
  if (spec.multiplicity.size() != values.size())
    throw std::invalid_argument("duplication spec does not match patch count");
  std::size_t total = 0;
  for (const std::int32_t m : spec.multiplicity) {
    if (m < 1) throw std::invalid_argument("duplication multiplicity must be >= 1");
    total += static_cast<std::size_t>(m);
  }
  std::vector<double> out;
  out.reserve(total);
  for (std::size_t j = 0; j < values.size(); ++j)
    out.insert(out.end(), static_cast<std::size_t>(spec.multiplicity[j]), values[j]);
  return out;
}

std::vector<double> cyclic_expand(const std::vector<double>& v, std::size_t len) {
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = v[i % v.size()];
  return out;
}

struct ProjectionOutcome {
  double loss = 0.0;
  std::vector<double> coeff;  // per synth patch, empty unless grad requested
};

// One projection: project both images, apply target duplication, equalize
// counts, take the sorted-L1 loss, and fold sample gradients back onto the
// original synth patches (adjoint of the cyclic duplication is a sum over
// copies).
ProjectionOutcome run_projection(const Image& target, const Image& synth,
                                 const ProjectionFilter& filter, int stride,
                                 const DuplicationSpec* target_augment, bool want_grad) {
  const auto& ops = kernels::active();
  const int patch = filter.patch_size;

  const int tgh = out_grid(target.height, patch, stride);
  const int tgw = out_grid(target.width, patch, stride);
  const int sgh = out_grid(synth.height, patch, stride);
  const int sgw = out_grid(synth.width, patch, stride);

  std::vector<double> proj_target(static_cast<std::size_t>(tgh) * tgw);
  std::vector<double> proj_synth(static_cast<std::size_t>(sgh) * sgw);
  ops.conv_valid(target.data.data(), target.height, target.width, target.channels,
                 filter.weights.data(), patch, stride, proj_target.data(), tgh, tgw);
  ops.conv_valid(synth.data.data(), synth.height, synth.width, synth.channels,
                 filter.weights.data(), patch, stride, proj_synth.data(), sgh, sgw);

  if (target_augment) proj_target = expand_by_multiplicity(proj_target, *target_augment);

  const std::size_t synth_count = proj_synth.size();
  const std::size_t len = std::max(proj_target.size(), proj_synth.size());
  const bool synth_expanded = proj_synth.size() < len;
  std::vector<double> target_side =
      proj_target.size() < len ? cyclic_expand(proj_target, len) : std::move(proj_target);
  std::vector<double> synth_side = synth_expanded ? cyclic_expand(proj_synth, len) : std::move(proj_synth);

  SortedL1 pairing = sorted_l1(target_side, synth_side);

  ProjectionOutcome out;
  out.loss = pairing.loss;
  if (want_grad) {
    if (synth_expanded) {
      out.coeff.assign(synth_count, 0.0);
      for (std::size_t e = 0; e < len; ++e) out.coeff[e % synth_count] += pairing.grad_q[e];
    } else {
      out.coeff = std::move(pairing.grad_q);
    }
  }
  return out;
}

struct ProjectionJob {
  ProjectionFilter filter;
  ProjectionOutcome outcome;
};

LossGrad swd_driver(const Image& target, const Image& synth, int patch_size, int stride, int k,
                    const DuplicationSpec* target_augment, bool want_grad, int threads,
                    std::span<const ProjectionFilter> fixed_filters,
                    std::uint64_t seed, std::uint64_t step) {
  if (target.channels != synth.channels)
    throw std::invalid_argument("patch_swd: channel count mismatch");
  check_patch_fits(target, patch_size, stride);
  check_patch_fits(synth, patch_size, stride);
  if (k < 1) throw std::invalid_argument("patch_swd: need at least one projection");

  const bool use_fixed = !fixed_filters.empty();

  LossGrad result;
  if (want_grad) result.grad = Image::zeros(synth.height, synth.width, synth.channels);
  const int sgh = out_grid(synth.height, patch_size, stride);
  const int sgw = out_grid(synth.width, patch_size, stride);

  const auto& ops = kernels::active();
  double loss_sum = 0.0;

  auto make_filter = [&](int i) -> ProjectionFilter {
    if (use_fixed) {
      const ProjectionFilter& f = fixed_filters[i];
      if (f.patch_size != patch_size || f.channels != synth.channels)
        throw std::invalid_argument("fixed filter shape mismatch");
      return f;
    }
    Rng rng(derive_seed(seed, step, static_cast<std::uint64_t>(i)));
    return sample_projection(patch_size, synth.channels, rng);
  };

  auto reduce = [&](const ProjectionJob& job) {
    loss_sum += job.outcome.loss;
    if (want_grad)
      ops.conv_valid_adjoint(result.grad.data.data(), synth.height, synth.width, synth.channels,
                             job.filter.weights.data(), patch_size, stride,
                             job.outcome.coeff.data(), sgh, sgw);
  };

  const int wave = std::max(1, threads);
  if (wave == 1) {
    for (int i = 0; i < k; ++i) {
      ProjectionJob job;
      job.filter = make_filter(i);
      job.outcome = run_projection(target, synth, job.filter, stride, target_augment, want_grad);
      reduce(job);
    }
  } else {
    // Projections are independent; compute them in waves and reduce in fixed
    // index order so the result is identical for every thread count.
    for (int base = 0; base < k; base += wave) {
      const int count = std::min(wave, k - base);
      std::vector<std::future<ProjectionJob>> futures;
      futures.reserve(count);
      for (int t = 0; t < count; ++t) {
        futures.push_back(std::async(std::launch::async, [&, i = base + t]() {
          ProjectionJob job;
          job.filter = make_filter(i);
          job.outcome = run_projection(target, synth, job.filter, stride, target_augment, want_grad);
          return job;
        }));
      }
      for (auto& f : futures) reduce(f.get());
    }
  }

  result.loss = loss_sum / k;
  if (want_grad) {
    const double inv_k = 1.0 / k;
    for (double& v : result.grad.data) v *= inv_k;
  }
  return result;
}

}  // namespace

ProjectionFilter sample_projection(int patch_size, int channels, Rng& rng) {
  if (patch_size < 1) throw std::invalid_argument("sample_projection: patch_size must be >= 1");
  if (channels != 1 && channels != 3) throw std::invalid_argument("sample_projection: channels must be 1 or 3");
  ProjectionFilter f;
  f.patch_size = patch_size;
  f.channels = channels;
  f.weights.resize(static_cast<std::size_t>(patch_size) * patch_size * channels);
  double norm_sq = 0.0;
  for (double& w : f.weights) {
    w = rng.gaussian();
    norm_sq += w * w;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm < 1e-12) {
    f.weights.assign(f.weights.size(), 0.0);
    f.weights[0] = 1.0;
    return f;
  }
  for (double& w : f.weights) w /= norm;
  return f;
}

std::vector<ProjectionFilter> make_filter_bank(int k, int patch_size, int channels,
                                               std::uint64_t seed, std::uint64_t step) {
  std::vector<ProjectionFilter> bank;
  bank.reserve(k);
  for (int i = 0; i < k; ++i) {
    Rng rng(derive_seed(seed, step, static_cast<std::uint64_t>(i)));
    bank.push_back(sample_projection(patch_size, channels, rng));
  }
  return bank;
}

ProjectedSamples project_patches(const Image& img, const ProjectionFilter& filter, int stride) {
  if (filter.channels != img.channels) throw std::invalid_argument("project_patches: channel mismatch");
  check_patch_fits(img, filter.patch_size, stride);
  ProjectedSamples out;
  out.grid_h = out_grid(img.height, filter.patch_size, stride);
  out.grid_w = out_grid(img.width, filter.patch_size, stride);
  out.values.resize(static_cast<std::size_t>(out.grid_h) * out.grid_w);
  kernels::active().conv_valid(img.data.data(), img.height, img.width, img.channels,
                               filter.weights.data(), filter.patch_size, stride,
                               out.values.data(), out.grid_h, out.grid_w);
  out.source_index.resize(out.values.size());
  for (int gy = 0; gy < out.grid_h; ++gy)
    for (int gx = 0; gx < out.grid_w; ++gx)
      out.source_index[static_cast<std::size_t>(gy) * out.grid_w + gx] =
          static_cast<std::int32_t>(gy * stride * img.width + gx * stride);
  return out;
}

SortedL1 sorted_l1(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("sorted_l1: length mismatch");
  if (p.empty()) throw std::invalid_argument("sorted_l1: empty input");
  const std::size_t m = p.size();

  std::vector<std::int32_t> order_p(m), order_q(m);
  std::iota(order_p.begin(), order_p.end(), 0);
  std::iota(order_q.begin(), order_q.end(), 0);
  // Value order with index tie-break: deterministic, equivalent to a stable sort.
  std::sort(order_p.begin(), order_p.end(),
            [&](std::int32_t a, std::int32_t b) { return p[a] < p[b] || (p[a] == p[b] && a < b); });
  std::sort(order_q.begin(), order_q.end(),
            [&](std::int32_t a, std::int32_t b) { return q[a] < q[b] || (q[a] == q[b] && a < b); });

  SortedL1 out;
  out.grad_q.assign(m, 0.0);
  double sum = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = q[order_q[i]] - p[order_p[i]];
    sum += std::abs(d);
    out.grad_q[order_q[i]] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_m;
  }
  out.loss = sum / static_cast<double>(m);
  return out;
}

void equalize_counts(std::vector<double>& a, std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("equalize_counts: empty input");
  if (a.size() == b.size()) return;
  if (a.size() < b.size())
    a = cyclic_expand(a, b.size());
  else
    b = cyclic_expand(b, a.size());
}

void equalize_counts(ProjectedSamples& a, ProjectedSamples& b) {
  if (a.values.empty() || b.values.empty()) throw std::invalid_argument("equalize_counts: empty input");
  if (a.values.size() == b.values.size()) return;
  ProjectedSamples& small = a.values.size() < b.values.size() ? a : b;
  const std::size_t len = std::max(a.values.size(), b.values.size());
  const std::size_t m = small.values.size();
  std::vector<std::int32_t> idx(len);
  for (std::size_t i = 0; i < len; ++i) idx[i] = small.source_index[i % m];
  small.values = cyclic_expand(small.values, len);
  small.source_index = std::move(idx);
}

LossGrad patch_swd_loss_and_grad(const Image& target, const Image& synth, const SwdParams& params,
                                 std::uint64_t seed, std::uint64_t step,
                                 const DuplicationSpec* target_augment, int threads) {
  return swd_driver(target, synth, params.patch_size, params.stride, params.num_projections,
                    target_augment, /*want_grad=*/true, threads, {}, seed, step);
}

double patch_swd_loss(const Image& target, const Image& synth, const SwdParams& params,
                      std::uint64_t seed, std::uint64_t step,
                      const DuplicationSpec* target_augment) {
  return swd_driver(target, synth, params.patch_size, params.stride, params.num_projections,
                    target_augment, /*want_grad=*/false, 1, {}, seed, step)
      .loss;
}

LossGrad swd_with_filters(const Image& target, const Image& synth,
                          std::span<const ProjectionFilter> filters, int stride,
                          const DuplicationSpec* target_augment, bool want_grad) {
  if (filters.empty()) throw std::invalid_argument("swd_with_filters: empty filter bank");
  return swd_driver(target, synth, filters[0].patch_size, stride,
                    static_cast<int>(filters.size()), target_augment, want_grad, 1, filters, 0, 0);
}

void adam_step(Image& img, const Image& grad, AdamState& state, double learning_rate) {
  if (!img.same_shape(grad)) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.first_moment.size() != img.value_count() ||
      state.second_moment.size() != img.value_count())
    throw std::invalid_argument("adam_step: state shape mismatch");
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  state.step += 1;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  kernels::active().adam_update(img.data.data(), state.first_moment.data(),
                                state.second_moment.data(), grad.data.data(), img.value_count(),
                                learning_rate, kBeta1, kBeta2, kEps, bias1, bias2);
}

}  // namespace pdmatch
