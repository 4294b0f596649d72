#include "pdmatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pdmatch/kernels.hpp"
#include "pdmatch/swd.hpp"

namespace pdmatch {

namespace {

constexpr std::size_t kNnBlock = 1024;

// Mean over rows of `from` of the distance to the nearest row of `to`,
// via the blocked argmin kernel. Norms and cross terms use the same dot
// kernel, so identical vectors report a distance of exactly zero.
double mean_min_distance(const PatchSampleSet& from, const PatchSampleSet& to) {
  const auto& ops = kernels::active();
  const std::size_t dim = static_cast<std::size_t>(from.dim);

  std::vector<double> from_sq(from.count), to_sq(to.count);
  for (std::size_t i = 0; i < from.count; ++i)
    from_sq[i] = ops.dot(from.data.data() + i * dim, from.data.data() + i * dim, dim);
  for (std::size_t j = 0; j < to.count; ++j)
    to_sq[j] = ops.dot(to.data.data() + j * dim, to.data.data() + j * dim, dim);

  std::vector<std::int64_t> best_idx(from.count, -1);
  std::vector<double> best_dist(from.count, std::numeric_limits<double>::infinity());
  for (std::size_t jb = 0; jb < to.count; jb += kNnBlock) {
    const std::size_t nb = std::min(kNnBlock, to.count - jb);
    ops.nn_argmin_block(from.data.data(), from.count, from_sq.data(),
                        to.data.data() + jb * dim, nb, to_sq.data() + jb, jb, dim,
                        best_idx.data(), best_dist.data());
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < from.count; ++i) sum += std::sqrt(std::max(0.0, best_dist[i]));
  return sum / static_cast<double>(from.count);
}

void check_compatible(const PatchSampleSet& a, const PatchSampleSet& b) {
  if (a.count == 0 || b.count == 0) throw std::invalid_argument("sample sets must be non-empty");
  if (a.dim != b.dim) throw std::invalid_argument("sample sets have mismatched dimensions");
}

}  // namespace

PatchSampleSet PatchSampleSet::from_scalars(std::span<const double> values) {
  PatchSampleSet s;
  s.dim = 1;
  s.count = values.size();
  s.data.assign(values.begin(), values.end());
  return s;
}

PatchSampleSet extract_patches(const Image& img, int patch_size, int stride) {
  if (patch_size < 1 || stride < 1) throw std::invalid_argument("extract_patches: bad patch/stride");
  if (patch_size > img.min_dim()) throw std::invalid_argument("extract_patches: patch larger than image");
  const int grid_h = (img.height - patch_size) / stride + 1;
  const int grid_w = (img.width - patch_size) / stride + 1;
  PatchSampleSet out;
  out.dim = patch_size * patch_size * img.channels;
  out.count = static_cast<std::size_t>(grid_h) * grid_w;
  out.data.resize(out.count * static_cast<std::size_t>(out.dim));
  const int row_len = patch_size * img.channels;
  std::size_t pos = 0;
  for (int gy = 0; gy < grid_h; ++gy)
    for (int gx = 0; gx < grid_w; ++gx)
      for (int dy = 0; dy < patch_size; ++dy) {
        const double* src =
            img.data.data() + (static_cast<std::size_t>(gy * stride + dy) * img.width + gx * stride) * img.channels;
        std::copy(src, src + row_len, out.data.begin() + pos);
        pos += row_len;
      }
  return out;
}

BdsTerms bds(const PatchSampleSet& p_set, const PatchSampleSet& q_set) {
  check_compatible(p_set, q_set);
  BdsTerms t;
  t.coherence = mean_min_distance(p_set, q_set);
  t.completeness = mean_min_distance(q_set, p_set);
  t.bds = t.coherence + t.completeness;
  return t;
}

double remd(const PatchSampleSet& p_set, const PatchSampleSet& q_set) {
  const BdsTerms t = bds(p_set, q_set);
  return std::max(t.coherence, t.completeness);
}

double wasserstein_1d_exact(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("wasserstein_1d_exact: length mismatch");
  if (p.empty()) throw std::invalid_argument("wasserstein_1d_exact: empty input");
  std::vector<double> ps(p.begin(), p.end());
  std::vector<double> qs(q.begin(), q.end());
  std::sort(ps.begin(), ps.end());
  std::sort(qs.begin(), qs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) sum += std::abs(ps[i] - qs[i]);
  return sum / static_cast<double>(ps.size());
}

double wasserstein_exact_small(const PatchSampleSet& p_set, const PatchSampleSet& q_set) {
  check_compatible(p_set, q_set);
  if (p_set.count != q_set.count)
    throw std::invalid_argument("wasserstein_exact_small: counts must be equal");
  if (p_set.count > 8) throw std::invalid_argument("wasserstein_exact_small: at most 8 samples");
  const std::size_t n = p_set.count;
  const std::size_t dim = static_cast<std::size_t>(p_set.dim);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      const double* a = p_set.data.data() + i * dim;
      const double* b = q_set.data.data() + static_cast<std::size_t>(perm[i]) * dim;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = a[k] - b[k];
        d2 += diff * diff;
      }
      cost += std::sqrt(d2);
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

std::string DistanceReport::to_kv_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "coherence=" << coherence << "\n"
     << "completeness=" << completeness << "\n"
     << "bds=" << bds << "\n"
     << "remd=" << remd << "\n"
     << "patch_swd=" << patch_swd << "\n"
     << "patch_size=" << patch_size << "\n"
     << "stride=" << stride << "\n";
  return os.str();
}

std::string DistanceReport::to_record_line() const {
  std::ostringstream os;
  os.precision(17);
  os << "coherence=" << coherence << ",completeness=" << completeness << ",bds=" << bds
     << ",remd=" << remd << ",patch_swd=" << patch_swd << ",patch_size=" << patch_size
     << ",stride=" << stride;
  return os.str();
}

DistanceReport distance_report(const Image& target, const Image& candidate,
                               int patch_size, int stride, std::uint64_t seed) {
  const PatchSampleSet target_patches = extract_patches(target, patch_size, stride);
  const PatchSampleSet candidate_patches = extract_patches(candidate, patch_size, stride);

  DistanceReport r;
  r.patch_size = patch_size;
  r.stride = stride;
  const BdsTerms t = bds(candidate_patches, target_patches);
  r.coherence = t.coherence;
  r.completeness = t.completeness;
  r.bds = t.bds;
  r.remd = std::max(t.coherence, t.completeness);
  SwdParams params;
  params.patch_size = patch_size;
  params.stride = stride;
  params.num_projections = 128;
  r.patch_swd = patch_swd_loss(target, candidate, params, seed);
  return r;
}

}  // namespace pdmatch
