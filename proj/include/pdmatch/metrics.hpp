#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdmatch/image.hpp"

namespace pdmatch {

// Flat multiset of fixed-dimension sample vectors (raw patch vectors or 1D
// projections).
struct PatchSampleSet {
  int dim = 0;
  std::size_t count = 0;
  std::vector<double> data;  // count * dim, row-major

  std::span<const double> sample(std::size_t i) const {
    return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  static PatchSampleSet from_scalars(std::span<const double> values);
};

// All p x p x C patches at the given stride, each flattened row-major
// (row, column, channel), in row-major grid order.
PatchSampleSet extract_patches(const Image& img, int patch_size, int stride);

struct BdsTerms {
  double coherence = 0.0;     // mean over P of min distance into Q
  double completeness = 0.0;  // mean over Q of min distance into P
  double bds = 0.0;           // coherence + completeness
};

BdsTerms bds(const PatchSampleSet& p_set, const PatchSampleSet& q_set);

// max(coherence, completeness) of the same terms.
double remd(const PatchSampleSet& p_set, const PatchSampleSet& q_set);

// Mean absolute difference of sorted sequences; the exact 1D transport cost
// between equal-size multisets.
double wasserstein_1d_exact(std::span<const double> p, std::span<const double> q);

// Brute-force minimum over all pairings of the mean pairwise L2 distance.
// Equal counts, at most 8 samples each.
double wasserstein_exact_small(const PatchSampleSet& p_set, const PatchSampleSet& q_set);

// Evaluation record for an image pair (stands in for learned-feature scores).
struct DistanceReport {
  double coherence = 0.0;
  double completeness = 0.0;
  double bds = 0.0;
  double remd = 0.0;
  double patch_swd = 0.0;  // fixed-seed estimate, k = 128
  int patch_size = 0;
  int stride = 0;

  std::string to_kv_text() const;      // one key=value per line
  std::string to_record_line() const;  // single comma-separated line
};

// target = reference image, candidate = image under evaluation. Coherence is
// measured over candidate patches, completeness over target patches.
DistanceReport distance_report(const Image& target, const Image& candidate,
                               int patch_size, int stride, std::uint64_t seed);

}  // namespace pdmatch
