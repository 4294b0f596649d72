#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdmatch/image.hpp"
#include "pdmatch/metrics.hpp"

namespace pdmatch {

struct BenchRecord {
  std::string method;        // "swd" or "exact_nn"
  std::size_t patch_count = 0;  // M
  int image_h = 0;
  int image_w = 0;
  int patch_size = 0;
  int num_projections = 0;  // swd only; 0 for exact_nn
  double median_seconds = 0.0;
  int repetitions = 0;
  int threads = 1;
};

// method,M,patch,k,median_seconds
std::string to_csv_line(const BenchRecord& r);

// Exact nearest-neighbor pass: for every patch of `from`, the index of its
// closest patch in `to` (squared L2, blocked |a|^2+|b|^2-2ab expansion,
// lowest index wins ties).
std::vector<std::int64_t> nn_indices(const PatchSampleSet& from, const PatchSampleSet& to,
                                     int threads = 1);

// Time one full patch-SWD loss+gradient evaluation (k random projections) per
// square image size. One warm-up evaluation is discarded; the median of
// `repetitions` timed runs is recorded.
std::vector<BenchRecord> bench_swd_iter(std::span<const int> image_sizes, int patch_size, int k,
                                        std::uint64_t seed, int repetitions = 5, int threads = 1);

// Time one full exact M x M nearest-neighbor pass per square image size.
// Sizes whose M*M distance count exceeds max_pair_count are refused.
std::vector<BenchRecord> bench_nn_iter(std::span<const int> image_sizes, int patch_size,
                                       std::uint64_t seed, int repetitions = 5,
                                       std::uint64_t max_pair_count = 1'000'000'000ull,
                                       int threads = 1);

// Least-squares slope of log(median_seconds) vs log(M). Requires >= 4 records
// spanning at least a 16x range in M.
double fit_loglog_slope(std::span<const BenchRecord> records);

}  // namespace pdmatch
