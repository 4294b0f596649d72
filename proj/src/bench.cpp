#include "pdmatch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pdmatch/kernels.hpp"
#include "pdmatch/rng.hpp"
#include "pdmatch/swd.hpp"

namespace pdmatch {

namespace {

constexpr std::size_t kNnBlock = 1024;

Image random_image(int height, int width, int channels, std::uint64_t seed) {
  Image img = Image::zeros(height, width, channels);
  Rng rng(seed);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename Fn>
double time_seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

void nn_rows(const PatchSampleSet& from, const PatchSampleSet& to,
             const std::vector<double>& from_sq, const std::vector<double>& to_sq,
             std::size_t row_begin, std::size_t row_end,
             std::int64_t* best_idx, double* best_dist) {
  const auto& ops = kernels::active();
  const std::size_t dim = static_cast<std::size_t>(from.dim);
  for (std::size_t jb = 0; jb < to.count; jb += kNnBlock) {
    const std::size_t nb = std::min(kNnBlock, to.count - jb);
    ops.nn_argmin_block(from.data.data() + row_begin * dim, row_end - row_begin,
                        from_sq.data() + row_begin, to.data.data() + jb * dim, nb,
                        to_sq.data() + jb, jb, dim, best_idx + row_begin, best_dist + row_begin);
  }
}

}  // namespace

std::string to_csv_line(const BenchRecord& r) {
  std::ostringstream os;
  os << r.method << ',' << r.patch_count << ',' << r.patch_size << ',' << r.num_projections << ','
     << r.median_seconds;
  return os.str();
}

std::vector<std::int64_t> nn_indices(const PatchSampleSet& from, const PatchSampleSet& to,
                                     int threads) {
  if (from.dim != to.dim) throw std::invalid_argument("nn_indices: dimension mismatch");
  if (from.count == 0 || to.count == 0) throw std::invalid_argument("nn_indices: empty sample set");
  const auto& ops = kernels::active();
  const std::size_t dim = static_cast<std::size_t>(from.dim);

  std::vector<double> from_sq(from.count), to_sq(to.count);
  for (std::size_t i = 0; i < from.count; ++i)
    from_sq[i] = ops.dot(from.data.data() + i * dim, from.data.data() + i * dim, dim);
  for (std::size_t j = 0; j < to.count; ++j)
    to_sq[j] = ops.dot(to.data.data() + j * dim, to.data.data() + j * dim, dim);

  std::vector<std::int64_t> best_idx(from.count, -1);
  std::vector<double> best_dist(from.count, std::numeric_limits<double>::infinity());

  const int workers = std::max(1, threads);
  if (workers == 1 || from.count < 2 * kNnBlock) {
    nn_rows(from, to, from_sq, to_sq, 0, from.count, best_idx.data(), best_dist.data());
  } else {
    // Row ranges are independent; results do not depend on the partition.
    std::vector<std::future<void>> futures;
    const std::size_t chunk = (from.count + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::size_t begin = std::min(from.count, t * chunk);
      const std::size_t end = std::min(from.count, begin + chunk);
      if (begin == end) break;
      futures.push_back(std::async(std::launch::async, [&, begin, end] {
        nn_rows(from, to, from_sq, to_sq, begin, end, best_idx.data(), best_dist.data());
      }));
    }
    for (auto& f : futures) f.get();
  }
  return best_idx;
}

std::vector<BenchRecord> bench_swd_iter(std::span<const int> image_sizes, int patch_size, int k,
                                        std::uint64_t seed, int repetitions, int threads) {
  if (repetitions < 5) throw std::invalid_argument("bench_swd_iter: need >= 5 repetitions");
  std::vector<BenchRecord> records;
  SwdParams params;
  params.patch_size = patch_size;
  params.stride = 1;
  params.num_projections = k;
  for (const int size : image_sizes) {
    if (size < patch_size) throw std::invalid_argument("bench_swd_iter: image smaller than patch");
    const Image target = random_image(size, size, 3, derive_seed(seed, size, 0));
    const Image synth = random_image(size, size, 3, derive_seed(seed, size, 1));
    const int grid = (size - patch_size) + 1;

    volatile double sink = 0.0;  // keep the evaluation alive
    sink = patch_swd_loss_and_grad(target, synth, params, seed, 0, nullptr, threads).loss;  // warm-up
    std::vector<double> times(repetitions);
    for (int r = 0; r < repetitions; ++r)
      times[r] = time_seconds([&] {
        sink = patch_swd_loss_and_grad(target, synth, params, seed, static_cast<std::uint64_t>(r + 1),
                                       nullptr, threads)
                   .loss;
      });
    (void)sink;

    BenchRecord rec;
    rec.method = "swd";
    rec.patch_count = static_cast<std::size_t>(grid) * grid;
    rec.image_h = rec.image_w = size;
    rec.patch_size = patch_size;
    rec.num_projections = k;
    rec.median_seconds = median(times);
    rec.repetitions = repetitions;
    rec.threads = threads;
    records.push_back(rec);
  }
  return records;
}

std::vector<BenchRecord> bench_nn_iter(std::span<const int> image_sizes, int patch_size,
                                       std::uint64_t seed, int repetitions,
                                       std::uint64_t max_pair_count, int threads) {
  if (repetitions < 5) throw std::invalid_argument("bench_nn_iter: need >= 5 repetitions");
  std::vector<BenchRecord> records;
  for (const int size : image_sizes) {
    if (size < patch_size) throw std::invalid_argument("bench_nn_iter: image smaller than patch");
    const int grid = (size - patch_size) + 1;
    const std::uint64_t m = static_cast<std::uint64_t>(grid) * grid;
    if (m * m > max_pair_count)
      throw std::invalid_argument("bench_nn_iter: M^2 = " + std::to_string(m * m) +
                                  " exceeds the configured cap of " + std::to_string(max_pair_count));
    const Image target = random_image(size, size, 3, derive_seed(seed, size, 0));
    const Image synth = random_image(size, size, 3, derive_seed(seed, size, 1));
    const PatchSampleSet from = extract_patches(synth, patch_size, 1);
    const PatchSampleSet to = extract_patches(target, patch_size, 1);

    volatile std::int64_t sink = nn_indices(from, to, threads)[0];  // warm-up
    std::vector<double> times(repetitions);
    for (int r = 0; r < repetitions; ++r)
      times[r] = time_seconds([&] { sink = nn_indices(from, to, threads)[0]; });
    (void)sink;

    BenchRecord rec;
    rec.method = "exact_nn";
    rec.patch_count = m;
    rec.image_h = rec.image_w = size;
    rec.patch_size = patch_size;
    rec.num_projections = 0;
    rec.median_seconds = median(times);
    rec.repetitions = repetitions;
    rec.threads = threads;
    records.push_back(rec);
  }
  return records;
}

double fit_loglog_slope(std::span<const BenchRecord> records) {
  if (records.size() < 4) throw std::invalid_argument("fit_loglog_slope: need >= 4 records");
  std::size_t min_m = std::numeric_limits<std::size_t>::max();
  std::size_t max_m = 0;
  for (const auto& r : records) {
    min_m = std::min(min_m, r.patch_count);
    max_m = std::max(max_m, r.patch_count);
  }
  if (max_m < 16 * min_m)
    throw std::invalid_argument("fit_loglog_slope: records must span a >= 16x range in M");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(records.size());
  for (const auto& r : records) {
    const double x = std::log(static_cast<double>(r.patch_count));
    const double y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace pdmatch
