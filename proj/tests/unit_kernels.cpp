#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pdmatch/kernels.hpp"
#include "pdmatch/rng.hpp"

using namespace pdmatch;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

struct BackendGuard {
  ~BackendGuard() { kernels::select("auto"); }
};

}  // namespace

TEST_CASE("backend registry") {
  BackendGuard guard;
  const auto names = kernels::available();
  REQUIRE(!names.empty());
  CHECK(names.front() == "scalar");
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("definitely-not-a-backend"));
  CHECK(std::string(kernels::active().name) == "scalar");  // unchanged on failure
  CHECK(kernels::select("auto"));
}

TEST_CASE("SIMD backends match the scalar reference") {
  BackendGuard guard;
  const auto& scalar = kernels::scalar_ops();
  Rng rng(2024);

  for (const auto name : kernels::available()) {
    if (name == "scalar") continue;
    REQUIRE(kernels::select(name));
    const auto& simd = kernels::active();
    INFO("backend ", name);

    // dot and axpy across remainder lengths
    for (const std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 21u, 33u, 147u, 363u, 1000u}) {
      const auto a = random_vec(n, rng);
      const auto b = random_vec(n, rng);
      CHECK(close(simd.dot(a.data(), b.data(), n), scalar.dot(a.data(), b.data(), n)));

      auto y_simd = random_vec(n, rng);
      auto y_scalar = y_simd;
      simd.axpy(0.37, a.data(), y_simd.data(), n);
      scalar.axpy(0.37, a.data(), y_scalar.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(close(y_simd[i], y_scalar[i]));
    }

    // conv_valid + adjoint over assorted shapes, strides, channels
    struct Shape {
      int h, w, c, p, s;
    };
    for (const auto& [h, w, c, p, s] : {Shape{12, 15, 3, 7, 1}, Shape{9, 9, 1, 3, 2},
                                        Shape{16, 11, 3, 5, 3}, Shape{8, 8, 1, 8, 1},
                                        Shape{10, 30, 3, 1, 1}}) {
      const std::size_t img_len = static_cast<std::size_t>(h) * w * c;
      const auto img = random_vec(img_len, rng);
      const auto filt = random_vec(static_cast<std::size_t>(p) * p * c, rng);
      const int oh = (h - p) / s + 1;
      const int ow = (w - p) / s + 1;
      std::vector<double> out_simd(static_cast<std::size_t>(oh) * ow), out_scalar(out_simd.size());
      simd.conv_valid(img.data(), h, w, c, filt.data(), p, s, out_simd.data(), oh, ow);
      scalar.conv_valid(img.data(), h, w, c, filt.data(), p, s, out_scalar.data(), oh, ow);
      for (std::size_t i = 0; i < out_simd.size(); ++i) CHECK(close(out_simd[i], out_scalar[i]));

      const auto coeff = random_vec(out_simd.size(), rng);
      std::vector<double> grad_simd(img_len, 0.0), grad_scalar(img_len, 0.0);
      simd.conv_valid_adjoint(grad_simd.data(), h, w, c, filt.data(), p, s, coeff.data(), oh, ow);
      scalar.conv_valid_adjoint(grad_scalar.data(), h, w, c, filt.data(), p, s, coeff.data(), oh, ow);
      for (std::size_t i = 0; i < img_len; ++i) CHECK(close(grad_simd[i], grad_scalar[i]));
    }

    // adam_update
    for (const std::size_t n : {1u, 5u, 64u, 333u}) {
      auto v_simd = random_vec(n, rng);
      auto v_scalar = v_simd;
      auto m1_simd = random_vec(n, rng);
      auto m1_scalar = m1_simd;
      auto m2_simd = random_vec(n, rng);
      for (double& x : m2_simd) x = std::abs(x);
      auto m2_scalar = m2_simd;
      const auto g = random_vec(n, rng);
      simd.adam_update(v_simd.data(), m1_simd.data(), m2_simd.data(), g.data(), n, 0.05, 0.9,
                       0.999, 1e-8, 0.1, 0.001999);
      scalar.adam_update(v_scalar.data(), m1_scalar.data(), m2_scalar.data(), g.data(), n, 0.05,
                         0.9, 0.999, 1e-8, 0.1, 0.001999);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(close(v_simd[i], v_scalar[i]));
        CHECK(close(m1_simd[i], m1_scalar[i]));
        CHECK(close(m2_simd[i], m2_scalar[i]));
      }
    }

    // nn_argmin_block
    {
      const std::size_t na = 37, nb = 53, dim = 21;
      const auto a = random_vec(na * dim, rng);
      const auto b = random_vec(nb * dim, rng);
      std::vector<double> a_sq(na), b_sq(nb);
      for (std::size_t i = 0; i < na; ++i) a_sq[i] = scalar.dot(a.data() + i * dim, a.data() + i * dim, dim);
      for (std::size_t j = 0; j < nb; ++j) b_sq[j] = scalar.dot(b.data() + j * dim, b.data() + j * dim, dim);
      std::vector<std::int64_t> idx_simd(na, -1), idx_scalar(na, -1);
      std::vector<double> dist_simd(na, std::numeric_limits<double>::infinity());
      std::vector<double> dist_scalar = dist_simd;
      simd.nn_argmin_block(a.data(), na, a_sq.data(), b.data(), nb, b_sq.data(), 0, dim,
                           idx_simd.data(), dist_simd.data());
      scalar.nn_argmin_block(a.data(), na, a_sq.data(), b.data(), nb, b_sq.data(), 0, dim,
                             idx_scalar.data(), dist_scalar.data());
      for (std::size_t i = 0; i < na; ++i) {
        CHECK(idx_simd[i] == idx_scalar[i]);
        CHECK(close(dist_simd[i], dist_scalar[i], 1e-10));
      }
    }
  }
}

TEST_CASE("kernels are deterministic run-to-run") {
  Rng rng(5);
  const std::size_t n = 1003;
  const auto a = random_vec(n, rng);
  const auto b = random_vec(n, rng);
  const auto& ops = kernels::active();
  CHECK(ops.dot(a.data(), b.data(), n) == ops.dot(a.data(), b.data(), n));
}
