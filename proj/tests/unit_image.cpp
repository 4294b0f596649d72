#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "pdmatch/image.hpp"
#include "pdmatch/image_io.hpp"
#include "support/fixtures.hpp"

using namespace pdmatch;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Minimal libpng writer independent of save_image, used as the decode oracle.
void write_gray_png(const std::string& path, const std::vector<unsigned char>& pixels,
                    int height, int width, int bit_depth) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int bytes_per_pixel = bit_depth / 8;
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * width * bytes_per_pixel));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_gray_jpeg(const std::string& path, const std::vector<unsigned char>& pixels,
                     int height, int width, int quality) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  REQUIRE(fp != nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, fp);
  cinfo.image_width = width;
  cinfo.image_height = height;
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  for (int y = 0; y < height; ++y) {
    JSAMPROW row = const_cast<JSAMPROW>(pixels.data() + static_cast<std::size_t>(y) * width);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(fp);
}

// Straightforward per-pixel bilinear reference for small cases.
double bilinear_oracle(const Image& img, int c, double out_y, double out_x, int out_h, int out_w) {
  double fy = (out_y + 0.5) * img.height / out_h - 0.5;
  double fx = (out_x + 0.5) * img.width / out_w - 0.5;
  fy = std::min(std::max(fy, 0.0), static_cast<double>(img.height - 1));
  fx = std::min(std::max(fx, 0.0), static_cast<double>(img.width - 1));
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const int y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
  const double ty = fy - y0, tx = fx - x0;
  return (1 - ty) * ((1 - tx) * img.at(y0, x0, c) + tx * img.at(y0, x1, c)) +
         ty * ((1 - tx) * img.at(y1, x0, c) + tx * img.at(y1, x1, c));
}

}  // namespace

TEST_CASE("load_image maps 8-bit values with 2u/255 - 1") {
  const std::string path = temp_path("pdmatch_gray3.png");
  write_gray_png(path, {0, 128, 255}, 1, 3, 8);
  const Image img = load_image(path);
  CHECK(img.height == 1);
  CHECK(img.width == 3);
  CHECK(img.channels == 1);
  CHECK(img.at(0, 0, 0) == -1.0);
  CHECK(img.at(0, 1, 0) == doctest::Approx(2.0 * 128 / 255 - 1.0).epsilon(1e-12));
  CHECK(img.at(0, 2, 0) == 1.0);
}

TEST_CASE("save_image hits the quantization endpoints and round-trips within 1/255") {
  Image img = Image::zeros(2, 2, 1);
  img.at(0, 0, 0) = -1.0;
  img.at(0, 1, 0) = 1.0;
  img.at(1, 0, 0) = 0.25;
  img.at(1, 1, 0) = 1.7;  // clipped before quantization
  const std::string path = temp_path("pdmatch_roundtrip.png");
  save_image(img, path);
  const Image back = load_image(path);
  CHECK(back.at(0, 0, 0) == -1.0);
  CHECK(back.at(0, 1, 0) == 1.0);
  CHECK(back.at(1, 1, 0) == 1.0);
  CHECK(std::abs(back.at(1, 0, 0) - 0.25) <= 1.0 / 255.0);

  const Image color = fixtures::random_image(9, 7, 3, 42);
  const std::string color_path = temp_path("pdmatch_roundtrip_rgb.png");
  save_image(color, color_path);
  const Image color_back = load_image(color_path);
  REQUIRE(color_back.same_shape(color));
  for (std::size_t i = 0; i < color.data.size(); ++i)
    CHECK(std::abs(color.data[i] - color_back.data[i]) <= 1.0 / 255.0);
}

TEST_CASE("load_image rejects 16-bit PNGs and non-images") {
  const std::string path16 = temp_path("pdmatch_16bit.png");
  write_gray_png(path16, {0, 0, 255, 255}, 1, 2, 16);
  CHECK_THROWS_WITH_AS(load_image(path16), doctest::Contains("bit depth"), std::runtime_error);

  const std::string garbage = temp_path("pdmatch_garbage.bin");
  std::FILE* fp = std::fopen(garbage.c_str(), "wb");
  std::fputs("not an image at all", fp);
  std::fclose(fp);
  CHECK_THROWS_AS(load_image(garbage), std::runtime_error);
  CHECK_THROWS_AS(load_image(temp_path("pdmatch_does_not_exist.png")), std::runtime_error);
}

TEST_CASE("load_image decodes JPEG") {
  const int h = 16, w = 24;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      pixels[static_cast<std::size_t>(y) * w + x] = static_cast<unsigned char>(10 * (x / 3) + 20);
  const std::string path = temp_path("pdmatch_smooth.jpg");
  write_gray_jpeg(path, pixels, h, w, 95);
  const Image img = load_image(path);
  REQUIRE(img.height == h);
  REQUIRE(img.width == w);
  REQUIRE(img.channels == 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double expected = 2.0 * pixels[static_cast<std::size_t>(y) * w + x] / 255.0 - 1.0;
      CHECK(std::abs(img.at(y, x, 0) - expected) < 0.08);  // lossy codec slack
    }
}

TEST_CASE("resize identity and constants are exact") {
  const Image img = fixtures::random_image(11, 14, 3, 7);
  CHECK(bitwise_equal(resize(img, 11, 14), img));

  Image constant = Image::zeros(9, 5, 1);
  for (double& v : constant.data) v = 0.377;
  for (const auto& [nh, nw] : {std::pair{3, 17}, {20, 2}, {9, 5}, {31, 31}}) {
    const Image r = resize(constant, nh, nw);
    for (const double v : r.data) CHECK(v == 0.377);
  }

  // Up then down preserves a constant exactly.
  const Image up = resize(constant, 18, 10);
  const Image down = resize(up, 9, 5);
  CHECK(bitwise_equal(down, constant));
}

TEST_CASE("resize matches the scalar bilinear oracle") {
  const Image board = fixtures::checkerboard(4, 4);
  const Image half = resize(board, 2, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      CHECK(half.at(y, x, 0) == doctest::Approx(bilinear_oracle(board, 0, y, x, 2, 2)).epsilon(1e-12));

  const Image img = fixtures::random_image(7, 9, 3, 123);
  const Image out = resize(img, 13, 4);
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(out.at(y, x, c) == doctest::Approx(bilinear_oracle(img, c, y, x, 13, 4)).epsilon(1e-12));
}

TEST_CASE("build_pyramid matches the frozen 180x250 example") {
  const Image img = fixtures::random_image(180, 250, 1, 3);
  const auto levels = build_pyramid(img, {0.85, 28});
  CHECK(levels.size() == 12);
  CHECK(levels.front().min_dim() == 30);
  CHECK(bitwise_equal(levels.back(), img));
  // Adjacent dims follow the rounded ratio within one pixel.
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    CHECK(std::abs(levels[i].height - std::lround(levels[i + 1].height * 0.85)) <= 1);
    CHECK(std::abs(levels[i].width - std::lround(levels[i + 1].width * 0.85)) <= 1);
    CHECK(levels[i].height < levels[i + 1].height);
  }
  // Deterministic reconstruction.
  const auto again = build_pyramid(img, {0.85, 28});
  REQUIRE(again.size() == levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) CHECK(bitwise_equal(again[i], levels[i]));
}

TEST_CASE("build_pyramid stopping rule") {
  const Image img = fixtures::random_image(32, 32, 1, 5);
  CHECK(build_pyramid(img, {0.5, 28}).size() == 1);  // 16 < 28

  const Image wide = fixtures::random_image(40, 200, 1, 6);
  const auto levels = build_pyramid(wide, {0.9, 36});
  CHECK(levels.size() == 2);  // 36 >= 36, then 32 < 36 stops on the min dimension
  CHECK(levels.front().height == 36);
}

TEST_CASE("clip clamps and is idempotent") {
  Image img = Image::zeros(1, 3, 1);
  img.at(0, 0, 0) = 1.7;
  img.at(0, 1, 0) = -2.3;
  img.at(0, 2, 0) = 0.4;
  const Image c = clip(img);
  CHECK(c.at(0, 0, 0) == 1.0);
  CHECK(c.at(0, 1, 0) == -1.0);
  CHECK(c.at(0, 2, 0) == 0.4);
  CHECK(bitwise_equal(clip(c), c));
}

TEST_CASE("add_noise determinism and statistics") {
  const Image img = fixtures::random_image(24, 24, 3, 9);

  Rng rng_zero(1);
  CHECK(bitwise_equal(add_noise(img, 0.0, rng_zero), img));

  Rng a(77), b(77), c(78);
  const Image na = add_noise(img, 1.5, a);
  const Image nb = add_noise(img, 1.5, b);
  const Image nc = add_noise(img, 1.5, c);
  CHECK(bitwise_equal(na, nb));
  CHECK_FALSE(bitwise_equal(na, nc));

  double mean = 0.0;
  for (std::size_t i = 0; i < img.data.size(); ++i) mean += na.data[i] - img.data[i];
  mean /= static_cast<double>(img.data.size());
  const double bound = 3.0 * 1.5 / std::sqrt(static_cast<double>(img.data.size()));
  CHECK(std::abs(mean) < bound);
}

TEST_CASE("gaussian_blur preserves constants and spreads an impulse") {
  Image constant = Image::zeros(8, 8, 1);
  for (double& v : constant.data) v = -0.2;
  const Image blurred = gaussian_blur(constant, 1.1);
  for (const double v : blurred.data) CHECK(v == doctest::Approx(-0.2).epsilon(1e-12));

  Image impulse = Image::zeros(9, 9, 1);
  impulse.at(4, 4, 0) = 1.0;
  const Image spread = gaussian_blur(impulse, 1.0);
  CHECK(spread.at(4, 4, 0) < 1.0);
  CHECK(spread.at(4, 3, 0) > 0.0);
  double total = 0.0;
  for (const double v : spread.data) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));  // interior impulse, mass preserved
}
