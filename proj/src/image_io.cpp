#include "pdmatch/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace pdmatch {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

double byte_to_value(unsigned char u) { return 2.0 * u / 255.0 - 1.0; }

unsigned char value_to_byte(double v) {
  v = std::min(1.0, std::max(-1.0, v));
  return static_cast<unsigned char>(std::lround(255.0 * (v + 1.0) / 2.0));
}

Image decode_png(std::FILE* fp, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("load_image: png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("load_image: png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_image: PNG decode error in '" + path + "'");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_image: unsupported bit depth 16 in '" + path + "' (8-bit only)");
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int height = static_cast<int>(png_get_image_height(png, info));
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_image: unsupported channel layout in '" + path + "'");
  }

  std::vector<unsigned char> rows_data(static_cast<std::size_t>(height) * width * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = rows_data.data() + static_cast<std::size_t>(y) * width * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img = Image::zeros(height, width, channels);
  for (std::size_t i = 0; i < rows_data.size(); ++i) img.data[i] = byte_to_value(rows_data[i]);
  return img;
}

struct JpegErrorContext {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
  auto* ctx = reinterpret_cast<JpegErrorContext*>(cinfo->err);
  std::longjmp(ctx->jump, 1);
}

Image decode_jpeg(std::FILE* fp, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorContext err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_trampoline;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error("load_image: JPEG decode error in '" + path + "'");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = (cinfo.jpeg_color_space == JCS_GRAYSCALE) ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int height = static_cast<int>(cinfo.output_height);
  const int width = static_cast<int>(cinfo.output_width);
  const int channels = cinfo.output_components;
  if (channels != 1 && channels != 3) {
    jpeg_destroy_decompress(&cinfo);
    throw std::runtime_error("load_image: unsupported channel layout in '" + path + "'");
  }

  Image img = Image::zeros(height, width, channels);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * channels);
  unsigned char* row_ptr = row.data();
  for (int y = 0; y < height; ++y) {
    jpeg_read_scanlines(&cinfo, &row_ptr, 1);
    for (std::size_t i = 0; i < row.size(); ++i)
      img.data[static_cast<std::size_t>(y) * row.size() + i] = byte_to_value(row[i]);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("load_image: cannot open '" + path + "'");

  unsigned char magic[8] = {};
  const std::size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
  std::rewind(fp.get());
  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return decode_png(fp.get(), path);
  if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8) return decode_jpeg(fp.get(), path);
  throw std::runtime_error("load_image: '" + path + "' is neither PNG nor JPEG");
}

void save_image(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("save_image: channels must be 1 or 3");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("save_image: cannot open '" + path + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("save_image: png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("save_image: png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_image: PNG encode error for '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = value_to_byte(img.data[static_cast<std::size_t>(y) * row.size() + i]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace pdmatch
