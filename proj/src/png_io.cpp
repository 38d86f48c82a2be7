// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#include "gmpi/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "gmpi/error.h"

namespace gmpi {

namespace {

struct FileCloser {
  void operator()(FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = message;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

void write_png(const std::string& path, const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorKind::InvalidArgument, "PNG bit depth must be 8 or 16");
  if (image.channels() != 1 && image.channels() != 3) throw Error(ErrorKind::InvalidArgument, "PNG output needs 1 or 3 channels");
  if (image.empty()) throw Error(ErrorKind::InvalidArgument, "cannot write an empty image");

  const int bytes = bit_depth / 8;
  const double max_code = bit_depth == 8 ? 255.0 : 65535.0;
  const size_t stride = static_cast<size_t>(image.width()) * image.channels() * bytes;
  std::vector<png_byte> buffer(stride * image.height());
  for (size_t k = 0; k < image.size(); ++k) {
    const auto code = static_cast<unsigned>(std::lround(std::clamp(image.data()[k], 0.0, 1.0) * max_code));
    if (bytes == 1) {
      buffer[k] = static_cast<png_byte>(code);
    } else {
      buffer[2 * k] = static_cast<png_byte>(code >> 8);
      buffer[2 * k + 1] = static_cast<png_byte>(code & 0xff);
    }
  }
  std::vector<png_bytep> rows(static_cast<size_t>(image.height()));
  for (size_t y = 0; y < rows.size(); ++y) rows[y] = buffer.data() + y * stride;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  if (!png) throw Error(ErrorKind::Io, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "writing '" + path + "' failed: " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), bit_depth,
               image.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

PngImage read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw Error(ErrorKind::Io, "'" + path + "' is not a PNG file");

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  if (!png) throw Error(ErrorKind::Io, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  // Declared before setjmp so nothing with a destructor is skipped by longjmp.
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "reading '" + path + "' failed: " + message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : color_type == PNG_COLOR_TYPE_GRAY ? 1 : 0;
  if (channels == 0 || (bit_depth != 8 && bit_depth != 16) || png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "'" + path + "' must be a non-interlaced 8/16-bit gray or RGB PNG");
  }
  const size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (size_t y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PngImage out{Image(static_cast<int>(width), static_cast<int>(height), channels), bit_depth};
  const double max_code = bit_depth == 8 ? 255.0 : 65535.0;
  for (size_t k = 0; k < out.image.size(); ++k) {
    const unsigned code = bit_depth == 8 ? buffer[k] : (static_cast<unsigned>(buffer[2 * k]) << 8) | buffer[2 * k + 1];
    out.image.data()[k] = code / max_code;
  }
  return out;
}

}  // namespace gmpi
