// Copyright 2026 The docvl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "docvl/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace docvl {

ImageBuffer::ImageBuffer(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ArgumentError("ImageBuffer: dimensions must be positive");
  data.assign(static_cast<std::size_t>(w) * h * kChannels, 0);
}

ImageBuffer::ImageBuffer(int w, int h, std::vector<std::uint8_t> samples)
    : width(w), height(h), data(std::move(samples)) {
  if (w <= 0 || h <= 0) throw ArgumentError("ImageBuffer: dimensions must be positive");
  if (data.size() != static_cast<std::size_t>(w) * h * kChannels) {
    throw ArgumentError("ImageBuffer: sample count does not match width*height*3");
  }
}

namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void png_read_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->size) {
    png_error(png, "truncated stream");
  }
  std::memcpy(out, reader->data + reader->offset, length);
  reader->offset += length;
}

void png_warning_silent(png_structp, png_const_charp) {}

// Fills `pixels` (already sized by the caller after the header pass) or
// returns false on any libpng error. No C++ objects with destructors live
// between setjmp and the possible longjmp.
struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
};

bool decode_png_raw(const std::vector<std::uint8_t>& bytes, PngHeader& header,
                    std::vector<std::uint8_t>& pixels, std::vector<png_bytep>& rows,
                    char* message, std::size_t message_size) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                           png_warning_silent);
  if (png == nullptr) {
    std::snprintf(message, message_size, "png: cannot allocate decoder");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(message, message_size, "png: cannot allocate info");
    return false;
  }
  MemoryReader reader{bytes.data(), bytes.size(), 0};

  if (setjmp(png_jmpbuf(png))) {
    std::snprintf(message, message_size, "png: corrupt or unsupported stream");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }

  png_set_read_fn(png, &reader, png_read_memory);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  header.width = png_get_image_width(png, info);
  header.height = png_get_image_height(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  if (header.width == 0 || header.height == 0 || rowbytes != header.width * 3u) {
    std::snprintf(message, message_size, "png: unexpected layout after transforms");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  pixels.resize(static_cast<std::size_t>(rowbytes) * header.height);
  rows.resize(header.height);
  for (png_uint_32 y = 0; y < header.height; ++y) rows[y] = pixels.data() + y * rowbytes;

  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes) {
  PngHeader header;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  char message[128] = {0};
  if (!decode_png_raw(bytes, header, pixels, rows, message, sizeof(message))) {
    throw DecodeError(message);
  }
  return ImageBuffer(static_cast<int>(header.width), static_cast<int>(header.height),
                     std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_output_silent(j_common_ptr) {}

bool decode_jpeg_raw(const std::vector<std::uint8_t>& bytes, int& width, int& height,
                     std::vector<std::uint8_t>& pixels, char* message,
                     std::size_t message_size) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_output_silent;
  err.message[0] = '\0';

  if (setjmp(err.jump)) {
    std::snprintf(message, message_size, "jpeg: %s", err.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  if (cinfo.output_components != 3) {
    std::snprintf(message, message_size, "jpeg: unsupported component count");
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  pixels.resize(stride * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes) {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  char message[JMSG_LENGTH_MAX + 16] = {0};
  if (!decode_jpeg_raw(bytes, width, height, pixels, message, sizeof(message))) {
    throw DecodeError(message);
  }
  return ImageBuffer(width, height, std::move(pixels));
}

}  // namespace

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  throw DecodeError("unsupported image format (expected PNG or JPEG)");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return decode_image(bytes);
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data.data(), 0,
                               nullptr)) {
    std::string reason = image.message;
    png_image_free(&image);
    throw IoError("cannot write png " + path.string() + ": " + reason);
  }
}

namespace {

struct AxisSample {
  int lo;
  int hi;
  double weight;  // weight of `hi`
};

std::vector<AxisSample> axis_samples(int src, int dst) {
  std::vector<AxisSample> samples(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double pos = (i + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src - 1);
    samples[i] = {lo, hi, pos - lo};
  }
  return samples;
}

}  // namespace

ImageBuffer resize(const ImageBuffer& img, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) {
    throw ArgumentError("resize: target dimensions must be positive");
  }
  if (target_w == img.width && target_h == img.height) return img;

  const auto xs = axis_samples(img.width, target_w);
  const auto ys = axis_samples(img.height, target_h);
  ImageBuffer out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const AxisSample& sy = ys[y];
    for (int x = 0; x < target_w; ++x) {
      const AxisSample& sx = xs[x];
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        const double top = img.at(sx.lo, sy.lo, c) * (1.0 - sx.weight) +
                           img.at(sx.hi, sy.lo, c) * sx.weight;
        const double bottom = img.at(sx.lo, sy.hi, c) * (1.0 - sx.weight) +
                              img.at(sx.hi, sy.hi, c) * sx.weight;
        const double value = top * (1.0 - sy.weight) + bottom * sy.weight;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  return out;
}

ImageBuffer crop(const ImageBuffer& img, const Box& box) {
  if (box.w <= 0 || box.h <= 0) throw ArgumentError("crop: empty box");
  if (box.x < 0 || box.y < 0 || box.x + box.w > img.width || box.y + box.h > img.height) {
    throw ArgumentError("crop: box outside image bounds");
  }
  ImageBuffer out(box.w, box.h);
  const std::size_t row_bytes = static_cast<std::size_t>(box.w) * ImageBuffer::kChannels;
  for (int y = 0; y < box.h; ++y) {
    const auto* src = &img.data[(static_cast<std::size_t>(box.y + y) * img.width + box.x) *
                                ImageBuffer::kChannels];
    std::copy(src, src + row_bytes, out.data.begin() + y * row_bytes);
  }
  return out;
}

}  // namespace docvl
