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
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "docvl/errors.hpp"

namespace docvl {

/// Decoded 8-bit RGB raster, row-major, interleaved channels.
struct ImageBuffer {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h);
  ImageBuffer(int w, int h, std::vector<std::uint8_t> samples);

  int channels() const { return kChannels; }

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
  }

  bool operator==(const ImageBuffer&) const = default;
};

struct Box {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Box&) const = default;
};

/// Per-channel mean/std applied after scaling samples to [0, 1].
struct NormalizationStats {
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
};

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Normalized image. `values` has one row per pixel (row-major pixel order)
/// and one column per channel, so the memory layout is HWC.
template <typename Scalar>
struct PixelTensor {
  int width = 0;
  int height = 0;
  RowMatrix<Scalar> values;

  int channels() const { return static_cast<int>(values.cols()); }
};

/// Decodes a PNG or JPEG file to RGB. Grayscale and palette images are
/// expanded, alpha is dropped, 16-bit samples are reduced to 8 bits.
ImageBuffer load_image(const std::filesystem::path& path);

/// Decodes an in-memory PNG or JPEG.
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

/// Writes an 8-bit RGB PNG.
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers and edge clamping.
ImageBuffer resize(const ImageBuffer& img, int target_w, int target_h);

/// Copies the boxed region. The box must be non-empty and inside the image.
ImageBuffer crop(const ImageBuffer& img, const Box& box);

template <typename Scalar = float>
PixelTensor<Scalar> normalize(const ImageBuffer& img,
                              const NormalizationStats& stats = {}) {
  for (double s : stats.std) {
    if (s == 0.0) throw ArgumentError("normalize: std component is zero");
  }
  PixelTensor<Scalar> out;
  out.width = img.width;
  out.height = img.height;
  const Eigen::Index pixels = static_cast<Eigen::Index>(img.width) * img.height;
  out.values.resize(pixels, ImageBuffer::kChannels);
  for (Eigen::Index p = 0; p < pixels; ++p) {
    for (int c = 0; c < ImageBuffer::kChannels; ++c) {
      const double unit = img.data[p * ImageBuffer::kChannels + c] / 255.0;
      out.values(p, c) = static_cast<Scalar>((unit - stats.mean[c]) / stats.std[c]);
    }
  }
  return out;
}

/// Inverse of normalize, returning samples on the [0, 1] scale.
template <typename Scalar>
RowMatrix<Scalar> denormalize(const PixelTensor<Scalar>& tensor,
                              const NormalizationStats& stats = {}) {
  RowMatrix<Scalar> out(tensor.values.rows(), tensor.values.cols());
  for (Eigen::Index c = 0; c < tensor.values.cols(); ++c) {
    out.col(c) = tensor.values.col(c).array() * static_cast<Scalar>(stats.std[c]) +
                 static_cast<Scalar>(stats.mean[c]);
  }
  return out;
}

}  // namespace docvl
