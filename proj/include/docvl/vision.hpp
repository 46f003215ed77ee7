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

// Desk-scale vision path: patch embedding, a small pre-norm transformer
// encoder, pixel shuffle, and the MLP projector into the language model
// width. Weights are seeded and deterministic; only shapes and token
// budgets are meaningful.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "docvl/errors.hpp"
#include "docvl/image.hpp"
#include "docvl/tiling.hpp"

namespace docvl {

struct ModelConfig {
  int tile_size = kDefaultTileSize;
  int patch_size = 14;
  int vit_dim = 64;
  int vit_layers = 2;
  int vit_heads = 4;
  int vit_mlp_ratio = 4;
  int llm_dim = 128;
  /// Spatial downscale per axis of the pixel shuffle (ratio 1/shuffle_factor).
  int shuffle_factor = 2;
  std::uint64_t seed = 0;
  NormalizationStats norm;

  int patch_grid() const { return tile_size / patch_size; }
  int shuffled_grid() const { return patch_grid() / shuffle_factor; }
  int tokens_per_tile() const { return shuffled_grid() * shuffled_grid(); }
  int projector_in_dim() const { return vit_dim * shuffle_factor * shuffle_factor; }

  void validate() const {
    if (tile_size <= 0 || patch_size <= 0 || tile_size % patch_size != 0) {
      throw ArgumentError("ModelConfig: tile_size must be a positive multiple of patch_size");
    }
    if (shuffle_factor <= 0 || patch_grid() % shuffle_factor != 0) {
      throw ArgumentError("ModelConfig: shuffle_factor must divide the patch grid");
    }
    if (vit_dim <= 0 || vit_heads <= 0 || vit_dim % vit_heads != 0) {
      throw ArgumentError("ModelConfig: vit_dim must be divisible by vit_heads");
    }
    if (vit_layers < 0 || vit_mlp_ratio <= 0 || llm_dim <= 0) {
      throw ArgumentError("ModelConfig: layer counts and widths must be positive");
    }
  }
};

/// Token grid of width `dim`; row i of `data` is grid cell (i / grid_w, i % grid_w).
template <typename Scalar>
struct PatchTokens {
  int grid_h = 0;
  int grid_w = 0;
  RowMatrix<Scalar> data;

  int count() const { return grid_h * grid_w; }
  int dim() const { return static_cast<int>(data.cols()); }
};

template <typename Scalar>
struct VisualTokens {
  RowMatrix<Scalar> data;

  int num_tokens() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

/// Space-to-depth: each output cell concatenates its factor x factor input
/// block in row-major (dy, dx) order.
template <typename Scalar>
PatchTokens<Scalar> pixel_shuffle(const PatchTokens<Scalar>& in, int factor) {
  if (factor <= 0) throw ArgumentError("pixel_shuffle: factor must be positive");
  if (in.grid_h % factor != 0 || in.grid_w % factor != 0) {
    throw ArgumentError("pixel_shuffle: grid not divisible by factor");
  }
  const int dim = in.dim();
  PatchTokens<Scalar> out;
  out.grid_h = in.grid_h / factor;
  out.grid_w = in.grid_w / factor;
  out.data.resize(out.count(), static_cast<Eigen::Index>(dim) * factor * factor);
  for (int oy = 0; oy < out.grid_h; ++oy) {
    for (int ox = 0; ox < out.grid_w; ++ox) {
      const int o = oy * out.grid_w + ox;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const int i = (oy * factor + dy) * in.grid_w + (ox * factor + dx);
          out.data.row(o).segment((dy * factor + dx) * dim, dim) = in.data.row(i);
        }
      }
    }
  }
  return out;
}

/// Exact inverse of pixel_shuffle.
template <typename Scalar>
PatchTokens<Scalar> pixel_unshuffle(const PatchTokens<Scalar>& in, int factor) {
  if (factor <= 0 || in.dim() % (factor * factor) != 0) {
    throw ArgumentError("pixel_unshuffle: width not divisible by factor^2");
  }
  const int dim = in.dim() / (factor * factor);
  PatchTokens<Scalar> out;
  out.grid_h = in.grid_h * factor;
  out.grid_w = in.grid_w * factor;
  out.data.resize(out.count(), dim);
  for (int oy = 0; oy < in.grid_h; ++oy) {
    for (int ox = 0; ox < in.grid_w; ++ox) {
      const int o = oy * in.grid_w + ox;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const int i = (oy * factor + dy) * out.grid_w + (ox * factor + dx);
          out.data.row(i) = in.data.row(o).segment((dy * factor + dx) * dim, dim);
        }
      }
    }
  }
  return out;
}

/// Per-row layer norm with unit gain and zero shift.
template <typename Scalar>
RowMatrix<Scalar> layer_norm(const RowMatrix<Scalar>& x, Scalar eps = Scalar(1e-6)) {
  RowMatrix<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).eval();
    const Scalar var = centered.square().mean();
    out.row(r) = centered / std::sqrt(var + eps);
  }
  return out;
}

/// tanh-approximated GELU and its derivative.
template <typename Scalar>
Scalar gelu(Scalar x) {
  constexpr Scalar k = Scalar(0.7978845608028654);  // sqrt(2/pi)
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(k * (x + Scalar(0.044715) * x * x * x)));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
  constexpr Scalar k = Scalar(0.7978845608028654);
  const Scalar t = std::tanh(k * (x + Scalar(0.044715) * x * x * x));
  return Scalar(0.5) * (Scalar(1) + t) +
         Scalar(0.5) * x * (Scalar(1) - t * t) * k * (Scalar(1) + Scalar(3 * 0.044715) * x * x);
}

/// Portable uniform(-0.02, 0.02) stream; does not depend on the standard
/// library's distribution implementations.
class WeightStream {
 public:
  explicit WeightStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return -0.02 + 0.04 * unit;
  }

  template <typename Scalar>
  RowMatrix<Scalar> matrix(Eigen::Index rows, Eigen::Index cols) {
    RowMatrix<Scalar> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(next());
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

template <typename Scalar>
struct Linear {
  RowMatrix<Scalar> weight;  // in x out
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> bias;

  Linear() = default;
  Linear(WeightStream& stream, Eigen::Index in, Eigen::Index out)
      : weight(stream.matrix<Scalar>(in, out)), bias(stream.matrix<Scalar>(1, out)) {}

  RowMatrix<Scalar> operator()(const RowMatrix<Scalar>& x) const {
    RowMatrix<Scalar> y = x * weight;
    y.rowwise() += bias;
    return y;
  }
};

template <typename Scalar>
struct EncoderBlock {
  Linear<Scalar> qkv;
  Linear<Scalar> attn_out;
  Linear<Scalar> fc1;
  Linear<Scalar> fc2;
};

/// Per-stage shapes and checksums recorded while encoding one tile.
struct StageTrace {
  std::string stage;
  int rows = 0;
  int cols = 0;
  int grid_h = 0;
  int grid_w = 0;
  double sum = 0.0;
  double abs_sum = 0.0;
};

template <typename Scalar>
StageTrace trace_stage(std::string name, const RowMatrix<Scalar>& m, int grid_h = 0,
                       int grid_w = 0) {
  StageTrace t;
  t.stage = std::move(name);
  t.rows = static_cast<int>(m.rows());
  t.cols = static_cast<int>(m.cols());
  t.grid_h = grid_h;
  t.grid_w = grid_w;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = static_cast<double>(m.data()[i]);
    t.sum += v;
    t.abs_sum += std::abs(v);
  }
  return t;
}

template <typename Scalar>
class VisionModel {
 public:
  explicit VisionModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    WeightStream stream(config_.seed);
    const int patch_in = config_.patch_size * config_.patch_size * ImageBuffer::kChannels;
    patch_ = Linear<Scalar>(stream, patch_in, config_.vit_dim);
    blocks_.reserve(config_.vit_layers);
    for (int l = 0; l < config_.vit_layers; ++l) {
      EncoderBlock<Scalar> b;
      b.qkv = Linear<Scalar>(stream, config_.vit_dim, 3 * config_.vit_dim);
      b.attn_out = Linear<Scalar>(stream, config_.vit_dim, config_.vit_dim);
      b.fc1 = Linear<Scalar>(stream, config_.vit_dim, config_.vit_dim * config_.vit_mlp_ratio);
      b.fc2 = Linear<Scalar>(stream, config_.vit_dim * config_.vit_mlp_ratio, config_.vit_dim);
      blocks_.push_back(std::move(b));
    }
    proj1_ = Linear<Scalar>(stream, config_.projector_in_dim(), config_.llm_dim);
    proj2_ = Linear<Scalar>(stream, config_.llm_dim, config_.llm_dim);
  }

  const ModelConfig& config() const { return config_; }
  const Linear<Scalar>& patch_embedding() const { return patch_; }

  PatchTokens<Scalar> patch_embed(const PixelTensor<Scalar>& tile) const {
    const int ts = config_.tile_size;
    if (tile.width != ts || tile.height != ts || tile.channels() != ImageBuffer::kChannels) {
      throw ArgumentError("patch_embed: expected a " + std::to_string(ts) + "x" +
                          std::to_string(ts) + "x3 tile");
    }
    const int p = config_.patch_size;
    const int grid = config_.patch_grid();
    RowMatrix<Scalar> patches(static_cast<Eigen::Index>(grid) * grid,
                              static_cast<Eigen::Index>(p) * p * ImageBuffer::kChannels);
    for (int gy = 0; gy < grid; ++gy) {
      for (int gx = 0; gx < grid; ++gx) {
        const int row = gy * grid + gx;
        for (int dy = 0; dy < p; ++dy) {
          const Eigen::Index pixel = static_cast<Eigen::Index>(gy * p + dy) * ts + gx * p;
          patches.row(row).segment(static_cast<Eigen::Index>(dy) * p * 3, p * 3) =
              Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(
                  tile.values.data() + pixel * 3, p * 3);
        }
      }
    }
    return {grid, grid, patch_(patches)};
  }

  PatchTokens<Scalar> vit_forward(PatchTokens<Scalar> tokens) const {
    const int grid = config_.patch_grid();
    if (tokens.grid_h != grid || tokens.grid_w != grid || tokens.dim() != config_.vit_dim ||
        tokens.data.rows() != tokens.count()) {
      throw ArgumentError("vit_forward: token grid does not match the model geometry");
    }
    const int heads = config_.vit_heads;
    const int head_dim = config_.vit_dim / heads;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(head_dim));
    RowMatrix<Scalar>& x = tokens.data;
    for (const EncoderBlock<Scalar>& block : blocks_) {
      const RowMatrix<Scalar> qkv = block.qkv(layer_norm(x));
      RowMatrix<Scalar> attended(x.rows(), config_.vit_dim);
      for (int h = 0; h < heads; ++h) {
        const auto q = qkv.middleCols(h * head_dim, head_dim);
        const auto k = qkv.middleCols(config_.vit_dim + h * head_dim, head_dim);
        const auto v = qkv.middleCols(2 * config_.vit_dim + h * head_dim, head_dim);
        RowMatrix<Scalar> scores = (q * k.transpose()) * scale;
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
          const Scalar m = scores.row(r).maxCoeff();
          scores.row(r) = (scores.row(r).array() - m).exp();
          scores.row(r) /= scores.row(r).sum();
        }
        attended.middleCols(h * head_dim, head_dim) = scores * v;
      }
      x += block.attn_out(attended);
      RowMatrix<Scalar> hidden = block.fc1(layer_norm(x));
      hidden = hidden.unaryExpr([](Scalar s) { return gelu(s); });
      x += block.fc2(hidden);
    }
    return tokens;
  }

  VisualTokens<Scalar> project(const PatchTokens<Scalar>& tokens) const {
    if (tokens.dim() != config_.projector_in_dim()) {
      throw ArgumentError("project: token width does not match the projector input");
    }
    RowMatrix<Scalar> hidden = proj1_(tokens.data);
    hidden = hidden.unaryExpr([](Scalar s) { return gelu(s); });
    return {proj2_(hidden)};
  }

  /// Directional derivative of project() at `tokens` along `direction`.
  RowMatrix<Scalar> project_jvp(const PatchTokens<Scalar>& tokens,
                                const RowMatrix<Scalar>& direction) const {
    if (tokens.dim() != config_.projector_in_dim() || direction.rows() != tokens.data.rows() ||
        direction.cols() != tokens.data.cols()) {
      throw ArgumentError("project_jvp: shape mismatch");
    }
    const RowMatrix<Scalar> pre = proj1_(tokens.data);
    const RowMatrix<Scalar> dpre = direction * proj1_.weight;
    const RowMatrix<Scalar> dhidden =
        pre.unaryExpr([](Scalar s) { return gelu_grad(s); }).cwiseProduct(dpre);
    return dhidden * proj2_.weight;
  }

  /// Tile -> 2-D block of visual tokens; records stages into `trace` if given.
  VisualTokens<Scalar> encode_tile(const ImageBuffer& tile,
                                   std::vector<StageTrace>* trace = nullptr) const {
    const PixelTensor<Scalar> pixels = normalize<Scalar>(tile, config_.norm);
    PatchTokens<Scalar> tokens = patch_embed(pixels);
    if (trace) trace->push_back(trace_stage("patch_embed", tokens.data, tokens.grid_h, tokens.grid_w));
    tokens = vit_forward(std::move(tokens));
    if (trace) trace->push_back(trace_stage("vit", tokens.data, tokens.grid_h, tokens.grid_w));
    tokens = pixel_shuffle(tokens, config_.shuffle_factor);
    if (trace) trace->push_back(trace_stage("pixel_shuffle", tokens.data, tokens.grid_h, tokens.grid_w));
    VisualTokens<Scalar> out = project(tokens);
    if (trace) trace->push_back(trace_stage("projector", out.data));
    return out;
  }

  /// One token block per tile in plan order. Tiles may be encoded on up to
  /// `jobs` threads; output order never depends on scheduling.
  template <typename Plan>
  std::vector<VisualTokens<Scalar>> encode_image(
      const ImageBuffer& img, const Plan& plan, int jobs = 1,
      std::vector<std::vector<StageTrace>>* traces = nullptr) const {
    const std::vector<ImageBuffer> tiles = extract_tiles(img, plan);
    for (const ImageBuffer& t : tiles) {
      if (t.width != config_.tile_size || t.height != config_.tile_size) {
        throw ArgumentError("encode_image: plan tile size differs from the model tile size");
      }
    }
    std::vector<VisualTokens<Scalar>> blocks(tiles.size());
    if (traces) traces->assign(tiles.size(), {});
    auto work = [&](std::size_t i) {
      blocks[i] = encode_tile(tiles[i], traces ? &(*traces)[i] : nullptr);
    };
    const std::size_t workers =
        std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(tiles.size(), 1));
    if (workers <= 1) {
      for (std::size_t i = 0; i < tiles.size(); ++i) work(i);
      return blocks;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < tiles.size(); i += workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return blocks;
  }

 private:
  ModelConfig config_;
  Linear<Scalar> patch_;
  std::vector<EncoderBlock<Scalar>> blocks_;
  Linear<Scalar> proj1_;
  Linear<Scalar> proj2_;
};

}  // namespace docvl
