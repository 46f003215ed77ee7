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

#include <optional>
#include <span>
#include <vector>

#include "docvl/image.hpp"
#include "json.hpp"

namespace docvl {

/// Visual tokens one 448x448 tile contributes after patching (14 px) and a
/// 2x2 pixel shuffle: (448 / 14 / 2)^2.
inline constexpr int kTokensPerTile = 256;
inline constexpr int kDefaultTileSize = 448;

struct GridShape {
  int rows = 1;
  int cols = 1;

  int tiles() const { return rows * cols; }
  double aspect() const { return static_cast<double>(cols) / rows; }

  bool operator==(const GridShape&) const = default;
};

struct TilingConfig {
  int min_tiles = 1;
  int max_tiles = 6;
  int tile_size = kDefaultTileSize;
  /// Append a whole-image view to multi-tile dynamic plans.
  bool use_thumbnail = true;
  /// Tile-count range of the secondary MSAC branch.
  int msac_min_tiles = 2;
  int msac_max_tiles = 6;
  bool msac_thumbnail = true;
};

/// Row-major tiling of a resized canvas of (cols * tile_size) x (rows * tile_size).
struct TilingPlan {
  GridShape grid;
  int tile_size = kDefaultTileSize;
  int resized_w = 0;
  int resized_h = 0;
  std::vector<Box> boxes;
  bool include_thumbnail = false;

  int tile_count() const {
    return static_cast<int>(boxes.size()) + (include_thumbnail ? 1 : 0);
  }

  bool operator==(const TilingPlan&) const = default;
};

/// Primary grid, optional secondary grid of a different shape, and a
/// global thumbnail. Tile order: primary boxes, secondary boxes, thumbnail.
struct MsacPlan {
  TilingPlan primary;
  std::optional<TilingPlan> secondary;
  bool thumbnail = true;
  int tile_size = kDefaultTileSize;

  int tile_count() const {
    return static_cast<int>(primary.boxes.size()) +
           (secondary ? static_cast<int>(secondary->boxes.size()) : 0) + (thumbnail ? 1 : 0);
  }

  bool operator==(const MsacPlan&) const = default;
};

/// Every (rows, cols) with min_tiles <= rows*cols <= max_tiles, ordered by
/// tile count and then by rows.
std::vector<GridShape> enumerate_grids(int min_tiles, int max_tiles);

/// Closest aspect ratio wins. On an exact tie a later candidate replaces the
/// current best only when the image area exceeds half the candidate's canvas.
GridShape select_grid(int img_w, int img_h, std::span<const GridShape> candidates,
                      int tile_size = kDefaultTileSize);

/// Row-major boxes for `grid` at `tile_size`.
TilingPlan make_tiling(const GridShape& grid, int tile_size, bool include_thumbnail);

TilingPlan plan_dynamic(int img_w, int img_h, const TilingConfig& config = {});

MsacPlan plan_msac(int img_w, int img_h, const TilingConfig& config = {});

/// Resizes to the plan canvas and crops each box; the thumbnail, when
/// present, is the original image resized to tile_size x tile_size.
std::vector<ImageBuffer> extract_tiles(const ImageBuffer& img, const TilingPlan& plan);
std::vector<ImageBuffer> extract_tiles(const ImageBuffer& img, const MsacPlan& plan);

/// Throws ArgumentError unless boxes exactly partition the resized canvas.
void check_plan(const TilingPlan& plan);

nlohmann::json plan_to_json(const TilingPlan& plan, int tokens_per_tile = kTokensPerTile);
nlohmann::json plan_to_json(const MsacPlan& plan, int tokens_per_tile = kTokensPerTile);

}  // namespace docvl
