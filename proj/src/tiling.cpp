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
#include "docvl/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace docvl {

namespace {

void check_dims(int img_w, int img_h) {
  if (img_w <= 0 || img_h <= 0) throw ArgumentError("image dimensions must be positive");
}

void check_config(const TilingConfig& config) {
  if (config.tile_size <= 0) throw ArgumentError("tile_size must be positive");
  if (config.min_tiles < 1 || config.min_tiles > config.max_tiles) {
    throw ArgumentError("tile range requires 1 <= min_tiles <= max_tiles");
  }
  if (config.msac_min_tiles < 1 || config.msac_min_tiles > config.msac_max_tiles) {
    throw ArgumentError("msac tile range requires 1 <= msac_min_tiles <= msac_max_tiles");
  }
}

}  // namespace

std::vector<GridShape> enumerate_grids(int min_tiles, int max_tiles) {
  if (min_tiles < 1) throw ArgumentError("enumerate_grids: min_tiles must be >= 1");
  if (min_tiles > max_tiles) throw ArgumentError("enumerate_grids: min_tiles > max_tiles");
  std::vector<GridShape> grids;
  for (int n = min_tiles; n <= max_tiles; ++n) {
    for (int r = 1; r <= n; ++r) {
      if (n % r == 0) grids.push_back({r, n / r});
    }
  }
  return grids;
}

GridShape select_grid(int img_w, int img_h, std::span<const GridShape> candidates,
                      int tile_size) {
  if (candidates.empty()) throw ArgumentError("select_grid: empty candidate list");
  check_dims(img_w, img_h);
  const double aspect = static_cast<double>(img_w) / img_h;
  const double area = static_cast<double>(img_w) * img_h;
  const double tile_area = static_cast<double>(tile_size) * tile_size;

  double best_diff = std::numeric_limits<double>::infinity();
  GridShape best = candidates.front();
  for (const GridShape& g : candidates) {
    const double diff = std::abs(aspect - g.aspect());
    if (diff < best_diff) {
      best_diff = diff;
      best = g;
    } else if (diff == best_diff && area > 0.5 * tile_area * g.tiles()) {
      best = g;
    }
  }
  return best;
}

TilingPlan make_tiling(const GridShape& grid, int tile_size, bool include_thumbnail) {
  if (grid.rows < 1 || grid.cols < 1) throw ArgumentError("grid must have rows, cols >= 1");
  TilingPlan plan;
  plan.grid = grid;
  plan.tile_size = tile_size;
  plan.resized_w = grid.cols * tile_size;
  plan.resized_h = grid.rows * tile_size;
  plan.include_thumbnail = include_thumbnail;
  plan.boxes.reserve(grid.tiles());
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      plan.boxes.push_back({c * tile_size, r * tile_size, tile_size, tile_size});
    }
  }
  return plan;
}

TilingPlan plan_dynamic(int img_w, int img_h, const TilingConfig& config) {
  check_config(config);
  check_dims(img_w, img_h);
  const auto candidates = enumerate_grids(config.min_tiles, config.max_tiles);
  const GridShape grid = select_grid(img_w, img_h, candidates, config.tile_size);
  // A single tile already is the global view.
  return make_tiling(grid, config.tile_size, config.use_thumbnail && grid.tiles() > 1);
}

MsacPlan plan_msac(int img_w, int img_h, const TilingConfig& config) {
  check_config(config);
  check_dims(img_w, img_h);
  MsacPlan plan;
  plan.tile_size = config.tile_size;
  plan.thumbnail = config.msac_thumbnail;
  const GridShape primary = plan_dynamic(img_w, img_h, config).grid;
  plan.primary = make_tiling(primary, config.tile_size, false);

  std::vector<GridShape> candidates;
  for (const GridShape& g : enumerate_grids(config.msac_min_tiles, config.msac_max_tiles)) {
    if (g != primary) candidates.push_back(g);
  }
  if (!candidates.empty()) {
    const GridShape secondary = select_grid(img_w, img_h, candidates, config.tile_size);
    plan.secondary = make_tiling(secondary, config.tile_size, false);
  }
  return plan;
}

void check_plan(const TilingPlan& plan) {
  if (plan.tile_size <= 0) throw ArgumentError("plan: tile_size must be positive");
  if (plan.resized_w != plan.grid.cols * plan.tile_size ||
      plan.resized_h != plan.grid.rows * plan.tile_size) {
    throw ArgumentError("plan: resized canvas does not match grid");
  }
  if (static_cast<int>(plan.boxes.size()) != plan.grid.tiles()) {
    throw ArgumentError("plan: box count does not match grid");
  }
  std::vector<bool> covered(plan.boxes.size(), false);
  for (const Box& b : plan.boxes) {
    if (b.w != plan.tile_size || b.h != plan.tile_size || b.x % plan.tile_size != 0 ||
        b.y % plan.tile_size != 0 || b.x < 0 || b.y < 0 || b.x + b.w > plan.resized_w ||
        b.y + b.h > plan.resized_h) {
      throw ArgumentError("plan: box is not an aligned tile inside the canvas");
    }
    const std::size_t cell = static_cast<std::size_t>(b.y / plan.tile_size) * plan.grid.cols +
                             b.x / plan.tile_size;
    if (covered[cell]) throw ArgumentError("plan: overlapping boxes");
    covered[cell] = true;
  }
}

std::vector<ImageBuffer> extract_tiles(const ImageBuffer& img, const TilingPlan& plan) {
  check_plan(plan);
  std::vector<ImageBuffer> tiles;
  tiles.reserve(plan.tile_count());
  const ImageBuffer canvas = resize(img, plan.resized_w, plan.resized_h);
  for (const Box& b : plan.boxes) tiles.push_back(crop(canvas, b));
  if (plan.include_thumbnail) tiles.push_back(resize(img, plan.tile_size, plan.tile_size));
  return tiles;
}

std::vector<ImageBuffer> extract_tiles(const ImageBuffer& img, const MsacPlan& plan) {
  std::vector<ImageBuffer> tiles = extract_tiles(img, plan.primary);
  if (plan.secondary) {
    auto more = extract_tiles(img, *plan.secondary);
    std::move(more.begin(), more.end(), std::back_inserter(tiles));
  }
  if (plan.thumbnail) tiles.push_back(resize(img, plan.tile_size, plan.tile_size));
  return tiles;
}

namespace {

nlohmann::json tiling_json(const TilingPlan& plan) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const Box& b : plan.boxes) boxes.push_back({b.x, b.y, b.w, b.h});
  return {
      {"grid", {{"rows", plan.grid.rows}, {"cols", plan.grid.cols}}},
      {"tile_size", plan.tile_size},
      {"resized", {{"width", plan.resized_w}, {"height", plan.resized_h}}},
      {"boxes", boxes},
  };
}

}  // namespace

nlohmann::json plan_to_json(const TilingPlan& plan, int tokens_per_tile) {
  nlohmann::json out = tiling_json(plan);
  out["schema_version"] = 1;
  out["mode"] = "dynamic";
  out["thumbnail"] = plan.include_thumbnail;
  out["tile_count"] = plan.tile_count();
  out["visual_tokens"] = plan.tile_count() * tokens_per_tile;
  return out;
}

nlohmann::json plan_to_json(const MsacPlan& plan, int tokens_per_tile) {
  nlohmann::json out;
  out["schema_version"] = 1;
  out["mode"] = "msac";
  out["primary"] = tiling_json(plan.primary);
  out["secondary"] = plan.secondary ? tiling_json(*plan.secondary) : nlohmann::json(nullptr);
  out["thumbnail"] = plan.thumbnail;
  out["tile_size"] = plan.tile_size;
  out["tile_count"] = plan.tile_count();
  out["visual_tokens"] = plan.tile_count() * tokens_per_tile;
  return out;
}

}  // namespace docvl
