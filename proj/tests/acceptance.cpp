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
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "docvl/cli.hpp"
#include "docvl/mixture.hpp"
#include "docvl/schedule.hpp"
#include "docvl/scoring.hpp"
#include "docvl/text_util.hpp"
#include "docvl/tiling.hpp"
#include "docvl/tree_edit.hpp"
#include "docvl/vision.hpp"
#include "oracles/apportion_oracle.hpp"
#include "oracles/grid_oracle.hpp"
#include "oracles/ted_oracle.hpp"
#include "random_trees.hpp"

namespace {

using namespace docvl;
using Clock = std::chrono::steady_clock;

const std::filesystem::path kRepoData = DOCVL_REPO_DATA;

struct Verdict {
  bool pass = true;
  std::string detail;
};

#define REQUIRE(cond, ...)                                 \
  do {                                                     \
    if (!(cond)) return Verdict{false, fmt::format(__VA_ARGS__)}; \
  } while (0)

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::pair<int, int>> sweep() {
  std::mt19937 rng(20241015);
  std::uniform_int_distribution<int> dim(1, 8192);
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < 10000; ++i) out.emplace_back(dim(rng), dim(rng));
  // Exact-ratio and tie-prone shapes on top of the random draws.
  for (int k = 1; k <= 6; ++k) {
    out.emplace_back(448 * k, 448);
    out.emplace_back(448, 448 * k);
    out.emplace_back(448 * k, 448 * k);
  }
  return out;
}

Verdict tiling_bounds() {
  const auto t0 = Clock::now();
  const auto candidates = enumerate_grids(1, 6);
  std::vector<oracle::Grid> reference;
  for (const auto& g : candidates) reference.push_back({g.rows, g.cols});
  const auto cases = sweep();
  for (const auto& [w, h] : cases) {
    const TilingPlan p = plan_dynamic(w, h);
    REQUIRE(p.grid.tiles() >= 1 && p.grid.tiles() <= 6, "{}x{} gave {} tiles", w, h, p.grid.tiles());
    const auto want = oracle::best_grid(w, h, reference, kDefaultTileSize);
    const GridShape got = select_grid(w, h, candidates);
    REQUIRE(got.rows == want.rows && got.cols == want.cols, "{}x{}: got {}x{}, oracle {}x{}", w,
            h, got.rows, got.cols, want.rows, want.cols);
  }
  const double secs = seconds_since(t0);
  REQUIRE(secs < 5.0, "sweep took {:.2f}s", secs);
  return {true, fmt::format("{} sizes, oracle agreement 100%, {:.2f}s", cases.size(), secs)};
}

Verdict msac_bounds() {
  const auto cases = sweep();
  int with_secondary = 0;
  for (const auto& [w, h] : cases) {
    const MsacPlan p = plan_msac(w, h);
    REQUIRE(p.thumbnail, "{}x{} lacks the thumbnail", w, h);
    if (!p.secondary) continue;
    ++with_secondary;
    const int n = p.secondary->grid.tiles();
    REQUIRE(n >= 2 && n <= 6, "{}x{} secondary has {} tiles", w, h, n);
    REQUIRE(p.secondary->grid != p.primary.grid, "{}x{} secondary equals primary", w, h);
  }
  return {true, fmt::format("{} sizes, {} with a secondary grid", cases.size(), with_secondary)};
}

ImageBuffer noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageBuffer img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

Verdict token_arithmetic() {
  ModelConfig cfg;  // 448 tiles, 14-pixel patches, 2x2 shuffle
  cfg.vit_dim = 8;
  cfg.vit_heads = 2;
  cfg.vit_layers = 1;
  cfg.llm_dim = 16;
  const VisionModel<float> model(cfg);
  auto total = [](const std::vector<VisualTokens<float>>& blocks) {
    int n = 0;
    for (const auto& b : blocks) n += b.num_tokens();
    return n;
  };
  struct Case {
    int w, h;
    bool msac;
  };
  int max_dynamic = 0;
  int max_msac = 0;
  for (const Case& c : {Case{448, 448, false}, Case{896, 448, false}, Case{896, 896, false},
                        Case{2688, 448, false}, Case{448, 448, true}, Case{1075, 448, true},
                        Case{1344, 896, true}}) {
    std::vector<VisualTokens<float>> blocks;
    int tiles = 0;
    if (c.msac) {
      const MsacPlan p = plan_msac(c.w, c.h);
      blocks = model.encode_image(noise(c.w, c.h, c.w), p, 2);
      tiles = p.tile_count();
    } else {
      const TilingPlan p = plan_dynamic(c.w, c.h);
      blocks = model.encode_image(noise(c.w, c.h, c.h), p, 2);
      tiles = p.tile_count();
    }
    REQUIRE(static_cast<int>(blocks.size()) == tiles, "{}x{}: {} blocks for {} tiles", c.w, c.h,
            blocks.size(), tiles);
    for (const auto& b : blocks) REQUIRE(b.num_tokens() == 256, "block of {} tokens", b.num_tokens());
    REQUIRE(total(blocks) == 256 * tiles, "{}x{}: token sum mismatch", c.w, c.h);
    if (c.w == 448 && c.h == 448 && !c.msac) REQUIRE(total(blocks) == 256, "single tile floor");
    (c.msac ? max_msac : max_dynamic) = std::max(c.msac ? max_msac : max_dynamic, total(blocks));
  }
  // Largest dynamic plan is six tiles plus the thumbnail. A nominal 1590
  // ceiling is not a multiple of the per-tile budget.
  REQUIRE(max_dynamic == 1792, "dynamic ceiling {}", max_dynamic);
  REQUIRE(1590 % 256 != 0, "1590 is a tile multiple");
  TilingConfig no_thumb;
  no_thumb.use_thumbnail = false;
  REQUIRE(plan_dynamic(2688, 448, no_thumb).tile_count() * 256 == 1536, "thumbnail-free ceiling");
  return {true, fmt::format("256 tokens per tile; floor 256; dynamic ceiling 1792 (1536 without "
                            "thumbnail) vs nominal 1590; largest MSAC case {}",
                            max_msac)};
}

Verdict shuffle_bijection() {
  std::mt19937_64 rng(404);
  std::normal_distribution<float> n(0.0f, 1.0f);
  for (int trial = 0; trial < 1000; ++trial) {
    const int factor = 1 + static_cast<int>(rng() % 4);
    const int gh = factor * (1 + static_cast<int>(rng() % 8));
    const int gw = factor * (1 + static_cast<int>(rng() % 8));
    const int dim = 1 + static_cast<int>(rng() % 9);
    PatchTokens<float> in{gh, gw, RowMatrix<float>(gh * gw, dim)};
    for (Eigen::Index i = 0; i < in.data.size(); ++i) in.data.data()[i] = n(rng);
    const auto back = pixel_unshuffle(pixel_shuffle(in, factor), factor);
    REQUIRE(back.grid_h == gh && back.grid_w == gw && back.data == in.data,
            "config {}x{}x{} factor {} not restored", gh, gw, dim, factor);
  }
  PatchTokens<float> big{32, 32, RowMatrix<float>::Zero(1024, 64)};
  const auto s = pixel_shuffle(big, 2);
  REQUIRE(s.grid_h == 16 && s.grid_w == 16 && s.data.rows() == 256 && s.dim() == 256,
          "32x32x64 -> {}x{}x{}", s.grid_h, s.grid_w, s.dim());
  return {true, "1000 random configs restored bitwise; 32x32xD -> 16x16x4D"};
}

Verdict projector_jvp() {
  ModelConfig cfg;
  cfg.tile_size = 28;
  cfg.patch_size = 7;
  cfg.vit_dim = 8;
  cfg.vit_heads = 2;
  cfg.llm_dim = 24;
  cfg.seed = 5;
  const VisionModel<double> model(cfg);
  std::mt19937_64 rng(55);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    PatchTokens<double> x{2, 2, RowMatrix<double>(4, cfg.projector_in_dim())};
    RowMatrix<double> dir(4, cfg.projector_in_dim());
    for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = 40.0 * n(rng);
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir.data()[i] = n(rng);
    const double h = 1e-3;
    PatchTokens<double> plus = x, minus = x;
    plus.data += h * dir;
    minus.data -= h * dir;
    const RowMatrix<double> numeric = (model.project(plus).data - model.project(minus).data) / (2 * h);
    const RowMatrix<double> analytic = model.project_jvp(x, dir);
    const double rel = (numeric - analytic).norm() / analytic.norm();
    worst = std::max(worst, rel);
    REQUIRE(rel < 1e-4, "probe {} relative error {:.3e}", probe, rel);
  }
  return {true, fmt::format("100 probes, worst relative error {:.2e}", worst)};
}

Verdict ted_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  for (int i = 0; i < 1000; ++i) {
    const JsonTree a = testing_support::random_tree(rng, 8);
    const JsonTree b = testing_support::random_tree(rng, 8);
    const auto fast = tree_edit_distance(a, b);
    const auto slow = oracle::brute_force_ted(a, b);
    REQUIRE(fast == slow, "pair {}: {} vs exhaustive {}", i, fast, slow);
  }
  for (int i = 0; i < 1000; ++i) {
    const JsonTree a = testing_support::random_tree(rng, 8, "ab");
    const JsonTree b = testing_support::random_tree(rng, 8, "ab");
    const JsonTree c = testing_support::random_tree(rng, 8, "ab");
    const auto ab = tree_edit_distance(a, b);
    REQUIRE(tree_edit_distance(a, a) == 0, "identity");
    REQUIRE((ab == 0) == (a == b), "indiscernibles");
    REQUIRE(ab == tree_edit_distance(b, a), "symmetry");
    REQUIRE(tree_edit_distance(a, c) <= ab + tree_edit_distance(b, c), "triangle inequality");
  }
  const double secs = seconds_since(t0);
  REQUIRE(secs < 60.0, "took {:.1f}s", secs);
  return {true, fmt::format("1000 pairs match exhaustive search; axioms on 1000 triples; {:.2f}s", secs)};
}

Verdict table_aggregation() {
  const nlohmann::json gt = {{"field", "value"}, {"amount", "1.00"}};
  std::vector<ScoredSample> samples;
  auto add = [&](DocType type, int n, int perfect) {
    for (int i = 0; i < n; ++i) {
      const std::string reply = i < perfect ? gt.dump() : "unreadable";
      samples.push_back({type, score_prediction(reply, gt), false});
    }
  };
  add(DocType::Receipt, 50, 41);
  add(DocType::DriversLicense, 500, 282);
  add(DocType::Check, 200, 83);
  const EvalReport r = aggregate(samples);
  REQUIRE(r.per_type.size() == 3, "{} types", r.per_type.size());
  const double want[] = {82.0, 56.4, 41.5};
  for (int i = 0; i < 3; ++i) {
    REQUIRE(std::abs(r.per_type[i].accuracy - want[i]) < 1e-9, "type {} accuracy {}", i,
            r.per_type[i].accuracy);
  }
  const std::string printed = fmt::format("{:.2f}", r.overall);
  REQUIRE(printed == "59.97", "overall {}", printed);
  return {true, fmt::format("per-type 82.0 / 56.4 / 41.5 -> overall {}", printed)};
}

Verdict mixture_conservation() {
  const std::vector<std::pair<std::string, std::int64_t>> tables{
      {"2b_pretrain", 5251201},        {"2b_finetune", 11947390},
      {"08b_pretrain_step1", 353755},  {"08b_pretrain_step2", 11445394},
      {"08b_finetune", 7886660}};
  std::vector<std::vector<std::int64_t>> all_counts;
  for (const auto& [name, total] : tables) {
    const MixtureTable t = load_mixture(kRepoData / "mixtures" / (name + ".csv"));
    REQUIRE(t.total() == total, "{} total {}", name, t.total());
    const Manifest m = compose_mixture(t, 1.0, 7);
    REQUIRE(static_cast<std::int64_t>(m.entries.size()) == total, "{} manifest size {}", name,
            m.entries.size());
    std::vector<std::int64_t> seen(t.rows.size(), 0);
    for (const auto& e : m.entries) ++seen[e.row];
    std::vector<std::int64_t> counts;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      counts.push_back(t.rows[i].count);
      REQUIRE(seen[i] == t.rows[i].count, "{} row {}: {} vs {}", name, i, seen[i], t.rows[i].count);
    }
    all_counts.push_back(counts);
  }
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double scale = std::max(1e-8, u(rng));
    for (const auto& counts : all_counts) {
      const auto got = apportion(counts, scale);
      std::int64_t sum = 0, total = 0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        sum += got[k];
        total += counts[k];
      }
      REQUIRE(sum == std::llround(static_cast<double>(total) * scale), "scale {} sum {}", scale, sum);
      REQUIRE(got == oracle::largest_remainder(counts, scale), "scale {} differs from reference", scale);
    }
  }
  return {true, "all bundled rows and totals reproduced at scale 1; 1000 scales conserve totals"};
}

Verdict schedule_validation() {
  int mutations = 0;
  for (const char* name : {"2b_pretrain", "2b_finetune", "08b_pretrain_step1",
                           "08b_pretrain_step2", "08b_finetune"}) {
    const StageSchedule s = load_schedule(kRepoData / "schedules" / (std::string(name) + ".cfg"));
    REQUIRE(s.kind.has_value(), "{} has no stage kind", name);
    const auto report = validate_schedule(s, *s.kind);
    REQUIRE(report.ok(), "{} invalid: {}", name, report.to_json()["violations"].dump());
    for (int flag = 0; flag < 3; ++flag) {
      StageSchedule m = s;
      bool& f = flag == 0 ? m.freeze_vit : flag == 1 ? m.freeze_llm : m.freeze_mlp;
      f = !f;
      const auto n = validate_schedule(m, *m.kind).violations.size();
      REQUIRE(n == 1, "{} flag {} flip gave {} violations", name, flag, n);
      ++mutations;
    }
  }
  return {true, fmt::format("5 stages valid; {} single-flag mutations each report one violation", mutations)};
}

struct RunFiles {
  std::vector<std::pair<std::string, std::string>> files;  // relative name, bytes
};

RunFiles pipeline_run(const std::filesystem::path& dir, std::string& error) {
  RunFiles out;
  std::ostringstream sink, err;
  const std::string image = (kRepoData / "fixtures" / "receipt.png").string();
  auto call = [&](std::vector<std::string> args) {
    const int code = cli::run(args, sink, err);
    if (code != 0) error += fmt::format("{} exited {}: {}", args[0], code, err.str());
  };
  call({"preprocess", "--image", image, "--msac", "--out-dir", (dir / "tiles").string()});
  call({"forward", "--image", image, "--jobs", "2", "--out", (dir / "forward.json").string()});
  call({"eval", "--set", (kRepoData / "fixtures" / "eval_set.jsonl").string(), "--client",
        "replay", "--fixtures", (kRepoData / "fixtures" / "replay").string(), "--results",
        (dir / "results.jsonl").string(), "--report", (dir / "report.json").string()});
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out.files.emplace_back(std::filesystem::relative(entry.path(), dir).string(),
                           read_file(entry.path()));
  }
  std::sort(out.files.begin(), out.files.end());
  return out;
}

Verdict determinism() {
  const auto root = std::filesystem::temp_directory_path() /
                    ("docvl_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  std::string error;
  const RunFiles a = pipeline_run(root / "a", error);
  const RunFiles b = pipeline_run(root / "b", error);
  std::filesystem::remove_all(root);
  REQUIRE(error.empty(), "{}", error);
  REQUIRE(a.files.size() == b.files.size(), "{} vs {} artifacts", a.files.size(), b.files.size());
  REQUIRE(a.files.size() >= 4, "only {} artifacts", a.files.size());
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    REQUIRE(a.files[i] == b.files[i], "artifact {} differs", a.files[i].first);
    bytes += a.files[i].second.size();
  }
  return {true, fmt::format("{} artifacts ({} bytes) byte-identical across two runs",
                            a.files.size(), bytes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"tiling bounds and grid oracle", tiling_bounds},
      {"multi-scale crop bounds", msac_bounds},
      {"visual token arithmetic", token_arithmetic},
      {"pixel shuffle bijection", shuffle_bijection},
      {"projector JVP vs finite differences", projector_jvp},
      {"tree edit distance vs exhaustive search", ted_oracle},
      {"document accuracy aggregation", table_aggregation},
      {"mixture conservation", mixture_conservation},
      {"stage schedule validation", schedule_validation},
      {"end-to-end determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << fmt::format("AC{:<2} {} {}: {}", i + 1, v.pass ? "PASS" : "FAIL",
                             criteria[i].first, v.detail)
              << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
