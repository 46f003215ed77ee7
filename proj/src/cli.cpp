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
#include "docvl/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "docvl/eval_runner.hpp"
#include "docvl/image.hpp"
#include "docvl/mixture.hpp"
#include "docvl/schedule.hpp"
#include "docvl/sequence.hpp"
#include "docvl/text_util.hpp"
#include "docvl/tiling.hpp"
#include "docvl/vision.hpp"

namespace docvl::cli {

namespace {

using nlohmann::json;

struct PlanFlags {
  int width = 0;
  int height = 0;
  std::string image;
  int min_tiles = 1;
  int max_tiles = 6;
  int tile_size = kDefaultTileSize;
  bool thumbnail = true;
  bool msac = false;
};

struct ModelFlags {
  int patch_size = 14;
  int vit_dim = 64;
  int vit_layers = 2;
  int vit_heads = 4;
  int llm_dim = 128;
  int shuffle_factor = 2;
  std::uint64_t seed = 0;
};

struct Flags {
  PlanFlags plan;
  ModelFlags model;
  std::string out;
  std::string out_dir;
  std::string prompt = "Describe the image.";
  int jobs = 1;

  std::string table;
  double scale = 1.0;
  std::uint64_t seed = 0;
  bool stats = false;

  std::string schedule_file;
  std::string kind;

  std::string eval_set;
  std::string client = "replay";
  std::string fixtures;
  std::string endpoint;
  std::string model_name = "default";
  int timeout_s = 120;
  std::string results;
  std::string report;
};

void add_plan_options(CLI::App* cmd, PlanFlags& p, bool need_image) {
  if (need_image) {
    cmd->add_option("--image", p.image, "Input PNG or JPEG")->required();
  } else {
    cmd->add_option("--width", p.width, "Image width in pixels");
    cmd->add_option("--height", p.height, "Image height in pixels");
    cmd->add_option("--image", p.image, "Read dimensions from this image instead");
  }
  cmd->add_option("--min-tiles", p.min_tiles, "Smallest tile count of the dynamic grid")
      ->capture_default_str();
  cmd->add_option("--max-tiles", p.max_tiles, "Largest tile count of the dynamic grid")
      ->capture_default_str();
  cmd->add_option("--tile-size", p.tile_size, "Tile edge in pixels")->capture_default_str();
  cmd->add_flag("--thumbnail,!--no-thumbnail", p.thumbnail,
                "Append a whole-image view to multi-tile plans")
      ->capture_default_str();
  cmd->add_flag("--msac", p.msac, "Add the secondary multi-scale grid");
}

void add_model_options(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--patch-size", m.patch_size, "ViT patch edge")->capture_default_str();
  cmd->add_option("--vit-dim", m.vit_dim, "ViT width")->capture_default_str();
  cmd->add_option("--vit-layers", m.vit_layers, "ViT depth")->capture_default_str();
  cmd->add_option("--vit-heads", m.vit_heads, "Attention heads")->capture_default_str();
  cmd->add_option("--llm-dim", m.llm_dim, "Projector output width")->capture_default_str();
  cmd->add_option("--shuffle-factor", m.shuffle_factor, "Pixel-shuffle downscale per axis")
      ->capture_default_str();
  cmd->add_option("--seed", m.seed, "Weight seed")->capture_default_str();
}

TilingConfig tiling_config(const PlanFlags& p) {
  TilingConfig c;
  c.min_tiles = p.min_tiles;
  c.max_tiles = p.max_tiles;
  c.tile_size = p.tile_size;
  c.use_thumbnail = p.thumbnail;
  return c;
}

ModelConfig model_config(const ModelFlags& m, int tile_size) {
  ModelConfig c;
  c.tile_size = tile_size;
  c.patch_size = m.patch_size;
  c.vit_dim = m.vit_dim;
  c.vit_layers = m.vit_layers;
  c.vit_heads = m.vit_heads;
  c.llm_dim = m.llm_dim;
  c.shuffle_factor = m.shuffle_factor;
  c.seed = m.seed;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string sci(double v) { return fmt::format("{:.6e}", v); }

int cmd_plan(const Flags& f, std::ostream& out) {
  int w = f.plan.width;
  int h = f.plan.height;
  if (!f.plan.image.empty()) {
    const ImageBuffer img = load_image(f.plan.image);
    w = img.width;
    h = img.height;
  }
  if (w <= 0 || h <= 0) throw ArgumentError("plan needs --width and --height, or --image");
  const TilingConfig config = tiling_config(f.plan);
  const int tokens = model_config(f.model, config.tile_size).tokens_per_tile();
  json j = f.plan.msac ? plan_to_json(plan_msac(w, h, config), tokens)
                       : plan_to_json(plan_dynamic(w, h, config), tokens);
  j["source"] = {{"width", w}, {"height", h}};
  emit(f.out, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_preprocess(const Flags& f, std::ostream& out) {
  const ImageBuffer img = load_image(f.plan.image);
  const TilingConfig config = tiling_config(f.plan);
  const int tokens = model_config(f.model, config.tile_size).tokens_per_tile();
  json sidecar;
  std::vector<ImageBuffer> tiles;
  if (f.plan.msac) {
    const MsacPlan plan = plan_msac(img.width, img.height, config);
    sidecar = plan_to_json(plan, tokens);
    tiles = extract_tiles(img, plan);
  } else {
    const TilingPlan plan = plan_dynamic(img.width, img.height, config);
    sidecar = plan_to_json(plan, tokens);
    tiles = extract_tiles(img, plan);
  }
  const std::filesystem::path dir = f.out_dir;
  std::filesystem::create_directories(dir);
  json names = json::array();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const std::string name = fmt::format("tile_{:02d}.png", i);
    auto tmp = dir / (name + ".tmp");
    save_png(tiles[i], tmp);
    std::filesystem::rename(tmp, dir / name);
    names.push_back(name);
  }
  sidecar["source"] = {{"width", img.width}, {"height", img.height}};
  sidecar["tiles"] = names;
  write_file_atomic(dir / "plan.json", sidecar.dump(2) + "\n");
  out << (dir / "plan.json").string() << "\n";
  return kExitOk;
}

json stage_json(const StageTrace& s) {
  json j = {{"stage", s.stage}, {"rows", s.rows}, {"cols", s.cols},
            {"sum", sci(s.sum)}, {"abs_sum", sci(s.abs_sum)}};
  if (s.grid_h > 0) j["grid"] = {s.grid_h, s.grid_w};
  return j;
}

int cmd_forward(const Flags& f, std::ostream& out) {
  const ImageBuffer img = load_image(f.plan.image);
  const TilingConfig tiling = tiling_config(f.plan);
  const ModelConfig config = model_config(f.model, tiling.tile_size);
  const VisionModel<float> model(config);

  std::vector<std::vector<StageTrace>> traces;
  std::vector<VisualTokens<float>> blocks;
  json plan_json;
  if (f.plan.msac) {
    const MsacPlan plan = plan_msac(img.width, img.height, tiling);
    plan_json = plan_to_json(plan, config.tokens_per_tile());
    blocks = model.encode_image(img, plan, f.jobs, &traces);
  } else {
    const TilingPlan plan = plan_dynamic(img.width, img.height, tiling);
    plan_json = plan_to_json(plan, config.tokens_per_tile());
    blocks = model.encode_image(img, plan, f.jobs, &traces);
  }
  const TokenSequence seq = assemble_sequence(blocks, f.prompt, ChatTemplate::standard());

  json tiles = json::array();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    json stages = json::array();
    for (const auto& s : traces[i]) stages.push_back(stage_json(s));
    tiles.push_back({{"index", i}, {"visual_tokens", blocks[i].num_tokens()}, {"stages", stages}});
  }
  json j = {{"schema_version", 1},
            {"model",
             {{"tile_size", config.tile_size},
              {"patch_size", config.patch_size},
              {"vit_dim", config.vit_dim},
              {"vit_layers", config.vit_layers},
              {"vit_heads", config.vit_heads},
              {"llm_dim", config.llm_dim},
              {"shuffle_factor", config.shuffle_factor},
              {"seed", config.seed}}},
            {"plan", plan_json},
            {"tiles", tiles},
            {"total_visual_tokens", seq.total_visual_tokens},
            {"sequence", seq.to_json()}};
  emit(f.out, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_mixture(const Flags& f, std::ostream& out) {
  const MixtureTable table = load_mixture(f.table);
  if (f.stats) {
    emit(f.out, stats_to_json(table).dump(2) + "\n", out);
    return kExitOk;
  }
  const Manifest manifest = compose_mixture(table, f.scale, f.seed);
  if (f.out.empty()) {
    manifest.write_jsonl(out);
    return kExitOk;
  }
  const std::filesystem::path path = f.out;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + tmp.string());
    manifest.write_jsonl(file);
    if (!file) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
  return kExitOk;
}

int cmd_schedule(const Flags& f, std::ostream& out) {
  const StageSchedule schedule = load_schedule(f.schedule_file);
  StageKind kind;
  if (!f.kind.empty()) {
    kind = parse_stage_kind(f.kind);
  } else if (schedule.kind) {
    kind = *schedule.kind;
  } else {
    throw ArgumentError("schedule has no stage_kind; pass --kind");
  }
  const ScheduleReport report = validate_schedule(schedule, kind);
  emit(f.out, report.to_json().dump(2) + "\n", out);
  return report.ok() ? kExitOk : kExitValidation;
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto samples = load_eval_set(f.eval_set);
  std::unique_ptr<InferenceClient> client;
  if (f.client == "replay") {
    if (f.fixtures.empty()) throw ArgumentError("--client replay needs --fixtures");
    client = std::make_unique<ReplayClient>(f.fixtures);
  } else {
    HttpClientConfig config = HttpClientConfig::from_env();
    if (!f.endpoint.empty()) config.endpoint = f.endpoint;
    config.model = f.model_name;
    config.read_timeout_s = f.timeout_s;
    client = std::make_unique<HttpClient>(config);
  }
  EvalOptions options;
  options.concurrency = f.jobs;
  options.results_path = f.results;
  options.image_root = std::filesystem::path(f.eval_set).parent_path();
  options.log = [&err](const std::string& line) { err << "docvl: " << line << "\n"; };
  const EvalRun run = run_eval(samples, *client, options);
  const std::string text = run.report.to_json().dump(2) + "\n";
  if (!f.report.empty()) write_file_atomic(f.report, text);
  out << text;
  return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out) {
  const auto results = load_results(f.results);
  emit(f.out, report_from_results(results).to_json().dump(2) + "\n", out);
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Config entries become `--key=value` tokens placed before the user's own
// flags; with last-wins option policy the explicit flags take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;
  std::vector<std::string> expanded{rest.front()};
  for (const auto& [key, value] : parse_key_values(read_file(config_path))) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    expanded.push_back("--" + flag + "=" + value);
  }
  expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
  return expanded;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"docvl: tiling, desk-scale vision encoding, training mixtures and document "
               "extraction scoring"};
  app.name("docvl");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_unused;
  app.add_option("--config", config_unused,
                 "key=value file; entries act as flags of the chosen command, explicit flags win");

  auto* plan = app.add_subcommand("plan", "Print the tiling plan for an image size");
  add_plan_options(plan, f.plan, false);
  add_model_options(plan, f.model);
  plan->add_option("--out", f.out, "Write JSON here instead of stdout");

  auto* pre = app.add_subcommand("preprocess", "Write tile PNGs and a plan.json sidecar");
  add_plan_options(pre, f.plan, true);
  add_model_options(pre, f.model);
  pre->add_option("--out-dir", f.out_dir, "Output directory")->required();

  auto* fwd = app.add_subcommand("forward", "Encode an image and emit a shape trace");
  add_plan_options(fwd, f.plan, true);
  add_model_options(fwd, f.model);
  fwd->add_option("--prompt", f.prompt, "User text placed after the image blocks")
      ->capture_default_str();
  fwd->add_option("--jobs", f.jobs, "Tiles encoded in parallel")->capture_default_str();
  fwd->add_option("--out", f.out, "Write JSON here instead of stdout");

  auto* mix = app.add_subcommand("mixture", "Compose a shuffled training manifest");
  mix->add_option("--table", f.table, "Mixture CSV (task,input_type,count)")->required();
  mix->add_option("--scale", f.scale, "Fraction of each row to keep, in (0, 1]")
      ->capture_default_str();
  mix->add_option("--seed", f.seed, "Shuffle seed")->capture_default_str();
  mix->add_flag("--stats", f.stats, "Print per-task shares instead of the manifest");
  mix->add_option("--out", f.out, "Write JSON-lines here instead of stdout");

  auto* sched = app.add_subcommand("schedule", "Validate a training stage schedule");
  sched->add_option("--file", f.schedule_file, "Stage schedule (key = value)")->required();
  sched->add_option("--kind", f.kind,
                    "projector_alignment | vision_pretrain | language_pretrain | finetune");
  sched->add_option("--out", f.out, "Write the report here instead of stdout");

  auto* ev = app.add_subcommand("eval", "Query a client over an eval set and score it");
  ev->add_option("--set", f.eval_set, "Eval set JSON-lines")->required();
  ev->add_option("--client", f.client, "replay | http")
      ->check(CLI::IsMember({"replay", "http"}))
      ->capture_default_str();
  ev->add_option("--fixtures", f.fixtures, "Replay directory of <id>.txt responses");
  ev->add_option("--endpoint", f.endpoint, "HTTP endpoint (default $DOCVL_ENDPOINT)");
  ev->add_option("--model", f.model_name, "Model name sent to the endpoint")
      ->capture_default_str();
  ev->add_option("--timeout", f.timeout_s, "HTTP read timeout in seconds")->capture_default_str();
  ev->add_option("--jobs", f.jobs, "Requests in flight")->capture_default_str();
  ev->add_option("--results", f.results, "Per-sample JSON-lines output (resumable)")->required();
  ev->add_option("--report", f.report, "Also write the report JSON here");

  auto* rep = app.add_subcommand("report", "Aggregate a per-sample results file");
  rep->add_option("--results", f.results, "Per-sample JSON-lines")->required();
  rep->add_option("--out", f.out, "Write the report here instead of stdout");

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> argv_storage{"docvl"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "docvl: error: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "docvl: error: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (plan->parsed()) return cmd_plan(f, out);
    if (pre->parsed()) return cmd_preprocess(f, out);
    if (fwd->parsed()) return cmd_forward(f, out);
    if (mix->parsed()) return cmd_mixture(f, out);
    if (sched->parsed()) return cmd_schedule(f, out);
    if (ev->parsed()) return cmd_eval(f, out, err);
    if (rep->parsed()) return cmd_report(f, out);
  } catch (const ArgumentError& e) {
    err << "docvl: error: argument: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "docvl: error: validation: " << one_line(e.what()) << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "docvl: error: parse: " << one_line(e.what()) << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "docvl: error: runtime: " << one_line(e.what()) << "\n";
    return kExitValidation;
  }
  err << "docvl: error: usage: no command\n";
  return kExitUsage;
}

}  // namespace docvl::cli
