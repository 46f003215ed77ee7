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
#include "docvl/schedule.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <set>
#include <utility>

#include "docvl/text_util.hpp"

namespace docvl {

namespace {

constexpr int kImageSize = 448;
constexpr int kMaxTiles = 6;

constexpr std::array<std::pair<StageKind, std::string_view>, 4> kKindNames{{
    {StageKind::ProjectorAlignment, "projector_alignment"},
    {StageKind::VisionPretrain, "vision_pretrain"},
    {StageKind::LanguagePretrain, "language_pretrain"},
    {StageKind::Finetune, "finetune"},
}};

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ParseError(fmt::format("schedule: {} expects true/false, got '{}'", key, v));
}

template <typename T>
T parse_number(const std::string& key, std::string_view v) {
  v = trim(v);
  T value{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, value);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ParseError(fmt::format("schedule: {} expects a number, got '{}'", key, v));
  }
  return value;
}

/// "4e-5 -> 2e-5" or a single value.
template <typename T>
std::vector<T> parse_sequence(const std::string& key, std::string_view v) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const auto arrow = v.find("->", start);
    out.push_back(parse_number<T>(key, v.substr(start, arrow - start)));
    if (arrow == std::string_view::npos) return out;
    start = arrow + 2;
  }
}

}  // namespace

std::string_view to_string(StageKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

StageKind parse_stage_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ParseError(fmt::format("unknown stage kind '{}'", name));
}

FreezePattern expected_freeze(StageKind kind) {
  switch (kind) {
    case StageKind::ProjectorAlignment:
      return {true, true, false};
    case StageKind::VisionPretrain:
      return {false, true, false};
    case StageKind::LanguagePretrain:
      return {true, false, false};
    case StageKind::Finetune:
      return {false, false, false};
  }
  return {};
}

std::vector<SubStage> StageSchedule::sub_stages() const {
  const std::size_t n = std::max(learning_rates.size(), epochs.size());
  std::vector<SubStage> out;
  if (learning_rates.empty() || epochs.empty()) return out;
  auto pick = [](const auto& values, std::size_t i) { return values[std::min(i, values.size() - 1)]; };
  for (std::size_t i = 0; i < n; ++i) out.push_back({pick(learning_rates, i), pick(epochs, i)});
  return out;
}

StageSchedule parse_schedule(std::string_view text) {
  const auto kv = parse_key_values(text);
  static const std::set<std::string> kRequired = {
      "stage",         "freeze_vit",    "freeze_llm", "freeze_mlp",
      "image_size",    "max_num_tiles", "learning_rate", "scheduler",
      "batch_size",    "weight_decay",  "epochs"};
  static const std::set<std::string> kOptional = {"stage_kind", "hardware", "hours_of_training"};
  for (const auto& key : kRequired) {
    if (!kv.count(key)) throw ParseError("schedule: missing key '" + key + "'");
  }
  for (const auto& [key, _] : kv) {
    if (!kRequired.count(key) && !kOptional.count(key)) {
      throw ParseError("schedule: unknown key '" + key + "'");
    }
  }

  StageSchedule s;
  s.stage = kv.at("stage");
  if (auto it = kv.find("stage_kind"); it != kv.end()) s.kind = parse_stage_kind(it->second);
  s.freeze_vit = parse_bool("freeze_vit", kv.at("freeze_vit"));
  s.freeze_llm = parse_bool("freeze_llm", kv.at("freeze_llm"));
  s.freeze_mlp = parse_bool("freeze_mlp", kv.at("freeze_mlp"));
  s.image_size = parse_number<int>("image_size", kv.at("image_size"));
  s.max_num_tiles = parse_number<int>("max_num_tiles", kv.at("max_num_tiles"));
  s.learning_rates = parse_sequence<double>("learning_rate", kv.at("learning_rate"));
  s.scheduler = kv.at("scheduler");
  s.batch_size = parse_number<int>("batch_size", kv.at("batch_size"));
  s.weight_decay = parse_number<double>("weight_decay", kv.at("weight_decay"));
  s.epochs = parse_sequence<int>("epochs", kv.at("epochs"));
  if (auto it = kv.find("hardware"); it != kv.end()) s.hardware = it->second;
  if (auto it = kv.find("hours_of_training"); it != kv.end()) {
    s.hours_of_training = parse_number<double>("hours_of_training", it->second);
  }
  return s;
}

StageSchedule load_schedule(const std::filesystem::path& path) {
  return parse_schedule(read_file(path));
}

ScheduleReport validate_schedule(const StageSchedule& s, StageKind kind) {
  ScheduleReport report;
  report.stage = s.stage;
  report.kind = kind;
  auto& v = report.violations;
  const FreezePattern want = expected_freeze(kind);
  const std::string kind_name(to_string(kind));

  if (s.freeze_vit != want.vit) {
    v.push_back(fmt::format("freeze_vit must be {} for a {} stage", want.vit, kind_name));
  }
  if (s.freeze_llm != want.llm) {
    v.push_back(fmt::format("freeze_llm must be {} for a {} stage", want.llm, kind_name));
  }
  if (s.freeze_mlp) v.push_back("MLP projector is never frozen in any training stage");
  if (s.image_size != kImageSize) {
    v.push_back(fmt::format("image_size must be {}, got {}", kImageSize, s.image_size));
  }
  if (s.max_num_tiles != kMaxTiles) {
    v.push_back(fmt::format("max_num_tiles must be {}, got {}", kMaxTiles, s.max_num_tiles));
  }
  if (s.scheduler != "cosine") v.push_back("scheduler must be cosine, got " + s.scheduler);
  if (s.batch_size <= 0) v.push_back("batch_size must be positive");
  if (s.weight_decay < 0.0) v.push_back("weight_decay must be non-negative");

  bool lr_ok = !s.learning_rates.empty();
  for (std::size_t i = 0; i < s.learning_rates.size(); ++i) {
    if (!(s.learning_rates[i] > 0.0)) lr_ok = false;
    if (i > 0 && s.learning_rates[i] > s.learning_rates[i - 1]) lr_ok = false;
  }
  if (!lr_ok) v.push_back("learning_rate values must be positive and non-increasing");

  bool epochs_ok = !s.epochs.empty();
  for (int e : s.epochs) epochs_ok = epochs_ok && e >= 1;
  if (!epochs_ok) v.push_back("epochs must be >= 1");

  const auto nl = s.learning_rates.size();
  const auto ne = s.epochs.size();
  if (nl > 1 && ne > 1 && nl != ne) {
    v.push_back("learning_rate and epochs sub-stage counts differ");
  }
  return report;
}

nlohmann::json ScheduleReport::to_json() const {
  return {{"schema_version", 1},
          {"stage", stage},
          {"stage_kind", to_string(kind)},
          {"valid", ok()},
          {"violations", violations}};
}

}  // namespace docvl
