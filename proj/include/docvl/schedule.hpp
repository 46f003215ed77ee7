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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docvl/errors.hpp"
#include "json.hpp"

namespace docvl {

/// Which components a training stage updates.
///   projector_alignment: only the MLP projector trains.
///   vision_pretrain:     vision encoder + projector, language model frozen.
///   language_pretrain:   projector + language model, vision encoder frozen.
///   finetune:            everything trains.
enum class StageKind { ProjectorAlignment, VisionPretrain, LanguagePretrain, Finetune };

std::string_view to_string(StageKind kind);
StageKind parse_stage_kind(std::string_view name);

struct FreezePattern {
  bool vit = false;
  bool llm = false;
  bool mlp = false;
};

FreezePattern expected_freeze(StageKind kind);

struct SubStage {
  double learning_rate = 0.0;
  int epochs = 0;
};

struct StageSchedule {
  std::string stage;
  std::optional<StageKind> kind;
  bool freeze_vit = false;
  bool freeze_llm = false;
  bool freeze_mlp = false;
  int image_size = 0;
  int max_num_tiles = 0;
  /// One value, or a `a -> b` sequence of annealed sub-stages.
  std::vector<double> learning_rates;
  std::string scheduler;
  int batch_size = 0;
  double weight_decay = 0.0;
  std::vector<int> epochs;
  std::string hardware;
  double hours_of_training = 0.0;

  /// Pairs learning rates with epochs; a single value broadcasts.
  std::vector<SubStage> sub_stages() const;
};

/// Flat `key = value` file mirroring the hyperparameter table rows.
StageSchedule parse_schedule(std::string_view text);
StageSchedule load_schedule(const std::filesystem::path& path);

struct ScheduleReport {
  std::string stage;
  StageKind kind = StageKind::Finetune;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

/// Every rule is checked independently; a single wrong field yields exactly
/// one violation.
ScheduleReport validate_schedule(const StageSchedule& schedule, StageKind kind);

}  // namespace docvl
