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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docvl/errors.hpp"
#include "docvl/json_tree.hpp"
#include "json.hpp"

namespace docvl {

enum class DocType { Receipt, DriversLicense, Check, Other };

std::string_view to_string(DocType type);
DocType parse_doc_type(std::string_view name);

/// Document extraction scores for one sample. An unparsed prediction scores
/// zero everywhere; a perfect match scores one everywhere.
struct ScoreBreakdown {
  int perfect_match = 0;
  double effective_ted = 0.0;
  double kv_f1 = 0.0;
  bool parsed = false;

  bool operator==(const ScoreBreakdown&) const = default;
};

/// 1 - TED / max(|pred|, |gt|), floored at zero; zero when unparsed.
double effective_ted_score(const ParseResult& pred, const nlohmann::json& gt);

/// F1 over exact (path, value) leaf matches; zero when unparsed.
double kv_f1(const ParseResult& pred, const nlohmann::json& gt);

int perfect_match(const ParseResult& pred, const nlohmann::json& gt);

ScoreBreakdown score_prediction(std::string_view raw_prediction, const nlohmann::json& gt);

struct ExtractionSample {
  std::string id;
  DocType doc_type = DocType::Other;
  std::string prompt;
  std::vector<std::string> images;
  nlohmann::json ground_truth;
  std::string raw_prediction;
};

ScoreBreakdown score_sample(const ExtractionSample& sample);

struct ScoredSample {
  DocType doc_type = DocType::Other;
  ScoreBreakdown scores;
  bool errored = false;
};

struct DocTypeSummary {
  DocType doc_type = DocType::Other;
  int samples = 0;
  int errored = 0;
  double parse_rate = 0.0;
  double perfect_match = 0.0;
  double effective_ted = 0.0;
  double kv_f1 = 0.0;
  /// Mean of the three metric means, on a 0-100 scale.
  double accuracy = 0.0;
};

struct EvalReport {
  std::vector<DocTypeSummary> per_type;  // DocType order, present types only
  double overall = 0.0;                  // unweighted mean of per-type accuracies
  int samples = 0;
  int errored = 0;

  nlohmann::json to_json() const;
};

/// Unweighted mean of per-document-type accuracies.
double overall_accuracy(std::span<const double> accuracies);

/// Independent of sample order: per-type values are summed in sorted order.
EvalReport aggregate(std::span<const ScoredSample> samples);

/// Lowercase, punctuation removed, whitespace runs collapsed to one space.
std::string normalize_ocr_text(std::string_view text);

/// 1 when the normalized ground truth occurs in the normalized prediction.
int ocr_text_score(std::string_view prediction, std::string_view ground_truth);

enum class OcrTask { TextRecognition, SceneTextVqa, DocVqa, Kie, Hmer };

std::string_view to_string(OcrTask task);
OcrTask parse_ocr_task(std::string_view name);

/// Text tasks use ocr_text_score. Expression recognition compares with all
/// whitespace removed and case and symbols preserved.
int ocr_task_score(OcrTask task, std::string_view prediction, std::string_view ground_truth);

/// Rounds to `digits` decimals so serialized reports are stable.
double round_to(double value, int digits);

}  // namespace docvl
