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
#include "docvl/scoring.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <utility>

#include "docvl/tree_edit.hpp"

namespace docvl {

namespace {

constexpr std::array<std::pair<DocType, std::string_view>, 4> kDocTypeNames{{
    {DocType::Receipt, "receipt"},
    {DocType::DriversLicense, "drivers_license"},
    {DocType::Check, "check"},
    {DocType::Other, "other"},
}};

constexpr std::array<std::pair<OcrTask, std::string_view>, 5> kOcrTaskNames{{
    {OcrTask::TextRecognition, "text_recognition"},
    {OcrTask::SceneTextVqa, "scene_text_vqa"},
    {OcrTask::DocVqa, "doc_vqa"},
    {OcrTask::Kie, "kie"},
    {OcrTask::Hmer, "hmer"},
}};

void require_ground_truth(const nlohmann::json& gt) {
  if (gt.is_null() || gt.is_discarded()) throw ArgumentError("empty ground truth");
}

double sorted_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

std::string_view to_string(DocType type) {
  for (const auto& [t, name] : kDocTypeNames) {
    if (t == type) return name;
  }
  return "other";
}

DocType parse_doc_type(std::string_view name) {
  for (const auto& [t, n] : kDocTypeNames) {
    if (n == name) return t;
  }
  throw ParseError("unknown doc_type '" + std::string(name) + "'");
}

std::string_view to_string(OcrTask task) {
  for (const auto& [t, name] : kOcrTaskNames) {
    if (t == task) return name;
  }
  return "unknown";
}

OcrTask parse_ocr_task(std::string_view name) {
  for (const auto& [t, n] : kOcrTaskNames) {
    if (n == name) return t;
  }
  throw ParseError("unknown OCR task '" + std::string(name) + "'");
}

double effective_ted_score(const ParseResult& pred, const nlohmann::json& gt) {
  require_ground_truth(gt);
  if (!pred) return 0.0;
  const JsonTree a = to_tree(*pred);
  const JsonTree b = to_tree(canonicalize(gt));
  const double denom = static_cast<double>(std::max(a.size(), b.size()));
  const double distance = static_cast<double>(tree_edit_distance(a, b));
  return std::max(0.0, 1.0 - distance / denom);
}

double kv_f1(const ParseResult& pred, const nlohmann::json& gt) {
  require_ground_truth(gt);
  if (!pred) return 0.0;
  const auto truth = flatten(canonicalize(gt));
  const auto guess = flatten(*pred);
  std::map<std::pair<std::string, std::string>, int> remaining;
  for (const auto& kv : truth) ++remaining[kv];
  std::size_t matched = 0;
  for (const auto& kv : guess) {
    auto it = remaining.find(kv);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  if (matched == 0) return 0.0;
  const double precision = static_cast<double>(matched) / static_cast<double>(guess.size());
  const double recall = static_cast<double>(matched) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

int perfect_match(const ParseResult& pred, const nlohmann::json& gt) {
  if (!pred || gt.is_null()) return 0;
  return to_tree(*pred) == to_tree(canonicalize(gt)) ? 1 : 0;
}

ScoreBreakdown score_prediction(std::string_view raw_prediction, const nlohmann::json& gt) {
  const ParseResult pred = parse_prediction(raw_prediction);
  ScoreBreakdown s;
  s.parsed = pred.has_value();
  if (!s.parsed) return s;
  s.perfect_match = perfect_match(pred, gt);
  if (s.perfect_match == 1) {
    s.effective_ted = 1.0;
    s.kv_f1 = 1.0;
    return s;
  }
  s.effective_ted = effective_ted_score(pred, gt);
  s.kv_f1 = kv_f1(pred, gt);
  return s;
}

ScoreBreakdown score_sample(const ExtractionSample& sample) {
  return score_prediction(sample.raw_prediction, sample.ground_truth);
}

double overall_accuracy(std::span<const double> accuracies) {
  if (accuracies.empty()) throw ArgumentError("overall_accuracy: no document types");
  return sorted_mean({accuracies.begin(), accuracies.end()});
}

EvalReport aggregate(std::span<const ScoredSample> samples) {
  if (samples.empty()) throw ArgumentError("aggregate: no samples");
  EvalReport report;
  std::vector<double> accuracies;
  for (const auto& [type, name] : kDocTypeNames) {
    std::vector<double> pm, ted, f1, parsed;
    DocTypeSummary summary;
    summary.doc_type = type;
    for (const ScoredSample& s : samples) {
      if (s.doc_type != type) continue;
      ++summary.samples;
      if (s.errored) ++summary.errored;
      pm.push_back(s.scores.perfect_match);
      ted.push_back(s.scores.effective_ted);
      f1.push_back(s.scores.kv_f1);
      parsed.push_back(s.scores.parsed ? 1.0 : 0.0);
    }
    if (summary.samples == 0) continue;
    summary.perfect_match = sorted_mean(pm);
    summary.effective_ted = sorted_mean(ted);
    summary.kv_f1 = sorted_mean(f1);
    summary.parse_rate = sorted_mean(parsed);
    summary.accuracy =
        (summary.perfect_match + summary.effective_ted + summary.kv_f1) / 3.0 * 100.0;
    accuracies.push_back(summary.accuracy);
    report.samples += summary.samples;
    report.errored += summary.errored;
    report.per_type.push_back(summary);
  }
  report.overall = overall_accuracy(accuracies);
  return report;
}

double round_to(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(value * scale) / scale;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json types = nlohmann::json::array();
  for (const auto& t : per_type) {
    types.push_back({{"doc_type", to_string(t.doc_type)},
                     {"samples", t.samples},
                     {"errored", t.errored},
                     {"parse_rate", round_to(t.parse_rate, 6)},
                     {"perfect_match", round_to(t.perfect_match, 6)},
                     {"effective_ted", round_to(t.effective_ted, 6)},
                     {"kv_f1", round_to(t.kv_f1, 6)},
                     {"accuracy", round_to(t.accuracy, 4)}});
  }
  return {{"schema_version", 1},
          {"samples", samples},
          {"errored", errored},
          {"per_type", types},
          {"overall", round_to(overall, 4)}};
}

std::string normalize_ocr_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

int ocr_text_score(std::string_view prediction, std::string_view ground_truth) {
  const std::string gt = normalize_ocr_text(ground_truth);
  const std::string pred = normalize_ocr_text(prediction);
  if (gt.empty()) return pred.empty() ? 1 : 0;
  return pred.find(gt) != std::string::npos ? 1 : 0;
}

int ocr_task_score(OcrTask task, std::string_view prediction, std::string_view ground_truth) {
  if (task != OcrTask::Hmer) return ocr_text_score(prediction, ground_truth);
  auto squeeze = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (!std::isspace(static_cast<unsigned char>(ch))) out.push_back(ch);
    }
    return out;
  };
  const std::string gt = squeeze(ground_truth);
  const std::string pred = squeeze(prediction);
  if (gt.empty()) return pred.empty() ? 1 : 0;
  return pred.find(gt) != std::string::npos ? 1 : 0;
}

}  // namespace docvl
