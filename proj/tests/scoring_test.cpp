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
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "docvl/scoring.hpp"

namespace docvl {
namespace {

using nlohmann::json;

const json kReceipt = json::parse(
    R"({"store": "ACME", "date": "2024-01-05", "total": "12.50", "tax": "1.00"})");

ParseResult parsed(const std::string& s) { return parse_prediction(s); }

TEST(EffectiveTed, Bounds) {
  EXPECT_DOUBLE_EQ(effective_ted_score(kReceipt, kReceipt), 1.0);
  EXPECT_DOUBLE_EQ(effective_ted_score(std::nullopt, kReceipt), 0.0);
  EXPECT_THROW(effective_ted_score(kReceipt, json()), ArgumentError);
}

TEST(EffectiveTed, OneEditOverFourNodes) {
  const json gt = json::parse(R"({"a": 1, "b": 2, "c": 3})");
  EXPECT_DOUBLE_EQ(effective_ted_score(parsed(R"({"a": 1, "b": 2, "c": 4})"), gt), 0.75);
}

TEST(EffectiveTed, ClampedAtZero) {
  const json gt = json::parse(R"({"a": 1})");
  EXPECT_DOUBLE_EQ(effective_ted_score(parsed(R"([7, 8, 9])"), gt), 0.0);
}

TEST(KvF1, Cases) {
  const json gt = json::parse(R"({"a": 1, "b": 2, "c": 3, "d": 4})");
  EXPECT_DOUBLE_EQ(kv_f1(gt, gt), 1.0);
  EXPECT_NEAR(kv_f1(parsed(R"({"a": 1, "b": 2})"), gt), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(kv_f1(std::nullopt, gt), 0.0);
  EXPECT_DOUBLE_EQ(kv_f1(parsed(R"({"z": 1})"), gt), 0.0);
  EXPECT_THROW(kv_f1(gt, json()), ArgumentError);
}

TEST(KvF1, ArrayElementsAreKeyedByIndex) {
  const json gt = json::parse(R"({"items": ["x", "x"]})");
  EXPECT_DOUBLE_EQ(kv_f1(parsed(R"({"items": ["x", "y"]})"), gt), 0.5);
}

TEST(PerfectMatch, Cases) {
  EXPECT_EQ(perfect_match(parsed(R"({"tax": "1.00", "total": "12.50", "date": "2024-01-05", "store": " ACME"})"),
                          kReceipt),
            1);
  EXPECT_EQ(perfect_match(parsed(R"({"tax": "1.01", "total": "12.50", "date": "2024-01-05", "store": "ACME"})"),
                          kReceipt),
            0);
  EXPECT_EQ(perfect_match(std::nullopt, kReceipt), 0);
}

TEST(ScorePrediction, PerfectAndUnparsed) {
  EXPECT_EQ(score_prediction(kReceipt.dump(), kReceipt), (ScoreBreakdown{1, 1.0, 1.0, true}));
  EXPECT_EQ(score_prediction("no idea", kReceipt), (ScoreBreakdown{0, 0.0, 0.0, false}));
}

TEST(ScorePrediction, HalfCorrectReceipt) {
  // Two of four values wrong: two relabels over five nodes, two of four
  // pairs matched in each direction.
  const auto s = score_prediction(
      R"({"store": "ACME", "date": "2024-01-05", "total": "99.00", "tax": "0.00"})", kReceipt);
  EXPECT_EQ(s.perfect_match, 0);
  EXPECT_DOUBLE_EQ(s.effective_ted, 1.0 - 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(s.kv_f1, 0.5);
  EXPECT_TRUE(s.parsed);
}

ScoredSample perfect(DocType t) { return {t, {1, 1.0, 1.0, true}, false}; }
ScoredSample failed(DocType t) { return {t, {}, false}; }

TEST(Aggregate, AllPerfectAndAllFailed) {
  std::vector<ScoredSample> good{perfect(DocType::Receipt), perfect(DocType::Check)};
  const auto r = aggregate(good);
  for (const auto& t : r.per_type) EXPECT_DOUBLE_EQ(t.accuracy, 100.0);
  EXPECT_DOUBLE_EQ(r.overall, 100.0);
  std::vector<ScoredSample> bad{failed(DocType::Receipt), failed(DocType::Other)};
  EXPECT_DOUBLE_EQ(aggregate(bad).overall, 0.0);
  EXPECT_THROW(aggregate(std::vector<ScoredSample>{}), ArgumentError);
}

TEST(Aggregate, ThreeTypeAverage) {
  const std::vector<double> acc{82.0, 56.4, 41.5};
  EXPECT_NEAR(overall_accuracy(acc), 59.97, 0.005);
  EXPECT_DOUBLE_EQ(round_to(overall_accuracy(acc), 2), 59.97);
  EXPECT_THROW(overall_accuracy(std::vector<double>{}), ArgumentError);
}

TEST(Aggregate, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredSample> samples;
  for (int i = 0; i < 300; ++i) {
    const auto t = static_cast<DocType>(rng() % 4);
    samples.push_back({t, {static_cast<int>(rng() % 2), u(rng), u(rng), true}, false});
  }
  const std::string reference = aggregate(samples).to_json().dump();
  const EvalReport exact = aggregate(samples);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(samples.begin(), samples.end(), rng);
    const EvalReport r = aggregate(samples);
    ASSERT_EQ(r.to_json().dump(), reference);
    ASSERT_EQ(r.overall, exact.overall);
  }
}

TEST(Aggregate, ErroredCounted) {
  std::vector<ScoredSample> s{perfect(DocType::Receipt), {DocType::Receipt, {}, true}};
  const auto r = aggregate(s);
  EXPECT_EQ(r.errored, 1);
  EXPECT_EQ(r.per_type[0].errored, 1);
  EXPECT_DOUBLE_EQ(r.per_type[0].accuracy, 50.0);
}

TEST(OcrScore, Containment) {
  EXPECT_EQ(ocr_text_score("The total is $5.00", "$5.00"), 1);
  EXPECT_EQ(ocr_text_score("", "$5.00"), 0);
  EXPECT_EQ(ocr_text_score("Hello,  World", "Hello,  World"), 1);
  EXPECT_EQ(ocr_text_score("HELLO world!", "hello\tworld"), 1);
  EXPECT_EQ(ocr_text_score("help", "hello"), 0);
  EXPECT_EQ(ocr_text_score("", "..."), 1);
  EXPECT_EQ(ocr_text_score("x", "..."), 0);
}

TEST(OcrScore, HmerKeepsCaseIgnoresSpaces) {
  EXPECT_EQ(ocr_task_score(OcrTask::Hmer, "x ^ { 2 } + Y", "x^{2}+Y"), 1);
  EXPECT_EQ(ocr_task_score(OcrTask::Hmer, "x^{2}+y", "x^{2}+Y"), 0);
  EXPECT_EQ(ocr_task_score(OcrTask::Kie, "Total: 5", "total 5"), 1);
  for (auto t : {OcrTask::TextRecognition, OcrTask::SceneTextVqa, OcrTask::DocVqa, OcrTask::Kie,
                 OcrTask::Hmer}) {
    EXPECT_EQ(parse_ocr_task(to_string(t)), t);
  }
}

TEST(DocType, Names) {
  for (auto t : {DocType::Receipt, DocType::DriversLicense, DocType::Check, DocType::Other}) {
    EXPECT_EQ(parse_doc_type(to_string(t)), t);
  }
  EXPECT_THROW(parse_doc_type("passport"), ParseError);
}

}  // namespace
}  // namespace docvl
