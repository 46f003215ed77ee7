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
#include <functional>
#include <string>
#include <vector>

#include "docvl/scoring.hpp"
#include "json.hpp"

namespace docvl {

struct InferenceRequest {
  std::string id;
  std::string prompt;
  std::vector<std::string> images;
};

/// Sends one prompt (plus images) and returns the raw model text. Throws
/// TransportError when no usable response arrives.
class InferenceClient {
 public:
  virtual ~InferenceClient() = default;
  virtual std::string send(const InferenceRequest& request) = 0;
};

/// Offline client: the response for sample `id` is the file `<dir>/<id>.txt`.
class ReplayClient : public InferenceClient {
 public:
  explicit ReplayClient(std::filesystem::path dir);
  std::string send(const InferenceRequest& request) override;

 private:
  std::filesystem::path dir_;
};

struct HttpClientConfig {
  /// `http://host[:port]/path` (https when built with OpenSSL).
  std::string endpoint;
  std::string token;
  std::string model = "default";
  int connect_timeout_s = 10;
  int read_timeout_s = 120;

  /// Reads DOCVL_ENDPOINT and DOCVL_API_TOKEN.
  static HttpClientConfig from_env();
};

/// Request body: {model, messages: [{role, content: [{type, data}]}]} where
/// text parts carry UTF-8 and image parts carry base64 file bytes.
nlohmann::json build_request_body(const std::string& model, const InferenceRequest& request);

/// POSTs build_request_body() and expects `{"content": "..."}` back.
class HttpClient : public InferenceClient {
 public:
  explicit HttpClient(HttpClientConfig config);
  std::string send(const InferenceRequest& request) override;

 private:
  HttpClientConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// One line of the eval set: id, doc_type, prompt, images, ground_truth.
std::vector<ExtractionSample> parse_eval_set(std::string_view jsonl);
std::vector<ExtractionSample> load_eval_set(const std::filesystem::path& path);

struct SampleResult {
  ExtractionSample sample;
  ScoreBreakdown scores;
  bool errored = false;
  std::string error;
};

nlohmann::json result_to_json(const SampleResult& result);
SampleResult result_from_json(const nlohmann::json& line);
std::vector<SampleResult> load_results(const std::filesystem::path& path);

struct EvalOptions {
  int concurrency = 1;
  /// Per-sample JSON-lines output. Completed results are appended to
  /// `<results>.partial` while running; the final file is rewritten in
  /// eval-set order. Existing results for the same ids are reused.
  std::filesystem::path results_path;
  /// Relative image paths in samples are resolved against this directory
  /// when building requests; stored results keep the original strings.
  std::filesystem::path image_root;
  std::function<void(const std::string&)> log;
};

struct EvalRun {
  std::vector<SampleResult> results;  // eval-set order
  EvalReport report;
  int reused = 0;
};

EvalRun run_eval(const std::vector<ExtractionSample>& samples, InferenceClient& client,
                 const EvalOptions& options);

EvalReport report_from_results(const std::vector<SampleResult>& results);

}  // namespace docvl
