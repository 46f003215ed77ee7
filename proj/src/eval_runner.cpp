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
#include "docvl/eval_runner.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "docvl/text_util.hpp"
#include "httplib.h"

namespace docvl {

using nlohmann::json;

ReplayClient::ReplayClient(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw IoError("replay fixture directory not found: " + dir_.string());
  }
}

std::string ReplayClient::send(const InferenceRequest& request) {
  const auto path = dir_ / (request.id + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("no replay fixture for sample " + request.id);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

HttpClientConfig HttpClientConfig::from_env() {
  HttpClientConfig config;
  if (const char* e = std::getenv("DOCVL_ENDPOINT")) config.endpoint = e;
  if (const char* t = std::getenv("DOCVL_API_TOKEN")) config.token = t;
  return config;
}

json build_request_body(const std::string& model, const InferenceRequest& request) {
  json content = json::array();
  for (const auto& image : request.images) {
    content.push_back({{"type", "image"}, {"data", httplib::detail::base64_encode(read_file(image))}});
  }
  content.push_back({{"type", "text"}, {"data", request.prompt}});
  return {{"model", model}, {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

HttpClient::HttpClient(HttpClientConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (config_.endpoint.empty() || scheme_end == std::string::npos) {
    throw ArgumentError("http client: endpoint must look like http://host[:port]/path");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpClient::send(const InferenceRequest& request) {
  httplib::Client cli(scheme_host_port_);
  if (!cli.is_valid()) throw TransportError("http client: unsupported endpoint " + scheme_host_port_);
  cli.set_connection_timeout(config_.connect_timeout_s, 0);
  cli.set_read_timeout(config_.read_timeout_s, 0);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  const std::string body = build_request_body(config_.model, request).dump();
  auto res = cli.Post(path_, headers, body, "application/json");
  if (!res) {
    throw TransportError("http request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("http status " + std::to_string(res->status));
  }
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("content") ||
      !reply["content"].is_string()) {
    throw TransportError("http response lacks a string 'content' field");
  }
  return reply["content"].get<std::string>();
}

namespace {

ExtractionSample sample_from_json(const json& j) {
  ExtractionSample s;
  s.id = j.at("id").get<std::string>();
  s.doc_type = parse_doc_type(j.at("doc_type").get<std::string>());
  s.prompt = j.value("prompt", "");
  if (j.contains("images")) s.images = j.at("images").get<std::vector<std::string>>();
  s.ground_truth = j.at("ground_truth");
  if (j.contains("raw_prediction") && j["raw_prediction"].is_string()) {
    s.raw_prediction = j["raw_prediction"].get<std::string>();
  }
  return s;
}

void check_id(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
      id == "." || id == "..") {
    throw ParseError("eval set: invalid sample id '" + id + "'");
  }
}

}  // namespace

std::vector<ExtractionSample> parse_eval_set(std::string_view jsonl) {
  std::vector<ExtractionSample> samples;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(jsonl)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    try {
      ExtractionSample s = sample_from_json(json::parse(line));
      check_id(s.id);
      if (s.ground_truth.is_null()) throw ParseError("missing ground_truth");
      if (!ids.insert(s.id).second) throw ParseError("duplicate id " + s.id);
      samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ParseError("eval set line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

std::vector<ExtractionSample> load_eval_set(const std::filesystem::path& path) {
  return parse_eval_set(read_file(path));
}

json result_to_json(const SampleResult& r) {
  json j = {{"schema_version", 1},
            {"id", r.sample.id},
            {"doc_type", to_string(r.sample.doc_type)},
            {"prompt", r.sample.prompt},
            {"images", r.sample.images},
            {"ground_truth", r.sample.ground_truth},
            {"raw_prediction", r.sample.raw_prediction},
            {"parsed", r.scores.parsed},
            {"perfect_match", r.scores.perfect_match},
            {"effective_ted", round_to(r.scores.effective_ted, 6)},
            {"kv_f1", round_to(r.scores.kv_f1, 6)},
            {"errored", r.errored}};
  if (r.errored) j["error"] = r.error;
  return j;
}

SampleResult result_from_json(const json& line) {
  SampleResult r;
  r.sample = sample_from_json(line);
  r.scores.parsed = line.at("parsed").get<bool>();
  r.scores.perfect_match = line.at("perfect_match").get<int>();
  r.scores.effective_ted = line.at("effective_ted").get<double>();
  r.scores.kv_f1 = line.at("kv_f1").get<double>();
  r.errored = line.value("errored", false);
  r.error = line.value("error", "");
  return r;
}

std::vector<SampleResult> load_results(const std::filesystem::path& path) {
  std::vector<SampleResult> out;
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    try {
      out.push_back(result_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

EvalReport report_from_results(const std::vector<SampleResult>& results) {
  std::vector<ScoredSample> scored;
  scored.reserve(results.size());
  for (const auto& r : results) scored.push_back({r.sample.doc_type, r.scores, r.errored});
  return aggregate(scored);
}

namespace {

std::filesystem::path partial_path(const std::filesystem::path& results) {
  auto p = results;
  p += ".partial";
  return p;
}

// Previously completed, non-errored results keyed by id. A truncated last
// line in the partial file (interrupted write) is ignored.
std::map<std::string, SampleResult> previous_results(const std::filesystem::path& results) {
  std::map<std::string, SampleResult> out;
  for (const auto& path : {results, partial_path(results)}) {
    if (!std::filesystem::exists(path)) continue;
    const std::string text = read_file(path);
    for (std::string_view line : split_lines(text)) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      SampleResult r = result_from_json(j);
      if (!r.errored) out[r.sample.id] = std::move(r);
    }
  }
  return out;
}

}  // namespace

EvalRun run_eval(const std::vector<ExtractionSample>& samples, InferenceClient& client,
                 const EvalOptions& options) {
  if (samples.empty()) throw ArgumentError("run_eval: empty eval set");
  const bool persist = !options.results_path.empty();
  auto previous = persist ? previous_results(options.results_path)
                          : std::map<std::string, SampleResult>{};

  EvalRun run;
  run.results.resize(samples.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto it = previous.find(samples[i].id);
    if (it != previous.end()) {
      run.results[i] = it->second;
      ++run.reused;
    } else {
      pending.push_back(i);
    }
  }

  std::ofstream partial;
  if (persist) {
    partial.open(partial_path(options.results_path), std::ios::binary | std::ios::app);
    if (!partial) throw IoError("cannot open " + partial_path(options.results_path).string());
  }
  std::mutex writer;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const std::size_t i = pending[k];
      SampleResult r;
      r.sample = samples[i];
      try {
        InferenceRequest request{r.sample.id, r.sample.prompt, r.sample.images};
        for (auto& image : request.images) {
          if (!options.image_root.empty() && std::filesystem::path(image).is_relative()) {
            image = (options.image_root / image).string();
          }
        }
        r.sample.raw_prediction = client.send(request);
        r.scores = score_sample(r.sample);
      } catch (const std::exception& e) {
        r.errored = true;
        r.error = e.what();
        r.sample.raw_prediction.clear();
        r.scores = {};
      }
      std::lock_guard<std::mutex> lock(writer);
      if (r.errored && options.log) options.log("sample " + r.sample.id + " errored: " + r.error);
      if (persist) partial << result_to_json(r).dump() << '\n' << std::flush;
      run.results[i] = std::move(r);
    }
  };

  const int threads = std::max(1, std::min<int>(options.concurrency, static_cast<int>(pending.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (persist) {
    partial.close();
    std::string out;
    for (const auto& r : run.results) out += result_to_json(r).dump() + "\n";
    write_file_atomic(options.results_path, out);
    std::filesystem::remove(partial_path(options.results_path));
  }
  run.report = report_from_results(run.results);
  return run;
}

}  // namespace docvl
