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
#include "docvl/json_tree.hpp"

#include <cmath>

#include "docvl/text_util.hpp"

namespace docvl {

namespace {

using nlohmann::json;

std::size_t count_nodes(const TreeNode& n) {
  std::size_t total = 1;
  for (const auto& c : n.children) total += count_nodes(c);
  return total;
}

std::string value_tag(const json& v) {
  if (v.is_object()) return "{}";
  if (v.is_array()) return "[]";
  return "=" + scalar_text(v);
}

TreeNode build(const std::string& key, const json& v) {
  TreeNode node;
  node.label = key + '\x1f' + value_tag(v);
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) node.children.push_back(build(k, child));
  } else if (v.is_array()) {
    for (const auto& child : v) node.children.push_back(build("", child));
  }
  return node;
}

void flatten_into(const json& v, const std::string& path,
                  std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    if (v.empty()) out.emplace_back(path, "{}");
    for (const auto& [k, child] : v.items()) {
      flatten_into(child, path.empty() ? k : path + "." + k, out);
    }
  } else if (v.is_array()) {
    if (v.empty()) out.emplace_back(path, "[]");
    for (std::size_t i = 0; i < v.size(); ++i) {
      flatten_into(v[i], path + "[" + std::to_string(i) + "]", out);
    }
  } else {
    out.emplace_back(path, scalar_text(v));
  }
}

std::string strip_fences(std::string_view raw) {
  const auto open = raw.find("```");
  if (open == std::string_view::npos) return std::string(raw);
  auto body_start = raw.find('\n', open);
  if (body_start == std::string_view::npos) return std::string(raw.substr(open + 3));
  ++body_start;
  const auto close = raw.find("```", body_start);
  return std::string(raw.substr(body_start, close == std::string_view::npos
                                                ? std::string_view::npos
                                                : close - body_start));
}

// Index one past the bracket matching text[start], honoring JSON strings.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c == '{' ? '}' : ']');
    } else if (c == '}' || c == ']') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<json> try_parse(std::string_view text) {
  json v = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) return std::nullopt;
  return v;
}

}  // namespace

std::size_t JsonTree::size() const { return root ? count_nodes(*root) : 0; }

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "null";
  return v.dump();
}

json canonicalize(const json& value) {
  if (value.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : value.items()) out[k] = canonicalize(v);
    return out;
  }
  if (value.is_array()) {
    json out = json::array();
    for (const auto& v : value) out.push_back(canonicalize(v));
    return out;
  }
  if (value.is_string()) return std::string(trim(value.get_ref<const std::string&>()));
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9007199254740992.0) {
      return static_cast<std::int64_t>(d);
    }
    return d;
  }
  if (value.is_number_unsigned()) {
    const auto u = value.get<std::uint64_t>();
    if (u <= static_cast<std::uint64_t>(INT64_MAX)) return static_cast<std::int64_t>(u);
  }
  return value;
}

JsonTree to_tree(const json& value) { return JsonTree{build("", value)}; }

std::vector<std::pair<std::string, std::string>> flatten(const json& value) {
  std::vector<std::pair<std::string, std::string>> out;
  flatten_into(value, "", out);
  return out;
}

ParseResult parse_prediction(std::string_view raw) {
  const std::string body = strip_fences(raw);
  const std::string_view text = trim(body);
  if (text.empty()) return std::nullopt;
  if (text.front() == '{' || text.front() == '[') {
    if (auto whole = try_parse(text)) return canonicalize(*whole);
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const auto end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    if (auto v = try_parse(text.substr(i, end - i))) return canonicalize(*v);
  }
  return std::nullopt;
}

}  // namespace docvl
