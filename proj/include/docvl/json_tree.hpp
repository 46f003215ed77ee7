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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace docvl {

/// Ordered labeled tree node.
struct TreeNode {
  std::string label;
  std::vector<TreeNode> children;

  bool operator==(const TreeNode&) const = default;
};

/// Possibly empty ordered tree.
struct JsonTree {
  std::optional<TreeNode> root;

  bool empty() const { return !root.has_value(); }
  std::size_t size() const;

  bool operator==(const JsonTree&) const = default;
};

/// A parsed, canonicalized prediction; nullopt when nothing parsed.
using ParseResult = std::optional<nlohmann::json>;

/// Trims strings, renders integral floats as integers. Object keys are
/// already sorted by nlohmann::json. Idempotent.
nlohmann::json canonicalize(const nlohmann::json& value);

/// Canonical text of a scalar: strings verbatim, numbers in shortest
/// round-trip form, `true`/`false`/`null`.
std::string scalar_text(const nlohmann::json& scalar);

/// Each node is labeled by its object key (empty for array elements and the
/// root) together with either the scalar text or the container kind.
/// Array order is carried by sibling order.
JsonTree to_tree(const nlohmann::json& value);

/// Leaf (path, value) pairs; paths look like `a.b[2].c`. Empty containers
/// contribute a leaf valued `{}` or `[]`.
std::vector<std::pair<std::string, std::string>> flatten(const nlohmann::json& value);

/// Strips markdown fences and surrounding prose, then takes the first
/// balanced JSON object or array that parses. Never throws.
ParseResult parse_prediction(std::string_view raw);

}  // namespace docvl
