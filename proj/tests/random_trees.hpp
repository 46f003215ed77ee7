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

// Random small trees and JSON documents shared by the tree tests.

#include <random>
#include <string>

#include "docvl/json_tree.hpp"

namespace testing_support {

inline docvl::JsonTree random_tree(std::mt19937_64& rng, int max_nodes,
                                   const std::string& alphabet = "abc") {
  const int n = static_cast<int>(rng() % (max_nodes + 1));
  if (n == 0) return {};
  std::vector<int> parent(n, -1);
  std::vector<std::string> label(n);
  for (int i = 0; i < n; ++i) {
    label[i] = std::string(1, alphabet[rng() % alphabet.size()]);
    if (i > 0) parent[i] = static_cast<int>(rng() % i);
  }
  auto build = [&](auto&& self, int id) -> docvl::TreeNode {
    docvl::TreeNode node{label[id], {}};
    for (int c = id + 1; c < n; ++c) {
      if (parent[c] == id) node.children.push_back(self(self, c));
    }
    return node;
  };
  return {build(build, 0)};
}

inline nlohmann::json random_json(std::mt19937_64& rng, int depth = 0) {
  const int kind = static_cast<int>(rng() % (depth >= 2 ? 4 : 6));
  switch (kind) {
    case 0: return static_cast<int>(rng() % 5);
    case 1: return std::string(1, static_cast<char>('p' + rng() % 4));
    case 2: return (rng() % 2) == 0;
    case 3: return nullptr;
    case 4: {
      nlohmann::json o = nlohmann::json::object();
      const int k = static_cast<int>(rng() % 3);
      for (int i = 0; i < k; ++i) o[std::string(1, static_cast<char>('k' + rng() % 3))] = random_json(rng, depth + 1);
      return o;
    }
    default: {
      nlohmann::json a = nlohmann::json::array();
      const int k = static_cast<int>(rng() % 3);
      for (int i = 0; i < k; ++i) a.push_back(random_json(rng, depth + 1));
      return a;
    }
  }
}

}  // namespace testing_support
