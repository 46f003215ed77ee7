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
#include "docvl/tree_edit.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace docvl {

namespace {

// Postorder view with 1-based indices; index 0 is the empty forest.
struct Postorder {
  std::vector<const std::string*> labels{nullptr};
  std::vector<std::size_t> leftmost{0};
  std::vector<std::size_t> keyroots;

  explicit Postorder(const JsonTree& tree) {
    if (tree.root) visit(*tree.root);
    const std::size_t n = size();
    // A keyroot is the highest node sharing its leftmost leaf.
    std::vector<bool> seen(n + 1, false);
    for (std::size_t i = n; i >= 1; --i) {
      if (!seen[leftmost[i]]) {
        seen[leftmost[i]] = true;
        keyroots.push_back(i);
      }
    }
    std::reverse(keyroots.begin(), keyroots.end());
  }

  std::size_t size() const { return labels.size() - 1; }

 private:
  std::size_t visit(const TreeNode& node) {
    std::size_t first_leaf = 0;
    for (const auto& child : node.children) {
      const std::size_t leaf = visit(child);
      if (first_leaf == 0) first_leaf = leaf;
    }
    labels.push_back(&node.label);
    const std::size_t self = labels.size() - 1;
    leftmost.push_back(first_leaf == 0 ? self : first_leaf);
    return leftmost.back();
  }
};

}  // namespace

std::size_t tree_edit_distance(const JsonTree& a, const JsonTree& b) {
  const Postorder ta(a);
  const Postorder tb(b);
  const std::size_t n = ta.size();
  const std::size_t m = tb.size();
  if (n == 0) return m;
  if (m == 0) return n;

  std::vector<std::vector<std::size_t>> tree_dist(n + 1, std::vector<std::size_t>(m + 1, 0));
  std::vector<std::vector<std::size_t>> forest(n + 2, std::vector<std::size_t>(m + 2, 0));

  for (std::size_t i : ta.keyroots) {
    for (std::size_t j : tb.keyroots) {
      const std::size_t li = ta.leftmost[i];
      const std::size_t lj = tb.leftmost[j];
      // forest[x][y] holds the distance between forests (li..x) and (lj..y);
      // row/column li-1 / lj-1 is the empty forest.
      forest[li - 1][lj - 1] = 0;
      for (std::size_t x = li; x <= i; ++x) forest[x][lj - 1] = forest[x - 1][lj - 1] + 1;
      for (std::size_t y = lj; y <= j; ++y) forest[li - 1][y] = forest[li - 1][y - 1] + 1;
      for (std::size_t x = li; x <= i; ++x) {
        for (std::size_t y = lj; y <= j; ++y) {
          const std::size_t del = forest[x - 1][y] + 1;
          const std::size_t ins = forest[x][y - 1] + 1;
          if (ta.leftmost[x] == li && tb.leftmost[y] == lj) {
            const std::size_t relabel =
                forest[x - 1][y - 1] + (*ta.labels[x] == *tb.labels[y] ? 0 : 1);
            forest[x][y] = std::min({del, ins, relabel});
            tree_dist[x][y] = forest[x][y];
          } else {
            const std::size_t sub = forest[ta.leftmost[x] - 1][tb.leftmost[y] - 1] + tree_dist[x][y];
            forest[x][y] = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return tree_dist[n][m];
}

}  // namespace docvl
