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

#include "docvl/vision.hpp"
#include "json.hpp"

namespace docvl {

enum class SegmentKind { Text, Image };

struct Segment {
  SegmentKind kind = SegmentKind::Text;
  int token_count = 0;
  std::string text;      // Text segments only.
  int block_index = -1;  // Image segments only.

  bool operator==(const Segment&) const = default;
};

struct TokenSequence {
  std::vector<Segment> segments;
  int total_visual_tokens = 0;
  int total_tokens = 0;

  nlohmann::json to_json() const;
  std::string serialize() const { return to_json().dump(); }
};

/// `format` holds a single `{image}` placeholder followed by a `{prompt}`
/// placeholder. Each image block is bracketed by the start/end markers,
/// which count as one token each.
struct ChatTemplate {
  std::string format;
  std::string image_start = "<img>";
  std::string image_end = "</img>";

  static ChatTemplate standard();
};

/// Text carries no tokenizer; its declared length is the number of
/// whitespace-separated pieces.
int declared_text_tokens(std::string_view text);

TokenSequence assemble_sequence(std::span<const int> block_token_counts, std::string_view prompt,
                                const ChatTemplate& chat_template);

template <typename Scalar>
TokenSequence assemble_sequence(const std::vector<VisualTokens<Scalar>>& blocks,
                                std::string_view prompt, const ChatTemplate& chat_template) {
  std::vector<int> counts;
  counts.reserve(blocks.size());
  for (const auto& b : blocks) counts.push_back(b.num_tokens());
  return assemble_sequence(std::span<const int>(counts), prompt, chat_template);
}

}  // namespace docvl
