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
#include "docvl/sequence.hpp"

#include <cctype>

namespace docvl {

namespace {

constexpr std::string_view kImageSlot = "{image}";
constexpr std::string_view kPromptSlot = "{prompt}";

void push_text(TokenSequence& seq, std::string text, int tokens) {
  if (text.empty()) return;
  Segment s;
  s.kind = SegmentKind::Text;
  s.token_count = tokens;
  s.text = std::move(text);
  seq.segments.push_back(std::move(s));
}

}  // namespace

ChatTemplate ChatTemplate::standard() {
  ChatTemplate t;
  t.format = "<|system|>You are a helpful assistant.</s><|prompt|>{image}\n{prompt}</s><|answer|>";
  return t;
}

int declared_text_tokens(std::string_view text) {
  int count = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

TokenSequence assemble_sequence(std::span<const int> block_token_counts, std::string_view prompt,
                                const ChatTemplate& chat_template) {
  const std::string& fmt = chat_template.format;
  if (fmt.empty()) throw ArgumentError("assemble_sequence: empty chat template");
  const auto image_pos = fmt.find(kImageSlot);
  const auto prompt_pos = fmt.find(kPromptSlot);
  if (image_pos == std::string::npos || prompt_pos == std::string::npos ||
      prompt_pos < image_pos) {
    throw ArgumentError("assemble_sequence: template needs {image} followed by {prompt}");
  }
  if (chat_template.image_start.empty() || chat_template.image_end.empty()) {
    throw ArgumentError("assemble_sequence: empty image markers");
  }

  TokenSequence seq;
  const std::string head = fmt.substr(0, image_pos);
  push_text(seq, head, declared_text_tokens(head));

  for (std::size_t i = 0; i < block_token_counts.size(); ++i) {
    const int count = block_token_counts[i];
    if (count <= 0) throw ArgumentError("assemble_sequence: image block without tokens");
    push_text(seq, chat_template.image_start, 1);
    Segment img;
    img.kind = SegmentKind::Image;
    img.token_count = count;
    img.block_index = static_cast<int>(i);
    seq.segments.push_back(img);
    push_text(seq, chat_template.image_end, 1);
    seq.total_visual_tokens += count;
  }

  std::string tail = fmt.substr(image_pos + kImageSlot.size());
  const auto slot = tail.find(kPromptSlot);
  tail.replace(slot, kPromptSlot.size(), prompt);
  push_text(seq, tail, declared_text_tokens(tail));

  for (const Segment& s : seq.segments) seq.total_tokens += s.token_count;
  return seq;
}

nlohmann::json TokenSequence::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment& s : segments) {
    if (s.kind == SegmentKind::Text) {
      segs.push_back({{"kind", "text"}, {"tokens", s.token_count}, {"text", s.text}});
    } else {
      segs.push_back({{"kind", "image"}, {"tokens", s.token_count}, {"block", s.block_index}});
    }
  }
  return {{"schema_version", 1},
          {"segments", segs},
          {"total_visual_tokens", total_visual_tokens},
          {"total_tokens", total_tokens}};
}

}  // namespace docvl
