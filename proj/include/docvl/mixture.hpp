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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docvl/errors.hpp"
#include "json.hpp"

namespace docvl {

enum class Task { GeneralQa, Reasoning, Captioning, OcrDoc, Textbook, ChartTable, ImageDiff };
enum class InputType { MultiImage, SingleImage, TextOnly };

std::string_view to_string(Task task);
std::string_view to_string(InputType type);
Task parse_task(std::string_view name);
InputType parse_input_type(std::string_view name);

struct MixtureRow {
  Task task = Task::GeneralQa;
  InputType input_type = InputType::SingleImage;
  std::int64_t count = 0;

  bool operator==(const MixtureRow&) const = default;
};

struct MixtureTable {
  std::string name;
  std::vector<MixtureRow> rows;

  std::int64_t total() const;
};

/// CSV with header `task,input_type,count`. An optional `total,,N` row is
/// cross-checked against the row sum. Lines starting with '#' are comments.
MixtureTable parse_mixture(std::string_view text, std::string name);
MixtureTable load_mixture(const std::filesystem::path& path);

/// Hamilton apportionment: floors of count*scale, then the remaining units
/// go to the largest fractional parts (earlier rows win ties). The result
/// sums to round(total*scale) exactly.
std::vector<std::int64_t> apportion(std::span<const std::int64_t> counts, double scale);

struct ManifestEntry {
  std::uint32_t row = 0;    // index into Manifest::rows
  std::uint32_t index = 0;  // position within that row

  bool operator==(const ManifestEntry&) const = default;
  auto operator<=>(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string table_name;
  std::vector<MixtureRow> rows;  // scaled counts
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  double scale = 1.0;

  /// `<table>/<task>/<input_type>/<index>`
  std::string sample_id(const ManifestEntry& e) const;
  std::int64_t count_of(Task task, InputType type) const;

  /// One JSON object per line, fields in order:
  /// schema_version, id, task, input_type.
  void write_jsonl(std::ostream& out) const;
};

Manifest compose_mixture(const MixtureTable& table, double scale, std::uint64_t seed);

struct TaskShare {
  Task task = Task::GeneralQa;
  std::int64_t count = 0;
  double share = 0.0;    // exact fraction of the total
  double percent = 0.0;  // rounded to 0.1
};

/// Tasks in enum order, restricted to those present in the table.
std::vector<TaskShare> mixture_stats(const MixtureTable& table);

nlohmann::json stats_to_json(const MixtureTable& table);

/// Fisher-Yates with an mt19937_64 stream and rejection sampling, so the
/// permutation is identical on every standard library.
template <typename T>
void portable_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    // Draws below 2^64 mod bound would bias the low residues.
    const std::uint64_t reject_below = (UINT64_MAX % bound + 1) % bound;
    std::uint64_t draw = rng();
    while (draw < reject_below) draw = rng();
    std::swap(items[i - 1], items[draw % bound]);
  }
}

}  // namespace docvl
