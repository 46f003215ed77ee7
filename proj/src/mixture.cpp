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
#include "docvl/mixture.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "docvl/text_util.hpp"

namespace docvl {

namespace {

constexpr std::array<std::pair<Task, std::string_view>, 7> kTaskNames{{
    {Task::GeneralQa, "general_qa"},
    {Task::Reasoning, "reasoning"},
    {Task::Captioning, "captioning"},
    {Task::OcrDoc, "ocr_doc"},
    {Task::Textbook, "textbook"},
    {Task::ChartTable, "chart_table"},
    {Task::ImageDiff, "image_diff"},
}};

constexpr std::array<std::pair<InputType, std::string_view>, 3> kInputNames{{
    {InputType::MultiImage, "multi_image"},
    {InputType::SingleImage, "single_image"},
    {InputType::TextOnly, "text_only"},
}};

std::int64_t parse_count(std::string_view field, std::size_t line_no) {
  std::int64_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(fmt::format("mixture line {}: bad count '{}'", line_no, field));
  }
  if (value < 0) throw ParseError(fmt::format("mixture line {}: negative count", line_no));
  return value;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "unknown";
}

std::string_view to_string(InputType type) {
  for (const auto& [t, name] : kInputNames) {
    if (t == type) return name;
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  for (const auto& [t, n] : kTaskNames) {
    if (n == name) return t;
  }
  throw ParseError(fmt::format("unknown task '{}'", name));
}

InputType parse_input_type(std::string_view name) {
  for (const auto& [t, n] : kInputNames) {
    if (n == name) return t;
  }
  throw ParseError(fmt::format("unknown input_type '{}'", name));
}

std::int64_t MixtureTable::total() const {
  std::int64_t sum = 0;
  for (const auto& r : rows) sum += r.count;
  return sum;
}

MixtureTable parse_mixture(std::string_view text, std::string name) {
  MixtureTable table;
  table.name = std::move(name);
  std::optional<std::int64_t> declared_total;
  std::set<std::pair<Task, InputType>> seen;
  bool have_header = false;

  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw ParseError(fmt::format("mixture line {}: expected 3 fields", line_no));
    }
    const auto f0 = trim(fields[0]);
    const auto f1 = trim(fields[1]);
    const auto f2 = trim(fields[2]);
    if (!have_header) {
      if (f0 != "task" || f1 != "input_type" || f2 != "count") {
        throw ParseError("mixture: header must be 'task,input_type,count'");
      }
      have_header = true;
      continue;
    }
    if (f0 == "total") {
      if (declared_total) throw ParseError("mixture: duplicate total row");
      declared_total = parse_count(f2, line_no);
      continue;
    }
    MixtureRow row{parse_task(f0), parse_input_type(f1), parse_count(f2, line_no)};
    if (!seen.insert({row.task, row.input_type}).second) {
      throw ValidationError(fmt::format("mixture: duplicate row {}/{}", f0, f1));
    }
    table.rows.push_back(row);
  }
  if (!have_header) throw ParseError("mixture: missing header");
  if (declared_total && *declared_total != table.total()) {
    throw ValidationError(fmt::format("mixture {}: declared total {} != computed total {}",
                                      table.name, *declared_total, table.total()));
  }
  return table;
}

MixtureTable load_mixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mixture table: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mixture(buf.str(), path.stem().string());
}

std::vector<std::int64_t> apportion(std::span<const std::int64_t> counts, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ArgumentError("scale must be in (0, 1]");
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  const auto target = static_cast<std::int64_t>(std::llround(static_cast<double>(total) * scale));

  std::vector<std::int64_t> out(counts.size());
  std::vector<double> remainder(counts.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double exact = static_cast<double>(counts[i]) * scale;
    out[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  std::int64_t missing = target - assigned;
  for (std::size_t k = 0; missing > 0; k = (k + 1) % order.size()) {
    ++out[order[k]];
    --missing;
  }
  // Only reachable through floating error in count*scale.
  for (auto it = order.rbegin(); missing < 0; ++it) {
    if (it == order.rend()) it = order.rbegin();
    if (out[*it] > 0) {
      --out[*it];
      ++missing;
    }
  }
  return out;
}

std::string Manifest::sample_id(const ManifestEntry& e) const {
  const MixtureRow& r = rows[e.row];
  return fmt::format("{}/{}/{}/{}", table_name, to_string(r.task), to_string(r.input_type),
                     e.index);
}

std::int64_t Manifest::count_of(Task task, InputType type) const {
  std::int64_t n = 0;
  for (const auto& r : rows) {
    if (r.task == task && r.input_type == type) n += r.count;
  }
  return n;
}

void Manifest::write_jsonl(std::ostream& out) const {
  fmt::memory_buffer buf;
  for (const ManifestEntry& e : entries) {
    const MixtureRow& r = rows[e.row];
    fmt::format_to(std::back_inserter(buf),
                   "{{\"schema_version\":1,\"id\":\"{}/{}/{}/{}\",\"task\":\"{}\","
                   "\"input_type\":\"{}\"}}\n",
                   table_name, to_string(r.task), to_string(r.input_type), e.index,
                   to_string(r.task), to_string(r.input_type));
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Manifest compose_mixture(const MixtureTable& table, double scale, std::uint64_t seed) {
  std::vector<std::int64_t> counts;
  counts.reserve(table.rows.size());
  for (const auto& r : table.rows) counts.push_back(r.count);
  const auto scaled = apportion(counts, scale);

  Manifest m;
  m.table_name = table.name;
  m.seed = seed;
  m.scale = scale;
  m.rows = table.rows;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    m.rows[i].count = scaled[i];
    total += scaled[i];
  }
  m.entries.reserve(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::int64_t k = 0; k < scaled[i]; ++k) {
      m.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)});
    }
  }
  portable_shuffle(m.entries, seed);
  return m;
}

std::vector<TaskShare> mixture_stats(const MixtureTable& table) {
  const std::int64_t total = table.total();
  if (table.rows.empty() || total <= 0) throw ArgumentError("mixture_stats: empty table");
  std::vector<TaskShare> out;
  for (const auto& [task, name] : kTaskNames) {
    bool present = false;
    std::int64_t sum = 0;
    for (const auto& r : table.rows) {
      if (r.task == task) {
        present = true;
        sum += r.count;
      }
    }
    if (!present) continue;
    TaskShare s;
    s.task = task;
    s.count = sum;
    s.share = static_cast<double>(sum) / static_cast<double>(total);
    s.percent = std::round(s.share * 1000.0) / 10.0;
    out.push_back(s);
  }
  return out;
}

nlohmann::json stats_to_json(const MixtureTable& table) {
  nlohmann::json shares = nlohmann::json::array();
  for (const auto& s : mixture_stats(table)) {
    shares.push_back({{"task", to_string(s.task)},
                      {"count", s.count},
                      {"percent", fmt::format("{:.1f}", s.percent)}});
  }
  return {{"schema_version", 1}, {"table", table.name}, {"total", table.total()},
          {"shares", shares}};
}

}  // namespace docvl
