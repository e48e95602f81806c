// Copyright 2026 The hierlpr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File formats.
//   hierarchy: label_id,parent_id,name   (empty parent = root; repeat a label for more parents)
//   scores:    sample_id,label_id,value[,truth]
//   ranking:   rank,sample_id,label_id,lpr,block_id

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "hierlpr/error.hpp"
#include "hierlpr/hierarchy.hpp"

namespace hierlpr {

// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace csv {

inline std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;

  std::size_t column(std::string_view name, bool required = true) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    if (required) throw ValidationError(path + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(-1);
  }
};

inline Table parse(std::istream& in, const std::string& path) {
  Table t;
  t.path = path;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line);
    if (t.header.empty()) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ValidationError(path + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_no.push_back(n);
  }
  if (t.header.empty()) throw ValidationError(path + ": empty file");
  return t;
}

inline Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return parse(in, path);
}

inline long long to_int(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError(t.path + ":" + std::to_string(t.line_no[row]) + ": '" + s + "' is not an integer");
  }
  return v;
}

inline double to_double(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError(t.path + ":" + std::to_string(t.line_no[row]) + ": '" + s + "' is not a finite number");
  }
  return v;
}

inline bool to_bit(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ValidationError(t.path + ":" + std::to_string(t.line_no[row]) + ": truth must be 0 or 1, got '" + s + "'");
}

}  // namespace csv

// Writes to a sibling temp file, then renames over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::runtime, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCategory::runtime, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCategory::runtime, "cannot rename onto " + path + ": " + ec.message());
  }
}

inline LabelGraph parse_hierarchy(const csv::Table& t) {
  const std::size_t c_id = t.column("label_id");
  const std::size_t c_parent = t.column("parent_id");
  const std::size_t c_name = t.column("name", false);
  std::map<LabelId, std::string> names;
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto id = static_cast<LabelId>(csv::to_int(t, r, c_id));
    auto& name = names[id];
    if (c_name != static_cast<std::size_t>(-1) && name.empty()) name = t.rows[r][c_name];
    if (!t.rows[r][c_parent].empty()) edges.emplace_back(id, static_cast<LabelId>(csv::to_int(t, r, c_parent)));
  }
  std::vector<LabelRecord> labels;
  for (auto& [id, name] : names) labels.push_back({id, name.empty() ? "L" + std::to_string(id) : name});
  return LabelGraph(std::move(labels), std::move(edges));
}

inline LabelGraph read_hierarchy_csv(const std::string& path) { return parse_hierarchy(csv::read(path)); }

inline std::string hierarchy_csv(const LabelGraph& g) {
  std::string s = "label_id,parent_id,name\n";
  for (const auto& rec : g.labels()) {
    const auto ps = g.parents(rec.id);
    if (ps.empty()) {
      s += std::to_string(rec.id) + ",," + csv::quote(rec.name) + "\n";
    }
    for (LabelId p : ps) s += std::to_string(rec.id) + "," + std::to_string(p) + "," + csv::quote(rec.name) + "\n";
  }
  return s;
}

// Samples keep their order of first appearance. Missing cells are NaN.
inline InstanceTable parse_scores(const csv::Table& t, std::size_t labels) {
  const std::size_t c_sample = t.column("sample_id");
  const std::size_t c_label = t.column("label_id");
  const std::size_t c_value = t.column("value");
  const std::size_t c_truth = t.column("truth", false);
  const bool has_truth = c_truth != static_cast<std::size_t>(-1);
  InstanceTable out;
  out.labels = labels;
  std::unordered_map<std::string, std::size_t> sample_index;
  std::vector<std::uint8_t> truth;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& sid = t.rows[r][c_sample];
    auto [it, fresh] = sample_index.emplace(sid, out.sample_ids.size());
    if (fresh) {
      out.sample_ids.push_back(sid);
      out.values.resize(out.values.size() + labels, std::numeric_limits<double>::quiet_NaN());
      truth.resize(truth.size() + labels, 0);
    }
    const long long label = csv::to_int(t, r, c_label);
    if (label < 0 || static_cast<std::size_t>(label) >= labels) {
      throw ValidationError(t.path + ":" + std::to_string(t.line_no[r]) + ": label " + std::to_string(label) +
                            " not in hierarchy");
    }
    const std::size_t cell = it->second * labels + static_cast<std::size_t>(label);
    if (!std::isnan(out.values[cell])) {
      throw ValidationError(t.path + ":" + std::to_string(t.line_no[r]) + ": duplicate cell (" + sid + ", " +
                            std::to_string(label) + ")");
    }
    out.values[cell] = csv::to_double(t, r, c_value);
    if (has_truth) truth[cell] = csv::to_bit(t, r, c_truth) ? 1 : 0;
  }
  if (has_truth) out.truth = std::move(truth);
  return out;
}

inline InstanceTable read_scores_csv(const std::string& path, std::size_t labels) {
  return parse_scores(csv::read(path), labels);
}

// Largest label id + 1 found in a scores file.
inline std::size_t scores_label_count(const std::string& path) {
  const auto t = csv::read(path);
  const std::size_t c = t.column("label_id");
  long long mx = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) mx = std::max(mx, csv::to_int(t, r, c));
  return static_cast<std::size_t>(mx + 1);
}

inline std::string scores_csv(const InstanceTable& t) {
  std::string s = t.truth ? "sample_id,label_id,value,truth\n" : "sample_id,label_id,value\n";
  for (std::size_t m = 0; m < t.samples(); ++m) {
    for (std::size_t l = 0; l < t.labels; ++l) {
      const std::size_t i = m * t.labels + l;
      if (std::isnan(t.values[i])) continue;
      s += csv::quote(t.sample_ids[m]) + "," + std::to_string(l) + "," + format_double(t.values[i]);
      if (t.truth) s += (*t.truth)[i] ? ",1" : ",0";
      s += "\n";
    }
  }
  return s;
}

inline std::string ranking_csv(const InstanceForest& forest, const Ranking& r,
                               const std::vector<std::string>& sample_ids) {
  std::string s = "rank,sample_id,label_id,lpr,block_id\n";
  for (std::size_t k = 0; k < r.size(); ++k) {
    const InstanceId v = r.order[k];
    s += std::to_string(k + 1) + "," + csv::quote(sample_ids[forest.sample_of(v)]) + "," +
         std::to_string(forest.label_of(v)) + "," + format_double(forest.lpr(v)) + "," +
         std::to_string(r.block_of[k]) + "\n";
  }
  return s;
}

struct RankingRow {
  std::size_t rank = 0;
  std::string sample_id;
  LabelId label = 0;
  double lpr = 0.0;
  std::size_t block = 0;
};

// Rows sorted by rank; block means recomputed from the rows.
struct RankingFile {
  std::vector<RankingRow> rows;
  std::vector<double> block_mean;  // per row
};

inline RankingFile read_ranking_csv(const std::string& path) {
  const auto t = csv::read(path);
  const std::size_t c_rank = t.column("rank");
  const std::size_t c_sample = t.column("sample_id");
  const std::size_t c_label = t.column("label_id");
  const std::size_t c_lpr = t.column("lpr");
  const std::size_t c_block = t.column("block_id", false);
  RankingFile f;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    RankingRow row;
    row.rank = static_cast<std::size_t>(csv::to_int(t, r, c_rank));
    row.sample_id = t.rows[r][c_sample];
    row.label = static_cast<LabelId>(csv::to_int(t, r, c_label));
    row.lpr = csv::to_double(t, r, c_lpr);
    row.block = c_block == static_cast<std::size_t>(-1) ? r : static_cast<std::size_t>(csv::to_int(t, r, c_block));
    f.rows.push_back(std::move(row));
  }
  std::sort(f.rows.begin(), f.rows.end(), [](const RankingRow& a, const RankingRow& b) { return a.rank < b.rank; });
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& row : f.rows) {
    auto& a = acc[row.block];
    a.first += row.lpr;
    a.second += 1;
  }
  for (const auto& row : f.rows) {
    const auto& a = acc[row.block];
    f.block_mean.push_back(a.first / static_cast<double>(a.second));
  }
  return f;
}

}  // namespace hierlpr
