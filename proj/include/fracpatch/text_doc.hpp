// Copyright 2026 The FracPatch Authors.
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

#ifndef FRACPATCH_TEXT_DOC_HPP
#define FRACPATCH_TEXT_DOC_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fracpatch/errors.hpp"

namespace fracpatch {

/// Flat, ordered `dotted.key = value` document. One format serves config
/// files, run manifests, band summaries and checkpoints: line-oriented,
/// diff-friendly, `#` comments, keys unique. Serialization preserves
/// insertion order so identical inputs produce byte-identical files.
class TextDoc {
 public:
  void set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      entries_[it->second].second = value;
      return;
    }
    index_.emplace(key, entries_.size());
    entries_.emplace_back(key, value);
  }

  void set_f64(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    set(key, buf);
  }

  void set_i64(const std::string& key, long long value) {
    set(key, std::to_string(value));
  }

  bool has(const std::string& key) const { return index_.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end())
      throw invalid_input_error(source_ + ": missing required key '" + key + "'");
    return entries_[it->second].second;
  }

  std::optional<std::string> get_opt(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].second;
  }

  double get_f64(const std::string& key) const {
    return parse_f64(key, get(key));
  }

  double get_f64_or(const std::string& key, double fallback) const {
    auto v = get_opt(key);
    return v ? parse_f64(key, *v) : fallback;
  }

  long long get_i64(const std::string& key) const {
    return parse_i64(key, get(key));
  }

  long long get_i64_or(const std::string& key, long long fallback) const {
    auto v = get_opt(key);
    return v ? parse_i64(key, *v) : fallback;
  }

  std::string get_str_or(const std::string& key, const std::string& fallback) const {
    auto v = get_opt(key);
    return v ? *v : fallback;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  /// Line number a key was parsed from (0 when the doc was built in memory).
  int line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

  const std::string& source() const { return source_; }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    return out.str();
  }

  static TextDoc parse(const std::string& content, const std::string& source_name) {
    TextDoc doc;
    doc.source_ = source_name;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw invalid_input_error(source_name + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + s + "'");
      std::string key = strip(s.substr(0, eq));
      std::string value = strip(s.substr(eq + 1));
      if (key.empty())
        throw invalid_input_error(source_name + ":" + std::to_string(lineno) +
                                  ": empty key");
      if (doc.has(key))
        throw invalid_input_error(source_name + ":" + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
      doc.set(key, value);
      doc.lines_[key] = lineno;
    }
    return doc;
  }

  static TextDoc load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

 private:
  std::string where(const std::string& key) const {
    auto it = lines_.find(key);
    if (it == lines_.end()) return source_.empty() ? key : source_ + ": " + key;
    return source_ + ":" + std::to_string(it->second) + ": " + key;
  }

  double parse_f64(const std::string& key, const std::string& v) const {
    try {
      size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw invalid_input_error(where(key) + ": not a number: '" + v + "'");
    }
  }

  long long parse_i64(const std::string& key, const std::string& v) const {
    try {
      size_t pos = 0;
      long long x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw invalid_input_error(where(key) + ": not an integer: '" + v + "'");
    }
  }

  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, size_t> index_;
  std::unordered_map<std::string, int> lines_;
  std::string source_;
};

/// Writes via a temp file + rename so readers never observe partial content.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw error("short write on '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_artifacts_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fracpatch

#endif  // FRACPATCH_TEXT_DOC_HPP
