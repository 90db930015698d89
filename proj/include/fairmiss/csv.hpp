// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMISS_CSV_HPP
#define FAIRMISS_CSV_HPP

#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"

namespace fairmiss {

struct ColumnSchema {
  ColumnKind kind = ColumnKind::kNumeric;
  bool is_label = false;
};

/// Column name -> kind declaration. Loaded from a JSON sidecar of the form
/// `{"age": {"kind": "numeric"}, "income": {"kind": "categorical", "is_label": true}}`.
struct Schema {
  std::map<std::string, ColumnSchema> columns;

  static Schema from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::kSchemaMismatch, "schema must be a JSON object");
    Schema s;
    std::size_t labels = 0;
    for (const auto& [name, spec] : j.items()) {
      ColumnSchema c;
      std::string kind;
      if (spec.is_string()) {
        kind = spec.get<std::string>();
      } else if (spec.is_object() && spec.contains("kind")) {
        kind = spec.at("kind").get<std::string>();
        c.is_label = spec.value("is_label", false);
      } else {
        throw Error(ErrorCode::kSchemaMismatch, "column '" + name + "' lacks a kind");
      }
      if (kind == "numeric") {
        c.kind = ColumnKind::kNumeric;
      } else if (kind == "categorical") {
        c.kind = ColumnKind::kCategorical;
      } else {
        throw Error(ErrorCode::kSchemaMismatch, "column '" + name + "' has unknown kind '" + kind + "'");
      }
      if (c.is_label) {
        ++labels;
        if (c.kind != ColumnKind::kCategorical) {
          throw Error(ErrorCode::kSchemaMismatch, "label column '" + name + "' must be categorical");
        }
      }
      s.columns.emplace(name, c);
    }
    if (labels > 1) throw Error(ErrorCode::kSchemaMismatch, "more than one label column declared");
    return s;
  }

  static Schema from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open schema '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaMismatch, "schema '" + path + "': " + e.what());
    }
  }
};

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> kTokens = {"?", "", "NA"};
  return kTokens;
}

/// RFC-4180 record reader. Accepts LF or CRLF line ends, quoted fields with
/// doubled quotes and embedded line breaks.
class CsvReader {
 public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {
    if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  /// Reads the next record into `fields`; returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    ++line_;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_++];
      if (quoted) {
        if (ch == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && !field_started) {
        quoted = true;
        field_started = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
      } else if (ch == '\n' || ch == '\r') {
        if (ch == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      } else {
        field.push_back(ch);
        field_started = true;
      }
    }
    if (quoted) throw Error(ErrorCode::kParseError, "unterminated quoted field at line " + std::to_string(line_));
    fields.push_back(std::move(field));
    return true;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline Dataset load_csv(std::istream& in, const Schema& schema,
                        const std::set<std::string>& missing_tokens = default_missing_tokens()) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CsvReader reader(std::move(text));
  std::vector<std::string> header;
  if (!reader.next(header)) throw Error(ErrorCode::kSchemaMismatch, "missing header row");
  for (auto& h : header) h = std::string(trim(h));

  std::set<std::string> seen;
  std::optional<std::string> label;
  for (const auto& h : header) {
    if (!seen.insert(h).second) throw Error(ErrorCode::kSchemaMismatch, "duplicate header '" + h + "'");
    const auto it = schema.columns.find(h);
    if (it == schema.columns.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "column '" + h + "' is not declared in the schema");
    }
    if (it->second.is_label) label = h;
  }
  for (const auto& [name, _] : schema.columns) {
    if (!seen.contains(name)) {
      throw Error(ErrorCode::kSchemaMismatch, "declared column '" + name + "' is absent from the header");
    }
  }

  const std::size_t n_cols = header.size();
  std::vector<std::vector<double>> numbers(n_cols);
  std::vector<std::vector<std::string>> strings(n_cols);
  std::vector<std::vector<std::uint8_t>> masks(n_cols);
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    if (n_cols > 1 && fields.size() == 1 && fields[0].empty()) continue;  // blank line
    ++row;
    if (fields.size() != n_cols) {
      throw Error(ErrorCode::kRaggedRows, "row " + std::to_string(row) + " has " +
                                              std::to_string(fields.size()) + " fields, expected " +
                                              std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      const bool is_missing = missing_tokens.contains(fields[c]);
      masks[c].push_back(is_missing ? 1 : 0);
      const ColumnSchema& cs = schema.columns.at(header[c]);
      if (cs.kind == ColumnKind::kNumeric) {
        double v = 0.0;
        if (!is_missing) {
          const auto sv = trim(fields[c]);
          const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
          if (ec != std::errc() || ptr != sv.data() + sv.size() || sv.empty()) {
            throw Error(ErrorCode::kParseError, "row " + std::to_string(row) + ", column '" +
                                                    header[c] + "': cannot parse '" + fields[c] +
                                                    "' as a number");
          }
        }
        numbers[c].push_back(v);
      } else {
        strings[c].push_back(is_missing ? std::string() : std::move(fields[c]));
      }
    }
  }

  std::vector<Column> columns;
  columns.reserve(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (schema.columns.at(header[c]).kind == ColumnKind::kNumeric) {
      columns.push_back(Column::numeric(header[c], std::move(numbers[c]), std::move(masks[c])));
    } else {
      columns.push_back(Column::categorical_from_strings(header[c], strings[c], std::move(masks[c])));
    }
  }
  return Dataset(std::move(columns), label);
}

inline Dataset load_csv_file(const std::string& path, const Schema& schema,
                             const std::set<std::string>& missing_tokens = default_missing_tokens()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return load_csv(in, schema, missing_tokens);
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace fairmiss

#endif  // FAIRMISS_CSV_HPP
