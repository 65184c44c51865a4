// Copyright 2026 The lodem Authors
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

#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace lodem::csv {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(Trim(text.substr(start)));
      return out;
    }
    out.emplace_back(Trim(text.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string Join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

Table Table::Read(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str(), path.string(), expected_header);
}

Table Table::Parse(std::string_view text, const std::string& source_name,
                   const std::vector<std::string>& expected_header) {
  Table table;
  table.source_ = source_name;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  // Strip a UTF-8 byte order mark.
  if (text.substr(0, 3) == "\xEF\xBB\xBF") start = 3;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto fields = Split(line, ',');
    if (!header_seen) {
      if (fields != expected_header) {
        Fail(ErrorKind::kParse, source_name + ":" + std::to_string(line_no) +
                                    ": expected header '" +
                                    Join(expected_header, ',') + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != expected_header.size()) {
      Fail(ErrorKind::kParse, source_name + ":" + std::to_string(line_no) +
                                  ": expected " +
                                  std::to_string(expected_header.size()) +
                                  " fields, got " +
                                  std::to_string(fields.size()));
    }
    table.rows_.push_back(Row{line_no, std::move(fields)});
  }
  if (!header_seen) {
    Fail(ErrorKind::kParse, source_name + ": missing header row");
  }
  return table;
}

void Table::FailAt(const Row& row, const std::string& what) const {
  Fail(ErrorKind::kParse,
       source_ + ":" + std::to_string(row.line) + ": " + what);
}

double Table::Double(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    FailAt(row, "not a number: '" + s + "'");
  }
  return value;
}

std::int64_t Table::Int(const Row& row, std::size_t col) const {
  const std::string& s = row.fields.at(col);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    FailAt(row, "not an integer: '" + s + "'");
  }
  return value;
}

std::string FormatDouble(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace lodem::csv
