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

// Minimal reader/writer for the comma-separated tables used by every
// pipeline stage. Fields never contain quotes or embedded commas; list-valued
// fields use ';' as separator.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace lodem::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

class Table {
 public:
  // Throws kIo when the file cannot be opened and kParse when the header is
  // missing or a row has the wrong number of fields.
  static Table Read(const std::filesystem::path& path,
                    const std::vector<std::string>& expected_header);
  static Table Parse(std::string_view text, const std::string& source_name,
                     const std::vector<std::string>& expected_header);

  const std::vector<Row>& rows() const { return rows_; }
  const std::string& source() const { return source_; }

  [[noreturn]] void FailAt(const Row& row, const std::string& what) const;
  double Double(const Row& row, std::size_t col) const;
  std::int64_t Int(const Row& row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<Row> rows_;
};

std::vector<std::string> Split(std::string_view text, char sep);
std::string Join(const std::vector<std::string>& parts, char sep);

// Shortest representation that round-trips exactly.
std::string FormatDouble(double value);

// Opens `path` for writing, creating parent directories. Throws kIo.
std::ofstream OpenForWrite(const std::filesystem::path& path);

}  // namespace lodem::csv
