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

// Flat key=value run configuration shared by every subcommand.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lodem {

enum class KeyType { kString, kPath, kInt, kReal, kBool };

struct KeySpec {
  std::string_view name;
  KeyType type;
  std::string_view default_value;  // empty: unset unless given
  std::string_view help;
};

const std::vector<KeySpec>& ConfigKeys();

class RunConfig {
 public:
  // Lines are `key = value`; `#` starts a comment. Relative paths are
  // resolved against the directory holding the file.
  static RunConfig Load(const std::filesystem::path& path);
  static RunConfig Parse(std::string_view text,
                         const std::filesystem::path& base_dir = {});

  // `key=value`; relative paths stay relative to the working directory.
  void Set(std::string_view assignment);
  void Set(std::string_view key, std::string_view value,
           const std::filesystem::path& base_dir = {});

  bool Has(std::string_view key) const;
  std::string String(std::string_view key) const;
  std::filesystem::path Path(std::string_view key) const;
  std::int64_t Int(std::string_view key) const;
  double Real(std::string_view key) const;
  bool Bool(std::string_view key) const;

  std::optional<std::int64_t> OptionalInt(std::string_view key) const;
  std::optional<double> OptionalReal(std::string_view key) const;

  // Throws kConfig naming the first key that is unset.
  void Require(const std::vector<std::string_view>& keys) const;
  // Throws kConfig when a required path key does not name an existing file.
  void RequireFiles(const std::vector<std::string_view>& keys) const;

 private:
  const std::string* Raw(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace lodem
