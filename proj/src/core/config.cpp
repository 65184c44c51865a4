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

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace lodem {

namespace {

using enum KeyType;

const KeySpec* FindKey(std::string_view name) {
  const auto& keys = ConfigKeys();
  auto it = std::find_if(keys.begin(), keys.end(),
                         [&](const KeySpec& k) { return k.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  Fail(ErrorKind::kConfig, "config key '" + std::string(key) + "': '" +
                               std::string(value) + "' is not " +
                               std::string(expected));
}

std::int64_t ParseInt(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(key, v, "an integer");
  }
  return out;
}

double ParseReal(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    BadValue(key, v, "a finite number");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  BadValue(key, v, "a boolean");
}

}  // namespace

const std::vector<KeySpec>& ConfigKeys() {
  static const std::vector<KeySpec> keys = {
      {"seed", kInt, "1", "seed for every random stream"},
      {"out_dir", kPath, ".", "directory receiving all outputs"},
      {"nodes", kPath, "", "nodes.csv"},
      {"links", kPath, "", "links.csv"},
      {"scanners", kPath, "", "scanners.csv"},
      {"counts", kPath, "", "counts.csv (link_id,count)"},
      {"detections", kPath, "", "detections.csv"},
      {"bluetooth", kPath, "", "sampled tensor B"},
      {"estimate", kPath, "", "estimated tensor"},
      {"truth", kPath, "", "ground-truth tensor"},
      {"road_classes", kString, "", "comma-separated classes to keep; empty keeps all"},
      {"gap_s", kInt, "3600", "trip split gap in seconds"},
      {"window_start", kInt, "", "first trip start kept (unix seconds)"},
      {"window_end", kInt, "", "trip starts before this are kept (unix seconds)"},
      {"gamma_tc", kReal, "17.78", "count fit weight"},
      {"gamma_p", kReal, "1", "Poisson likelihood weight"},
      {"gamma_c", kReal, "1", "consistency weight in [0, 1]"},
      {"gamma_k", kReal, "0.0128", "conservation weight"},
      {"gamma_tv", kReal, "0.0212", "total variation weight"},
      {"k_paths", kInt, "3", "shortest paths per OD pair in the support"},
      {"full_support", kBool, "false", "every link for every OD pair"},
      {"rms_tol", kReal, "1e-3", "stopping threshold on the RMS step"},
      {"max_iter", kInt, "50000", "iteration limit"},
      {"check_interval", kInt, "50", "iterations between stopping checks"},
      {"tau", kReal, "", "primal step; automatic when unset"},
      {"sigma", kReal, "", "dual step; automatic when unset"},
      {"d0_m", kReal, "300", "similarity decay distance"},
      {"similarity_cutoff_m", kReal, "300", "largest distance of similar scanners"},
      {"sim_nodes", kInt, "50", "synthetic network size"},
      {"sim_degree", kReal, "6", "synthetic average out-degree"},
      {"sim_extent_m", kReal, "3000", "side of the synthetic square"},
      {"sim_users", kInt, "10000", "synthetic number of trips"},
      {"rate_low", kReal, "0.05", "lowest per-OD penetration rate"},
      {"rate_high", kReal, "0.4", "highest per-OD penetration rate"},
      {"coverage", kReal, "0.36", "fraction of links with counts"},
      {"noise_sigma", kReal, "0", "count noise standard deviation"},
      {"top_n", kInt, "20", "OD flows kept in a link slice; 0 keeps all"},
      {"slice_link", kInt, "", "link id to export the OD slice of"},
      {"slice_origin", kInt, "", "origin scanner id of the exported OD slice"},
      {"slice_destination", kInt, "", "destination scanner id of the exported OD slice"},
  };
  return keys;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.parent_path());
}

RunConfig RunConfig::Parse(std::string_view text,
                           const std::filesystem::path& base_dir) {
  RunConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorKind::kConfig, "config line " + std::to_string(line_no) +
                                   ": expected key=value");
    }
    config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)), base_dir);
  }
  return config;
}

void RunConfig::Set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    Fail(ErrorKind::kConfig,
         "override '" + std::string(assignment) + "' is not key=value");
  }
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void RunConfig::Set(std::string_view key, std::string_view value,
                    const std::filesystem::path& base_dir) {
  const KeySpec* spec = FindKey(key);
  if (!spec) Fail(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
  std::string stored(value);
  switch (spec->type) {
    case kInt: ParseInt(key, value); break;
    case kReal: ParseReal(key, value); break;
    case kBool: ParseBool(key, value); break;
    case kPath:
      if (!value.empty() && !base_dir.empty() &&
          std::filesystem::path(stored).is_relative()) {
        stored = (base_dir / stored).lexically_normal().string();
      }
      break;
    case kString: break;
  }
  values_.insert_or_assign(std::string(key), std::move(stored));
}

const std::string* RunConfig::Raw(std::string_view key) const {
  const KeySpec* spec = FindKey(key);
  if (!spec) Fail(ErrorKind::kArgument, "unregistered key " + std::string(key));
  if (auto it = values_.find(key); it != values_.end() && !it->second.empty()) {
    return &it->second;
  }
  if (!spec->default_value.empty()) {
    static thread_local std::string scratch;
    scratch = std::string(spec->default_value);
    return &scratch;
  }
  return nullptr;
}

bool RunConfig::Has(std::string_view key) const { return Raw(key) != nullptr; }

std::string RunConfig::String(std::string_view key) const {
  const std::string* v = Raw(key);
  return v ? *v : std::string();
}

std::filesystem::path RunConfig::Path(std::string_view key) const {
  Require({key});
  return *Raw(key);
}

std::int64_t RunConfig::Int(std::string_view key) const {
  Require({key});
  return ParseInt(key, *Raw(key));
}

double RunConfig::Real(std::string_view key) const {
  Require({key});
  return ParseReal(key, *Raw(key));
}

bool RunConfig::Bool(std::string_view key) const {
  Require({key});
  return ParseBool(key, *Raw(key));
}

std::optional<std::int64_t> RunConfig::OptionalInt(std::string_view key) const {
  if (!Has(key)) return std::nullopt;
  return Int(key);
}

std::optional<double> RunConfig::OptionalReal(std::string_view key) const {
  if (!Has(key)) return std::nullopt;
  return Real(key);
}

void RunConfig::Require(const std::vector<std::string_view>& keys) const {
  for (auto key : keys) {
    if (!Has(key)) {
      Fail(ErrorKind::kConfig, "missing config key '" + std::string(key) + "'");
    }
  }
}

void RunConfig::RequireFiles(const std::vector<std::string_view>& keys) const {
  Require(keys);
  for (auto key : keys) {
    const auto path = Path(key);
    if (!std::filesystem::is_regular_file(path)) {
      Fail(ErrorKind::kIo, "input file not found: " + path.string() + " (key '" +
                               std::string(key) + "')");
    }
  }
}

}  // namespace lodem
