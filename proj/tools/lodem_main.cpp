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

// lodem simplify|match|estimate|simulate|evaluate --config FILE [--set k=v]...
// lodem keys

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lodem/lodem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitInputError = 2;

int Report(lodem_status status) {
  if (status == LODEM_OK) return kExitOk;
  std::fprintf(stderr, "lodem: %s: %s\n", lodem_status_name(status),
               lodem_last_error());
  return status == LODEM_NOT_CONVERGED ? kExitNotConverged : kExitInputError;
}

int Run(const std::string& command, const std::string& config_path,
        const std::vector<std::string>& overrides) {
  lodem_config* config = nullptr;
  lodem_status status = config_path.empty()
                            ? lodem_config_new(&config)
                            : lodem_config_load(config_path.c_str(), &config);
  for (const auto& o : overrides) {
    if (status != LODEM_OK) break;
    status = lodem_config_set(config, o.c_str());
  }
  if (status == LODEM_OK) status = lodem_run(command.c_str(), config);
  lodem_config_free(config);
  return Report(status);
}

void PrintKeys() {
  for (size_t i = 0; i < lodem_config_key_count(); ++i) {
    const char *name, *def, *help;
    lodem_config_key(i, &name, &def, &help);
    std::printf("%-20s %-8s %s\n", name, *def ? def : "-", help);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOD tensor estimation from link counts and Bluetooth trips"};
  app.set_version_flag("--version", std::string(lodem_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"simplify", "filter, contract and attach scanners to a road network"},
      {"match", "turn detection logs into trips and the sampled tensor"},
      {"estimate", "solve for the LOD tensor"},
      {"simulate", "write a synthetic instance with ground truth"},
      {"evaluate", "compare estimates against baselines and ground truth"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override keys, key=value ...")
        ->allow_extra_args(true);
  }
  app.add_subcommand("keys", "list configuration keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }
  auto* chosen = app.get_subcommands().front();
  if (chosen->get_name() == "keys") {
    PrintKeys();
    return kExitOk;
  }
  return Run(chosen->get_name(), config_path, overrides);
}
