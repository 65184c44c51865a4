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

// One function per subcommand. Each reads its inputs from the config, writes
// its outputs under out_dir and throws lodem::Error on bad input.

#pragma once

#include <string_view>

#include "config.hpp"

namespace lodem {

enum class RunStatus { kOk = 0, kNotConverged = 1 };

RunStatus RunSimplify(const RunConfig& config);
RunStatus RunMatch(const RunConfig& config);
RunStatus RunEstimate(const RunConfig& config);
RunStatus RunSimulate(const RunConfig& config);
RunStatus RunEvaluate(const RunConfig& config);

// Dispatches on "simplify", "match", "estimate", "simulate" or "evaluate".
RunStatus RunCommand(std::string_view command, const RunConfig& config);

}  // namespace lodem
