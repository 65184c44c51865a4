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

// Baselines, error metrics and comparison reports.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "network.hpp"
#include "tensor.hpp"

namespace lodem {

// Uniform expansion B / eta. Throws kNumeric when eta is not positive.
LodTensor NaiveSolution(const LodTensor& b, double eta);

// Over the union of nonzero entries. Throws kArgument when the union is
// empty or the index spaces differ.
double Rmse(const LodTensor& estimate, const LodTensor& truth);

struct OdFlow {
  std::size_t origin = 0;
  std::size_t destination = 0;
  double value = 0.0;
};

// Largest flows first; top_n == 0 keeps all. Throws kArgument on a bad link.
std::vector<OdFlow> ExtractLinkOd(const LodTensor& q, std::size_t link,
                                  std::size_t top_n = 20);

struct LinkFlow {
  std::size_t link = 0;
  double value = 0.0;
};

std::vector<LinkFlow> ExtractOdLinks(const LodTensor& q, std::size_t origin,
                                     std::size_t destination);

struct ComparisonRow {
  std::string label;
  std::optional<Weights> weights;
  double f_tc = 0.0;
  double f_k = 0.0;
  double f_p = 0.0;
  double f_tv = 0.0;
  double n_or = 0.0;
  double n_dest = 0.0;
  std::optional<double> rmse;
};

ComparisonRow MakeRow(std::string label, const ObjectiveReport& report,
                      std::optional<Weights> weights = std::nullopt,
                      std::optional<double> rmse = std::nullopt);

void WriteComparison(const std::vector<ComparisonRow>& rows,
                     const std::filesystem::path& path);

}  // namespace lodem
