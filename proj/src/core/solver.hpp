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

// Primal-dual proximal splitting for the LOD estimation objective.
//
// The objective is split three ways:
//   smooth   gamma_tc f_tc + gamma_k f_k           explicit gradient step
//   proximal gamma_p f_p + iota(Q >= B)             closed-form per entry
//   dual     gamma_tv ||K Q||_1                     dual ascent, clipped
//
//   Q+ = prox_{tau G}(Q - tau (grad F(Q) + K^T y))
//   y+ = clip(y + sigma K (2 Q+ - Q), -gamma_tv, gamma_tv)
//
// which converges when 1/tau - sigma ||K||^2 >= L/2, L the Lipschitz constant
// of grad F.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "model.hpp"
#include "network.hpp"
#include "tensor.hpp"

namespace lodem {

struct SolverConfig {
  Weights weights;
  std::size_t max_iterations = 50000;
  double rms_tolerance = 1e-3;
  std::optional<double> tau;    // auto when unset
  std::optional<double> sigma;  // auto when unset
  SupportOptions support;
  std::size_t check_interval = 50;
  std::uint64_t seed = 1;  // power-iteration start vectors
};

// argmin_{u >= 0} (u - x)^2 / (2 tau) + (eta u - b log(eta u)).
// Throws kArgument for b < 0, eta <= 0 or tau <= 0.
double ProxPoisson(double x, double b, double eta, double tau);

// argmin_{u >= b} (u - x)^2 / (2 tau) + (eta u - b log(eta u)).
// Throws kArgument for b < 0, eta <= 0 or tau <= 0.
double ProxPoissonConsistent(double x, double b, double eta, double tau);

// Proximal map of the conjugate of gamma_tv |.|: clip to [-gamma_tv, gamma_tv].
double ProxTvDual(double y, double gamma_tv);

// Spectral norm of the stacked total-variation operator on a support, by
// power iteration (relative change < 1e-6 or 200 iterations). 0 when empty.
double OperatorNorm(const SupportOperators& ops, std::uint64_t seed);

// Largest eigenvalue of the smooth block's Hessian, by power iteration.
double SmoothLipschitz(const SupportOperators& ops, const Weights& w,
                       std::uint64_t seed);

struct TraceRow {
  std::size_t iteration = 0;
  double f_tc = 0, f_p = 0, f_k = 0, f_tv = 0;
  std::size_t violations = 0;
  double rms_step = 0;  // NaN on the initial row
};

struct SolverResult {
  LodTensor estimate;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::size_t iterations = 0;
  double eta = 0;
  double tau = 0;
  double sigma = 0;
  double tv_norm = 0;
  double lipschitz = 0;
  double initial_objective = 0;  // weighted, at Q = B / eta
  double final_objective = 0;
  std::size_t support_size = 0;
};

// Penetration rate used by the solver: zero when B is empty, otherwise the
// measured-link ratio (which requires counted traffic).
double SolverEta(const LodTensor& b, const CountObservations& obs);

SolverResult EstimateLodm(const Network& net, const LodTensor& b,
                          const CountObservations& obs,
                          const SimilarityOperator& similarity,
                          const SolverConfig& config);

// Same, on an explicit support (sorted, unique, containing B's support).
SolverResult EstimateOnSupport(const Network& net, const LodTensor& b,
                               const CountObservations& obs,
                               const SimilarityOperator& similarity,
                               std::vector<TensorKey> support, double eta,
                               const SolverConfig& config);

// Weighted objective on a support, as minimized by the solver.
double WeightedObjective(const SupportOperators& ops, std::span<const double> q,
                         std::span<const double> b, double eta,
                         const Weights& w);

void WriteTrace(const std::vector<TraceRow>& trace,
                const std::filesystem::path& path);

}  // namespace lodem
