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

// Objective of the link-origin-destination estimation problem:
//
//   gamma_tc * f_tc   squared misfit to traffic counts on measured links
//   gamma_p  * f_p    Poisson negative log-likelihood of the Bluetooth sample
//   gamma_c  * f_c    indicator of Q >= B
//   gamma_k  * f_k    squared per-OD flow-conservation residuals
//   gamma_tv * f_tv   weighted l1 differences between similar scanners
//
// Every term is evaluated on a finite support of (origin, destination, link)
// entries; entries outside it are exactly zero.

#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "graph.hpp"
#include "network.hpp"
#include "tensor.hpp"

namespace lodem {

struct Weights {
  double tc = 17.78;
  double p = 1.0;
  double c = 1.0;  // in [0, 1]; any positive value enforces Q >= B
  double k = 0.0128;
  double tv = 0.0212;

  // Throws kConfig on negative weights or c > 1.
  void Validate() const;
  bool AllZero() const;
};

// Aggregate penetration rate: Bluetooth volume over counted volume, both
// restricted to measured links. Throws kNumeric when no traffic is counted.
double PenetrationRate(const LodTensor& b, const CountObservations& obs);

// q(l) = sum over OD pairs of Q[i,j,l].
std::vector<double> LinkVolumes(const LodTensor& q);

enum class OdSide { kOrigin, kDestination };

// Dense N_S x N_S row-major OD table: flow leaving the origin scanner node
// (origin side) or entering the destination scanner node (destination side).
std::vector<double> OdMatrix(const LodTensor& q, const Network& net,
                             OdSide side);

struct Totals {
  double by_origin = 0.0;
  double by_destination = 0.0;
};
Totals VehicleTotals(const LodTensor& q, const Network& net);

// psi(b, eta*q) summed per entry, +inf outside the domain.
double PoissonTerm(double b, double eta, double q);

struct ObjectiveReport {
  double f_tc = 0.0;
  double f_p = 0.0;  // +inf when Q = 0 where B > 0
  double f_k = 0.0;
  double f_tv = 0.0;
  std::size_t f_c_violations = 0;
  double n_or = 0.0;
  double n_dest = 0.0;
  double eta = 0.0;
  double total_weighted = 0.0;
};

std::string ReportToJson(const ObjectiveReport& report);
void WriteReport(const ObjectiveReport& report,
                 const std::filesystem::path& path);

// Support construction.
struct SupportOptions {
  std::size_t k_paths = 3;
  bool full = false;  // every link for every OD pair
};

std::vector<TensorKey> BuildSupport(const Network& net, const LodTensor& b,
                                    const SupportOptions& options);

// Linear operators of the objective restricted to a support.
class SupportOperators {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // `keys` must be sorted and unique.
  SupportOperators(std::vector<TensorKey> keys, const Network& net,
                   const SimilarityOperator& similarity,
                   const CountObservations& obs);

  std::size_t size() const { return keys_.size(); }
  const std::vector<TensorKey>& keys() const { return keys_; }
  std::size_t Find(const TensorKey& key) const;  // kNone when absent

  std::vector<double> Gather(const LodTensor& t) const;
  LodTensor Scatter(std::span<const double> values) const;

  double CountTerm(std::span<const double> q) const;
  double KirchhoffTerm(std::span<const double> q) const;
  double TvTerm(std::span<const double> q) const;
  double PoissonSum(std::span<const double> q, std::span<const double> b,
                    double eta) const;

  // out = gamma_tc * grad f_tc + gamma_k * grad f_k.
  void SmoothGradient(std::span<const double> q, const Weights& w,
                      std::span<double> out) const;
  // out = Hessian of the smooth block applied to v.
  void SmoothHessian(std::span<const double> v, const Weights& w,
                     std::span<double> out) const;

  // Stacked total-variation differences, one row per (similar pair, shared
  // index) combination: y = K q, and its adjoint.
  std::size_t tv_rows() const { return tv_pairs_.size(); }
  void ApplyTv(std::span<const double> q, std::span<double> y) const;
  void ApplyTvAdjoint(std::span<const double> y, std::span<double> out) const;

 private:
  struct OdRange {
    std::size_t begin, end;
    std::size_t slot_begin, slot_end;
  };
  struct TvPair {
    std::size_t minus, plus;  // entry indices, kNone when outside support
    double weight;
  };

  void Residuals(std::span<const double> q, std::vector<double>& r) const;

  std::vector<TensorKey> keys_;
  std::vector<char> link_mask_;
  std::vector<double> link_counts_;
  std::vector<OdRange> ods_;
  std::vector<std::size_t> head_slot_, tail_slot_;
  std::size_t slot_count_ = 0;
  std::vector<TvPair> tv_pairs_;
  std::size_t link_count_ = 0;
  std::size_t scanner_count_ = 0;
};

ObjectiveReport EvalObjective(const LodTensor& q, const LodTensor& b,
                              const CountObservations& obs, const Network& net,
                              const SimilarityOperator& similarity, double eta,
                              const Weights& w);

}  // namespace lodem
