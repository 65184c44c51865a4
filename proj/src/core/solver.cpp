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

#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "csv.hpp"
#include "error.hpp"
#include "log.hpp"

namespace lodem {

double ProxPoisson(double x, double b, double eta, double tau) {
  if (!(b >= 0.0) || !(eta > 0.0) || !(tau > 0.0)) {
    Fail(ErrorKind::kArgument, "prox needs b >= 0, eta > 0, tau > 0");
  }
  const double shifted = x - tau * eta;
  if (b == 0.0) return std::max(0.0, shifted);
  // Positive root of u^2 - shifted u - tau b = 0, written to avoid
  // cancellation when shifted is large and negative.
  const double disc = std::sqrt(shifted * shifted + 4.0 * tau * b);
  return shifted >= 0.0 ? 0.5 * (shifted + disc)
                        : 2.0 * tau * b / (disc - shifted);
}

double ProxPoissonConsistent(double x, double b, double eta, double tau) {
  return std::max(b, ProxPoisson(x, b, eta, tau));
}

double ProxTvDual(double y, double gamma_tv) {
  return std::clamp(y, -gamma_tv, gamma_tv);
}

namespace {

using LinearMap =
    std::function<void(std::span<const double>, std::span<double>)>;

// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
// bisection. `off` holds the sub-diagonal, one shorter than `diag`.
double TridiagonalMax(const std::vector<double>& diag,
                      const std::vector<double>& off) {
  const std::size_t k = diag.size();
  double lo = diag[0], hi = diag[0];
  for (std::size_t i = 0; i < k; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                     (i + 1 < k ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  // Number of eigenvalues below x.
  auto below = [&](double x) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      d = diag[i] - x - (i > 0 ? b2 / d : 0.0);
      if (d == 0.0) d = -1e-300;
      if (d < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) < k ? lo : hi) = mid;
  }
  return hi;
}

// Largest eigenvalue of a symmetric positive semidefinite map: Lanczos on the
// power sequence of a random start vector, stopped when the top Ritz value
// changes by less than 1e-6 relative or after 200 products.
double PowerIteration(std::size_t n, const LinearMap& apply,
                      std::uint64_t seed) {
  if (n == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> v(n), v_prev(n, 0.0), w(n);
  for (auto& x : v) x = unif(rng);
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  const double nv = std::sqrt(dot(v, v));
  for (auto& x : v) x /= nv;
  std::vector<double> alpha, beta;
  double theta = 0.0;
  for (int it = 0; it < 200; ++it) {
    apply(v, w);
    const double a = dot(w, v);
    const double b_prev = beta.empty() ? 0.0 : beta.back();
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * v[i] + b_prev * v_prev[i];
    alpha.push_back(a);
    const double prev = theta;
    theta = TridiagonalMax(alpha, beta);
    if (it > 0 && std::abs(theta - prev) < 1e-6 * theta) break;
    const double b = std::sqrt(dot(w, w));
    if (b <= 1e-14 * std::max(theta, 1e-300)) break;  // invariant subspace
    beta.push_back(b);
    v_prev.swap(v);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / b;
  }
  return std::max(theta, 0.0);
}

}  // namespace

double OperatorNorm(const SupportOperators& ops, std::uint64_t seed) {
  if (ops.tv_rows() == 0) return 0.0;
  std::vector<double> y(ops.tv_rows());
  const double lambda = PowerIteration(
      ops.size(),
      [&](std::span<const double> v, std::span<double> out) {
        ops.ApplyTv(v, y);
        ops.ApplyTvAdjoint(y, out);
      },
      seed);
  return std::sqrt(lambda);
}

double SmoothLipschitz(const SupportOperators& ops, const Weights& w,
                       std::uint64_t seed) {
  if (w.tc == 0.0 && w.k == 0.0) return 0.0;
  return PowerIteration(
      ops.size(),
      [&](std::span<const double> v, std::span<double> out) {
        ops.SmoothHessian(v, w, out);
      },
      seed + 1);
}

double SolverEta(const LodTensor& b, const CountObservations& obs) {
  if (b.nnz() == 0) return 0.0;
  return PenetrationRate(b, obs);
}

double WeightedObjective(const SupportOperators& ops, std::span<const double> q,
                         std::span<const double> b, double eta,
                         const Weights& w) {
  double f = 0.0;
  if (w.tc > 0) f += w.tc * ops.CountTerm(q);
  if (w.p > 0) f += w.p * ops.PoissonSum(q, b, eta);
  if (w.k > 0) f += w.k * ops.KirchhoffTerm(q);
  if (w.tv > 0) f += w.tv * ops.TvTerm(q);
  if (w.c > 0) {
    for (std::size_t x = 0; x < q.size(); ++x) {
      if (q[x] < b[x]) return std::numeric_limits<double>::infinity();
    }
  }
  return f;
}

SolverResult EstimateLodm(const Network& net, const LodTensor& b,
                          const CountObservations& obs,
                          const SimilarityOperator& similarity,
                          const SolverConfig& config) {
  config.weights.Validate();
  if (config.weights.AllZero()) Fail(ErrorKind::kConfig, "objective empty");
  const double eta = SolverEta(b, obs);
  auto support = BuildSupport(net, b, config.support);
  return EstimateOnSupport(net, b, obs, similarity, std::move(support), eta,
                           config);
}

SolverResult EstimateOnSupport(const Network& net, const LodTensor& b,
                               const CountObservations& obs,
                               const SimilarityOperator& similarity,
                               std::vector<TensorKey> support, double eta,
                               const SolverConfig& config) {
  const Weights& w = config.weights;
  w.Validate();
  if (w.AllZero()) Fail(ErrorKind::kConfig, "objective empty");
  if (!(config.rms_tolerance > 0.0)) {
    Fail(ErrorKind::kConfig, "rms tolerance must be positive");
  }
  if (config.check_interval == 0) {
    Fail(ErrorKind::kConfig, "check interval must be positive");
  }
  if (b.nnz() > 0 && !(eta > 0.0)) {
    Fail(ErrorKind::kNumeric, "penetration rate is zero but B is not empty");
  }

  SupportOperators ops(std::move(support), net, similarity, obs);
  const std::size_t n = ops.size();
  const std::vector<double> bv = ops.Gather(b);
  for (const auto& e : b.entries()) {
    if (ops.Find(e.key) == SupportOperators::kNone) {
      Fail(ErrorKind::kArgument, "support does not contain B's support");
    }
  }

  SolverResult result;
  result.eta = eta;
  result.support_size = n;
  const bool use_tv = w.tv > 0.0 && ops.tv_rows() > 0;
  result.tv_norm = use_tv ? OperatorNorm(ops, config.seed) : 0.0;
  result.lipschitz = SmoothLipschitz(ops, w, config.seed);
  const double knorm = result.tv_norm;
  const double lip = result.lipschitz;

  double sigma = config.sigma.value_or(knorm > 0.0 ? 1.0 / knorm : 1.0);
  double tau;
  if (config.tau) {
    tau = *config.tau;
  } else {
    const double denom = sigma * knorm * knorm + 0.5 * lip;
    tau = denom > 0.0 ? 0.9 / denom : 1.0;
  }
  if (!(tau > 0.0) || !(sigma > 0.0)) {
    Fail(ErrorKind::kConfig, "step sizes must be positive");
  }
  if (1.0 / tau - sigma * knorm * knorm < 0.5 * lip) {
    Fail(ErrorKind::kConfig,
         "step sizes violate 1/tau - sigma ||K||^2 >= L/2");
  }
  result.tau = tau;
  result.sigma = sigma;

  std::vector<double> q(n, 0.0);
  if (eta > 0.0) {
    for (std::size_t x = 0; x < n; ++x) q[x] = bv[x] / eta;
  }
  result.initial_objective = WeightedObjective(ops, q, bv, eta, w);

  auto record = [&](std::size_t iteration, double rms) {
    TraceRow row;
    row.iteration = iteration;
    row.f_tc = ops.CountTerm(q);
    row.f_p = ops.PoissonSum(q, bv, eta);
    row.f_k = ops.KirchhoffTerm(q);
    row.f_tv = ops.TvTerm(q);
    for (std::size_t x = 0; x < n; ++x) row.violations += q[x] < bv[x];
    row.rms_step = rms;
    result.trace.push_back(row);
  };
  record(0, std::numeric_limits<double>::quiet_NaN());

  const double tau_p = tau * w.p;
  const bool consistency = w.c > 0.0;
  std::vector<double> grad(n), adj(n, 0.0), q_prev(n), q_check(q);
  std::vector<double> y(use_tv ? ops.tv_rows() : 0, 0.0);
  std::vector<double> ky(y.size()), bar(use_tv ? n : 0);

  std::size_t it = 0;
  while (it < config.max_iterations) {
    ++it;
    ops.SmoothGradient(q, w, grad);
    if (use_tv) ops.ApplyTvAdjoint(y, adj);
    q_prev = q;
    for (std::size_t x = 0; x < n; ++x) {
      const double v = q[x] - tau * (grad[x] + adj[x]);
      const double lower = consistency ? bv[x] : 0.0;
      if (tau_p > 0.0 && eta > 0.0) {
        q[x] = std::max(lower, ProxPoisson(v, bv[x], eta, tau_p));
      } else {
        q[x] = std::max(lower, v);
      }
    }
    if (use_tv) {
      for (std::size_t x = 0; x < n; ++x) bar[x] = 2.0 * q[x] - q_prev[x];
      ops.ApplyTv(bar, ky);
      for (std::size_t p = 0; p < y.size(); ++p) {
        y[p] = ProxTvDual(y[p] + sigma * ky[p], w.tv);
      }
    }
    if (it % config.check_interval == 0 || it == config.max_iterations) {
      double ss = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        const double d = q[x] - q_check[x];
        ss += d * d;
      }
      const double rms = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
      record(it, rms);
      q_check = q;
      log::Debug("iteration " + std::to_string(it) + " rms " +
                 std::to_string(rms));
      if (it % config.check_interval == 0 && rms < config.rms_tolerance) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = it;
  result.final_objective = WeightedObjective(ops, q, bv, eta, w);
  result.estimate = ops.Scatter(q);
  if (!result.converged) {
    log::Warn("solver stopped at the iteration limit without converging");
  }
  log::Info("solver: " + std::to_string(it) + " iterations, objective " +
            std::to_string(result.initial_objective) + " -> " +
            std::to_string(result.final_objective));
  return result;
}

void WriteTrace(const std::vector<TraceRow>& trace,
                const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << "iteration,f_tc,f_p,f_k,f_tv,violations,rms_step\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << csv::FormatDouble(r.f_tc) << ','
        << csv::FormatDouble(r.f_p) << ',' << csv::FormatDouble(r.f_k) << ','
        << csv::FormatDouble(r.f_tv) << ',' << r.violations << ','
        << (std::isnan(r.rms_step) ? std::string() : csv::FormatDouble(r.rms_step))
        << '\n';
  }
}

}  // namespace lodem
