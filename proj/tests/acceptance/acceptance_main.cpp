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

// Acceptance suite. One line per criterion:
//   PASS|FAIL  <number>  <name>: <measurements>
// Usage: lodem_acceptance <path to lodem cli> <fixtures dir> [criterion...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "eval.hpp"
#include "fixtures.hpp"
#include "model.hpp"
#include "solver.hpp"

namespace {

using namespace lodem;
using namespace lodem::testing;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

// Weights used for the synthetic protocol, fixed on seeds 101-110 before
// these seeds were evaluated.
Weights SyntheticWeights() {
  Weights w;
  w.tc = 100.0;
  w.p = 0.1;
  w.c = 1.0;
  w.k = 100.0;
  w.tv = 0.0212;
  return w;
}

struct RunRecord {
  SolverResult result;
  std::size_t violations = 0;
  double initial_weighted = 0.0;
  double final_weighted = 0.0;
  double tolerance = 0.0;
  std::size_t check_interval = 0;
};
std::vector<RunRecord> g_runs;  // shared with criterion 5

SolverResult Solve(const Instance& inst, const SolverConfig& cfg) {
  SolverResult r = EstimateLodm(inst.net, inst.b, inst.obs, inst.similarity, cfg);
  RunRecord rec;
  for (const auto& e : inst.b.entries()) rec.violations += r.estimate.At(e.key) < e.value;
  rec.initial_weighted = r.initial_objective;
  rec.final_weighted =
      EvalObjective(r.estimate, inst.b, inst.obs, inst.net, inst.similarity,
                    r.eta, cfg.weights)
          .total_weighted;
  rec.tolerance = cfg.rms_tolerance;
  rec.check_interval = cfg.check_interval;
  rec.result = r;
  g_runs.push_back(std::move(rec));
  return r;
}

Outcome SyntheticRecovery() {
  std::vector<double> rmse_hat, rmse_naive;
  int closer = 0;
  double worst_time = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    Instance inst = CoLocatedInstance(seed, 50, 6.0, 10000, 3000.0, 0.36, 0.0);
    SolverConfig cfg;
    cfg.weights = SyntheticWeights();
    SolverResult r = Solve(inst, cfg);
    const LodTensor naive = NaiveSolution(inst.b, r.eta);
    rmse_hat.push_back(Rmse(r.estimate, inst.truth));
    rmse_naive.push_back(Rmse(naive, inst.truth));
    const double truth = VehicleTotals(inst.truth, inst.net).by_origin;
    const double e_hat = std::abs(VehicleTotals(r.estimate, inst.net).by_origin - truth);
    const double e_naive = std::abs(VehicleTotals(naive, inst.net).by_origin - truth);
    closer += e_hat <= e_naive;
    worst_time = std::max(worst_time, Seconds(start));
  }
  const double ratio = Median(rmse_hat) / Median(rmse_naive);
  Outcome o;
  o.pass = ratio <= 0.9 && closer >= 7 && worst_time <= 600.0;
  o.detail = Fmt("median RMSE %.4f vs naive %.4f, ratio %.3f (<= 0.9); total "
                 "closer in %d/10 seeds (>= 7); slowest seed %.1f s (<= 600)",
                 Median(rmse_hat), Median(rmse_naive), ratio, closer, worst_time);
  return o;
}

Weights RandomWeights(std::mt19937_64& rng, bool consistency) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Weights w;
  w.tc = std::exp(std::log(0.1) + u(rng) * std::log(200.0));
  w.p = 0.1 + 2.0 * u(rng);
  w.c = consistency ? 1.0 : 0.0;
  w.k = std::exp(std::log(0.01) + u(rng) * std::log(500.0));
  w.tv = u(rng);
  return w;
}

Instance SmallInstance(int k) {
  return k % 2 == 0 ? CoLocatedInstance(500 + k, 4 + k % 4 / 2, 2.5, 60, 500.0, 0.5, 2.0)
                    : AttachedInstance(500 + k, 4, 2.0, 3, 60, 400.0, 0.5, 2.0);
}

Outcome OracleEquivalence() {
  double worst = 0.0;
  int bad = 0;
  std::size_t largest_links = 0, largest_scanners = 0;
  for (int k = 0; k < 20; ++k) {
    std::mt19937_64 rng(1000 + k);
    Instance inst = SmallInstance(k);
    largest_links = std::max(largest_links, inst.net.link_count());
    largest_scanners = std::max(largest_scanners, inst.net.scanner_count());
    const Weights w = RandomWeights(rng, k % 3 != 0);
    const auto keys = FullKeys(inst.net);
    const DenseProblem dense = BuildDense(inst, keys, w);
    const BarrierResult oracle = BarrierMinimize(dense);
    SolverConfig cfg;
    cfg.weights = w;
    cfg.rms_tolerance = 1e-8;
    cfg.max_iterations = 5000000;
    const SolverResult r = EstimateOnSupport(inst.net, inst.b, inst.obs,
                                             inst.similarity, keys, inst.eta, cfg);
    SupportOperators ops(keys, inst.net, inst.similarity, inst.obs);
    const double f = DenseObjective(dense, ToEigen(ops.Gather(r.estimate)));
    const double gap = std::abs(f - oracle.objective) /
                       std::max(1.0, std::abs(oracle.objective));
    if (!oracle.ok || !(gap <= 1e-3)) ++bad;
    worst = std::max(worst, std::isfinite(gap) ? gap : 1e300);
  }
  return {bad == 0 && largest_links <= 20 && largest_scanners <= 5,
          Fmt("20 instances (<= %zu scanners, <= %zu links), worst relative "
              "objective gap %.2e (<= 1e-3)",
              largest_scanners, largest_links, worst)};
}

// Root of the increasing derivative (u - x)/tau + eta - b/u by bisection.
double ProxByBisection(double x, double b, double eta, double tau) {
  auto d = [&](double u) { return (u - x) / tau + eta - (b > 0 ? b / u : 0.0); };
  double lo = b > 0 ? b : 0.0;
  if (d(lo) >= 0 || (b > 0 && lo == 0)) return lo;
  double hi = std::max(lo, x) + 1.0;
  while (d(hi) < 0) hi = 2 * hi + 1;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (d(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome ProxCorrectness() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(-100.0, 100.0), ueta(0.01, 1.0),
      ulogtau(std::log(1e-4), std::log(10.0)), u01(0.0, 1.0);
  std::uniform_int_distribution<int> ub(0, 30);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = ux(rng);
    const double b = u01(rng) < 0.2 ? 0.0 : ub(rng) + (u01(rng) < 0.5 ? u01(rng) : 0.0);
    const double eta = ueta(rng);
    const double tau = std::exp(ulogtau(rng));
    worst = std::max(worst, std::abs(ProxPoissonConsistent(x, b, eta, tau) -
                                     ProxByBisection(x, b, eta, tau)));
  }
  return {worst <= 1e-8, Fmt("1000 tuples, worst absolute error %.2e (<= 1e-8)", worst)};
}

Outcome GradientCorrectness() {
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    std::mt19937_64 rng(3000 + k);
    Instance inst = k % 2 == 0
                        ? CoLocatedInstance(800 + k, 8, 3.0, 300, 800.0, 0.5, 3.0)
                        : AttachedInstance(800 + k, 6, 2.5, 4, 200, 600.0, 0.5, 3.0);
    const Weights w = RandomWeights(rng, true);
    const auto keys = BuildSupport(inst.net, inst.b, SupportOptions{});
    SupportOperators ops(keys, inst.net, inst.similarity, inst.obs);
    const DenseProblem dense = BuildDense(inst, keys, w);
    std::uniform_real_distribution<double> uq(0.0, 20.0);
    std::vector<double> q(keys.size());
    for (double& v : q) v = uq(rng);
    std::vector<double> g(keys.size());
    ops.SmoothGradient(q, w, g);
    Eigen::VectorXd qe = ToEigen(q), fd(qe.size());
    for (long x = 0; x < qe.size(); ++x) {
      const double h = 1e-3;
      Eigen::VectorXd qp = qe, qm = qe;
      qp[x] += h;
      qm[x] -= h;
      fd[x] = (DenseSmooth(dense, qp) - DenseSmooth(dense, qm)) / (2 * h);
    }
    const double rel = (ToEigen(g) - fd).norm() / std::max(fd.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return {worst <= 1e-5, Fmt("50 instances, worst relative error %.2e (<= 1e-5)", worst)};
}

Outcome FeasibilityAndStopping() {
  // Small instances under the default weights in addition to the synthetic
  // runs above, plus one run capped before convergence.
  for (int k = 0; k < 6; ++k) {
    SolverConfig cfg;
    Solve(SmallInstance(k), cfg);
  }
  {
    SolverConfig cfg;
    cfg.weights = SyntheticWeights();
    cfg.max_iterations = 120;
    Solve(CoLocatedInstance(21, 50, 6.0, 10000, 3000.0, 0.36, 0.0), cfg);
  }
  std::size_t violations = 0, bad_stop = 0, increased = 0, converged = 0;
  for (const RunRecord& run : g_runs) {
    violations += run.violations;
    const auto& trace = run.result.trace;
    const auto& last = trace.back();
    if (run.result.converged) {
      ++converged;
      if (!(last.rms_step < run.tolerance) ||
          last.iteration % run.check_interval != 0) {
        ++bad_stop;
      }
    }
    // No earlier check point may have met the threshold.
    for (std::size_t t = 1; t + 1 < trace.size(); ++t) {
      if (trace[t].rms_step < run.tolerance) ++bad_stop;
    }
    if (!run.result.converged && last.rms_step < run.tolerance &&
        last.iteration % run.check_interval == 0) {
      ++bad_stop;
    }
    if (!(run.final_weighted <= run.initial_weighted)) ++increased;
  }
  return {violations == 0 && bad_stop == 0 && increased == 0,
          Fmt("%zu runs (%zu converged): %zu Q >= B violations, %zu stopping "
              "rule breaches, %zu runs ending above the start objective",
              g_runs.size(), converged, violations, bad_stop, increased)};
}

Outcome KirchhoffResponse() {
  int ok = 0;
  std::string values;
  for (std::uint64_t seed : {1, 2, 3}) {
    Instance inst = CoLocatedInstance(seed, 50, 6.0, 10000, 3000.0, 0.36, 0.0);
    double fk[2];
    for (int i = 0; i < 2; ++i) {
      SolverConfig cfg;
      cfg.weights.k *= i == 0 ? 1.0 : 10.0;
      const SolverResult r = Solve(inst, cfg);
      fk[i] = EvalObjective(r.estimate, inst.b, inst.obs, inst.net,
                            inst.similarity, r.eta, cfg.weights)
                  .f_k;
    }
    ok += fk[1] <= fk[0];
    values += Fmt(" %.4g->%.4g", fk[0], fk[1]);
  }
  return {ok == 3, "f_K at gamma_K and 10 gamma_K on 3 instances:" + values};
}

bool SameGraph(const RoadGraph& a, const RoadGraph& b) {
  if (a.node_count() != b.node_count() || a.link_count() != b.link_count()) return false;
  for (std::size_t i = 0; i < a.node_count(); ++i)
    if (a.node(i).id != b.node(i).id) return false;
  for (std::size_t i = 0; i < a.link_count(); ++i) {
    const Link &x = a.link(i), &y = b.link(i);
    if (x.id != y.id || a.node(x.tail).id != b.node(y.tail).id ||
        a.node(x.head).id != b.node(y.head).id || x.length_m != y.length_m) {
      return false;
    }
  }
  return true;
}

Outcome SimplificationProperties() {
  int idempotent = 0, reach = 0, lengths = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const RandomRoad road = RandomRoadGraph(seed);
    const SimplifyResult once = Simplify(road.graph, road.protected_nodes);
    const SimplifyResult twice = Simplify(once.graph, road.protected_nodes);
    idempotent += SameGraph(once.graph, twice.graph);

    const auto before = AllPairs(road.graph);
    const auto after = AllPairs(once.graph);
    bool reach_ok = true, length_ok = true;
    for (NodeId u : road.protected_nodes) {
      for (NodeId v : road.protected_nodes) {
        const std::size_t bu = *road.graph.FindNode(u), bv = *road.graph.FindNode(v);
        const double d0 = before[bu][bv];
        auto au = once.graph.FindNode(u), av = once.graph.FindNode(v);
        double d1 = std::numeric_limits<double>::infinity();
        if (au && av) d1 = after[*au][*av];
        else if (u == v) d1 = 0.0;
        if (std::isinf(d0) != std::isinf(d1)) reach_ok = false;
        if (!std::isinf(d0) && std::abs(d0 - d1) > 1e-9 * std::max(1.0, d0)) {
          length_ok = false;
        }
      }
    }
    reach += reach_ok;
    lengths += length_ok;
  }
  return {idempotent == 100 && reach == 100 && lengths == 100,
          Fmt("100 random graphs: idempotent %d, reachability kept %d, "
              "shortest lengths kept %d",
              idempotent, reach, lengths)};
}

Outcome ConservationIdentities() {
  int checked = 0, failures = 0;
  for (int k = 0; k < 20; ++k) {
    Instance inst = k % 2 == 0
                        ? CoLocatedInstance(40 + k, 20, 4.0, 2000, 2000.0, 0.4, 0.0)
                        : AttachedInstance(40 + k, 15, 3.0, 8, 1500, 1500.0, 0.4, 0.0);
    std::vector<const LodTensor*> routed = {&inst.truth, &inst.b};
    const LodTensor naive = NaiveSolution(inst.b, inst.eta);
    routed.push_back(&naive);
    for (const LodTensor* q : routed) {
      ++checked;
      const auto rep = EvalObjective(*q, inst.b, inst.obs, inst.net,
                                     inst.similarity, inst.eta, Weights{});
      const auto t_or = OdMatrix(*q, inst.net, OdSide::kOrigin);
      const auto t_dest = OdMatrix(*q, inst.net, OdSide::kDestination);
      if (rep.f_k != 0.0 || t_or != t_dest || rep.n_or != rep.n_dest) ++failures;
    }
  }
  return {failures == 0,
          Fmt("%d path-routed tensors (Q*, B, Q0): %d with f_K != 0 or "
              "origin/destination OD mismatch",
              checked, failures)};
}

int RunCli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism(const std::string& cli, const std::filesystem::path& fixtures) {
  TempDir tmp("acceptance_determinism");
  std::map<std::string, std::pair<int, int>> status;
  auto run_twice = [&](const std::string& name, const std::string& args) {
    int s[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = tmp.path() / (name + std::to_string(rep));
      s[rep] = RunCli(cli, name + " " + args + " --set out_dir=" + out.string());
    }
    status[name] = {s[0], s[1]};
  };
  const auto toy = fixtures / "toy";
  run_twice("simplify", "--set nodes=" + (toy / "nodes.csv").string() +
                            " --set links=" + (toy / "links.csv").string() +
                            " --set scanners=" + (toy / "scanners.csv").string());
  const auto match = fixtures / "match";
  run_twice("match", "--set nodes=" + (match / "nodes.csv").string() +
                         " --set links=" + (match / "links.csv").string() +
                         " --set scanners=" + (match / "scanners.csv").string() +
                         " --set detections=" + (match / "detections_mixed.csv").string());
  run_twice("simulate", "--set seed=7 --set sim_nodes=20 --set sim_degree=4 --set sim_users=2000");
  const auto sim = tmp.path() / "simulate0";
  const std::string inputs = " --set nodes=" + (sim / "nodes.csv").string() +
                             " --set links=" + (sim / "links.csv").string() +
                             " --set scanners=" + (sim / "scanners.csv").string() +
                             " --set bluetooth=" + (sim / "bluetooth_lod.csv").string() +
                             " --set counts=" + (sim / "counts.csv").string();
  run_twice("estimate", inputs);
  run_twice("evaluate", inputs + " --set truth=" + (sim / "truth_lod.csv").string() +
                            " --set estimate=" +
                            (tmp.path() / "estimate0" / "estimate_lod.csv").string() +
                            " --set slice_link=1");

  int identical = 0, files = 0;
  std::string problems;
  for (const auto& [name, codes] : status) {
    const auto a = tmp.path() / (name + "0"), b = tmp.path() / (name + "1");
    bool same = codes.first == 0 && codes.second == 0 && std::filesystem::exists(a);
    if (same) {
      for (const auto& entry : std::filesystem::directory_iterator(a)) {
        ++files;
        const auto other = b / entry.path().filename();
        if (!std::filesystem::exists(other) ||
            ReadFile(entry.path()) != ReadFile(other)) {
          same = false;
        }
      }
    }
    identical += same;
    if (!same) problems += " " + name;
  }
  return {identical == 5,
          Fmt("%d/5 subcommands byte-identical across reruns (%d files)%s",
              identical, files, problems.empty() ? "" : (";" + problems).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <lodem cli> <fixtures dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const std::filesystem::path fixtures = argv[2];
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"synthetic recovery", SyntheticRecovery},
      {"oracle equivalence", OracleEquivalence},
      {"prox correctness", ProxCorrectness},
      {"gradient correctness", GradientCorrectness},
      {"feasibility and stopping", FeasibilityAndStopping},
      {"Kirchhoff weight response", KirchhoffResponse},
      {"simplification properties", SimplificationProperties},
      {"conservation identities", ConservationIdentities},
      {"determinism", [&] { return Determinism(cli, fixtures); }},
  };
  std::vector<bool> selected(criteria.size(), argc <= 3);
  for (int a = 3; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %zu  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), Seconds(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
