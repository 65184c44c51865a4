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

// Shared builders for test instances.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "graph.hpp"
#include "model.hpp"
#include "network.hpp"
#include "simulator.hpp"
#include "tensor.hpp"

namespace lodem::testing {

// Degrees per meter of latitude; good enough to place test nodes.
inline constexpr double kDegPerMeter = 180.0 / (3.14159265358979323846 * kEarthRadiusM);

inline std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lodem_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Everything the objective needs.
struct Instance {
  Network net;
  LodTensor b;
  LodTensor truth;
  CountObservations obs;
  SimilarityOperator similarity;
  double eta = 0.0;
};

// Scanner on every node.
inline Instance CoLocatedInstance(std::uint64_t seed, std::size_t nodes,
                                  double degree, std::size_t users,
                                  double extent_m, double coverage,
                                  double noise) {
  SimulationOptions opt;
  opt.network.nodes = nodes;
  opt.network.avg_out_degree = degree;
  opt.network.extent_m = extent_m;
  opt.users = users;
  opt.coverage = coverage;
  opt.noise_sigma = noise;
  Simulation sim = Simulate(opt, seed);
  Instance inst;
  inst.net = std::move(sim.net);
  inst.b = std::move(sim.bluetooth.b);
  inst.truth = std::move(sim.demand.truth);
  inst.obs = std::move(sim.counts.obs);
  inst.similarity = BuildSimilarityOperator(
      inst.net.graph, inst.net.scanner_nodes, inst.net.terminal_only);
  inst.eta = inst.b.nnz() ? PenetrationRate(inst.b, inst.obs) : 0.0;
  return inst;
}

// Road graph from the generator, separate scanner nodes attached by
// virtual links to the road nodes within range.
inline Instance AttachedInstance(std::uint64_t seed, std::size_t road_nodes,
                                 double degree, std::size_t scanners,
                                 std::size_t users, double extent_m,
                                 double coverage, double noise) {
  SyntheticNetworkOptions gopt;
  gopt.nodes = road_nodes;
  gopt.avg_out_degree = degree;
  gopt.extent_m = extent_m;
  Network road = GenerateNetwork(gopt, seed);
  std::mt19937_64 rng(seed * 7919 + 13);
  std::vector<std::size_t> hosts(road_nodes);
  for (std::size_t i = 0; i < road_nodes; ++i) hosts[i] = i;
  std::shuffle(hosts.begin(), hosts.end(), rng);
  std::vector<Scanner> sc;
  for (std::size_t s = 0; s < scanners; ++s) {
    const Node& host = road.graph.node(hosts[s % road_nodes]);
    sc.push_back(Scanner{1000 + static_cast<NodeId>(s), host.lon + 1e-6,
                         host.lat, 5.0});
  }
  ScannerSet set(std::move(sc));
  ScannerMap map = MapScanners(road.graph, set);
  AttachResult att = AttachVirtualScannerLinks(road.graph, set, map);
  Network net = Network::Bind(std::move(att.graph), std::move(set));

  Demand demand = GenerateDemand(net, users, seed);
  BluetoothSample bt = SampleBluetooth(demand, net.scanner_count(), 0.2, 0.6, seed);
  CountSample counts = ObserveCounts(net, demand.truth, coverage, noise, seed);
  Instance inst;
  inst.net = std::move(net);
  inst.b = std::move(bt.b);
  inst.truth = std::move(demand.truth);
  inst.obs = std::move(counts.obs);
  inst.similarity = BuildSimilarityOperator(
      inst.net.graph, inst.net.scanner_nodes, inst.net.terminal_only);
  inst.eta = inst.b.nnz() ? PenetrationRate(inst.b, inst.obs) : 0.0;
  return inst;
}

// Random road graph with a mix of one-way and two-way links and a random
// protected subset. Node ids are shuffled so processing order varies.
struct RandomRoad {
  RoadGraph graph;
  std::set<NodeId> protected_nodes;
};

inline RandomRoad RandomRoadGraph(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(6, 30);
  const std::size_t n = static_cast<std::size_t>(n_dist(rng));
  std::uniform_real_distribution<double> pos(0.0, 2000.0);
  std::vector<NodeId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(10 * i + 3);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back(Node{ids[i], 153.0 + pos(rng) * kDegPerMeter,
                         -27.0 + pos(rng) * kDegPerMeter, {}});
  }
  std::vector<Link> links;
  LinkId next = 1;
  std::bernoulli_distribution two_way(0.6);
  std::uniform_real_distribution<double> len(10.0, 500.0);
  auto add = [&](std::size_t a, std::size_t b) {
    const double l = std::round(len(rng));
    links.push_back(Link{next++, a, b, l, "primary", false, std::nullopt});
  };
  // Random spanning tree plus extra edges; many low-degree nodes.
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    const std::size_t p = parent(rng);
    if (two_way(rng)) {
      add(p, i);
      add(i, p);
    } else if (std::bernoulli_distribution(0.5)(rng)) {
      add(p, i);
    } else {
      add(i, p);
    }
  }
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  const std::size_t extra = n / 3;
  for (std::size_t k = 0; k < extra; ++k) {
    std::size_t a = any(rng), b = any(rng);
    if (a == b) continue;
    add(a, b);
    if (two_way(rng)) add(b, a);
  }
  // Occasional parallel duplicate.
  if (!links.empty() && std::bernoulli_distribution(0.5)(rng)) {
    Link dup = links[any(rng) % links.size()];
    dup.id = next++;
    dup.length_m += 7.0;
    links.push_back(dup);
  }
  RandomRoad out;
  std::bernoulli_distribution prot(0.25);
  for (std::size_t i = 0; i < n; ++i)
    if (prot(rng)) out.protected_nodes.insert(ids[i]);
  if (out.protected_nodes.size() < 2) {
    out.protected_nodes.insert(ids[0]);
    out.protected_nodes.insert(ids[n - 1]);
  }
  out.graph = RoadGraph(std::move(nodes), std::move(links));
  return out;
}

// All-pairs shortest path lengths by Floyd-Warshall, keyed by node index.
inline std::vector<std::vector<double>> AllPairs(const RoadGraph& g) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Link& l : g.links()) {
    d[l.tail][l.head] = std::min(d[l.tail][l.head], l.length_m);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

}  // namespace lodem::testing
