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

#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace lodem {

namespace {

// Independent stream per stage, all derived from the replicate seed.
std::mt19937_64 StageRng(std::uint64_t seed, std::uint64_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage)};
  return std::mt19937_64(seq);
}

}  // namespace

Network GenerateNetwork(const SyntheticNetworkOptions& options,
                        std::uint64_t seed) {
  const std::size_t n = options.nodes;
  if (n < 2) Fail(ErrorKind::kConfig, "synthetic network needs >= 2 nodes");
  if (options.avg_out_degree < 1.0) {
    Fail(ErrorKind::kConfig, "average out-degree must be >= 1");
  }
  if (options.avg_out_degree > static_cast<double>(n - 1)) {
    Fail(ErrorKind::kConfig, "average out-degree exceeds nodes - 1");
  }
  auto rng = StageRng(seed, 1);
  std::uniform_real_distribution<double> unif(0.0, options.extent_m);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = unif(rng);
    y[i] = unif(rng);
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(x[a] - x[b], y[a] - y[b]);
  };

  constexpr double kRad = 180.0 / std::numbers::pi;
  const double cos_lat = std::cos(options.origin_lat / kRad);
  std::vector<Node> nodes;
  std::vector<Scanner> scanners;
  for (std::size_t i = 0; i < n; ++i) {
    const double lat = options.origin_lat + y[i] / kEarthRadiusM * kRad;
    const double lon =
        options.origin_lon + x[i] / (kEarthRadiusM * cos_lat) * kRad;
    const NodeId id = static_cast<NodeId>(i + 1);
    nodes.push_back(Node{id, lon, lat, {}});
    scanners.push_back(Scanner{id, lon, lat, 0.0});
  }

  std::set<std::pair<std::size_t, std::size_t>> arcs;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a != b && arcs.emplace(a, b).second) order.emplace_back(a, b);
  };
  // Backbone: greedy nearest-neighbour tour closed into a cycle.
  {
    std::vector<char> seen(n, 0);
    std::size_t cur = 0;
    seen[0] = 1;
    std::vector<std::size_t> tour{0};
    for (std::size_t step = 1; step < n; ++step) {
      std::optional<std::size_t> best;
      for (std::size_t c = 0; c < n; ++c) {
        if (!seen[c] && (!best || dist(cur, c) < dist(cur, *best))) best = c;
      }
      seen[*best] = 1;
      tour.push_back(*best);
      cur = *best;
    }
    for (std::size_t k = 0; k < n; ++k) add(tour[k], tour[(k + 1) % n]);
  }
  const std::size_t target = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * options.avg_out_degree - 1e-9));
  // Nearest neighbours, one rank at a time across all nodes.
  std::vector<std::vector<std::size_t>> ranked(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) ranked[a].push_back(b);
    std::sort(ranked[a].begin(), ranked[a].end(),
              [&](std::size_t p, std::size_t q) {
                return std::make_pair(dist(a, p), p) <
                       std::make_pair(dist(a, q), q);
              });
  }
  for (std::size_t rank = 0; rank + 1 < n && order.size() < target; ++rank) {
    for (std::size_t a = 0; a < n && order.size() < target; ++a) {
      add(a, ranked[a][rank]);
    }
  }

  std::vector<Link> links;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto [a, b] = order[k];
    Link l;
    l.id = static_cast<LinkId>(k + 1);
    l.tail = a;
    l.head = b;
    l.length_m = HaversineMeters(nodes[a].lon, nodes[a].lat, nodes[b].lon,
                                 nodes[b].lat);
    l.road_class = "primary";
    links.push_back(std::move(l));
  }
  return Network::Bind(RoadGraph(std::move(nodes), std::move(links)),
                       ScannerSet(std::move(scanners)));
}

Demand GenerateDemand(const Network& net, std::size_t users,
                      std::uint64_t seed) {
  const std::size_t ns = net.scanner_count();
  if (ns < 2) Fail(ErrorKind::kConfig, "demand needs at least two scanners");
  auto rng = StageRng(seed, 2);
  std::uniform_int_distribution<std::size_t> pick_o(0, ns - 1);
  std::uniform_int_distribution<std::size_t> pick_d(0, ns - 2);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t o = pick_o(rng);
    std::size_t d = pick_d(rng);
    if (d >= o) ++d;
    ++counts[{o, d}];
  }
  Demand demand;
  demand.users = users;
  std::vector<std::optional<ShortestPathTree>> trees(ns);
  std::vector<TensorEntry> entries;
  for (const auto& [od, n_users] : counts) {
    auto [o, d] = od;
    if (!trees[o]) trees[o] = Dijkstra(net.graph, net.scanner_nodes[o], net.terminal_only);
    if (!trees[o]->Reaches(net.scanner_nodes[d])) {
      Fail(ErrorKind::kIntegrity, "demand between disconnected scanners");
    }
    OdDemand item{o, d, n_users, trees[o]->PathTo(net.graph, net.scanner_nodes[d])};
    for (std::size_t l : item.path) {
      entries.push_back({{o, d, l}, static_cast<double>(n_users)});
    }
    demand.ods.push_back(std::move(item));
  }
  demand.truth = LodTensor::FromEntries(ns, net.link_count(), std::move(entries));
  return demand;
}

BluetoothSample SampleBluetooth(const Demand& demand, std::size_t scanner_count,
                                double low, double high, std::uint64_t seed) {
  if (!(low > 0.0) || !(low <= high) || !(high <= 1.0)) {
    Fail(ErrorKind::kConfig, "penetration range must satisfy 0 < low <= high <= 1");
  }
  auto rng = StageRng(seed, 3);
  BluetoothSample sample;
  sample.penetration.assign(scanner_count * scanner_count, 0.0);
  std::uniform_real_distribution<double> rate(low, high);
  for (std::size_t i = 0; i < scanner_count; ++i)
    for (std::size_t j = 0; j < scanner_count; ++j)
      if (i != j) sample.penetration[i * scanner_count + j] = low == high ? low : rate(rng);

  std::vector<TensorEntry> entries;
  for (const OdDemand& od : demand.ods) {
    const double p = sample.penetration[od.origin * scanner_count + od.destination];
    std::bernoulli_distribution coin(p);
    std::size_t sampled = 0;
    for (std::size_t u = 0; u < od.users; ++u) sampled += coin(rng);
    sample.sampled_users += sampled;
    if (sampled == 0) continue;
    for (std::size_t l : od.path) {
      entries.push_back({{od.origin, od.destination, l},
                         static_cast<double>(sampled)});
    }
  }
  sample.b = LodTensor::FromEntries(scanner_count, demand.truth.link_count(),
                                    std::move(entries));
  return sample;
}

CountSample ObserveCounts(const Network& net, const LodTensor& truth,
                          double coverage, double sigma, std::uint64_t seed) {
  if (!(coverage > 0.0) || coverage > 1.0) {
    Fail(ErrorKind::kConfig, "coverage must lie in (0, 1]");
  }
  if (!(sigma >= 0.0)) Fail(ErrorKind::kConfig, "noise sigma must be >= 0");
  auto rng = StageRng(seed, 4);
  std::vector<std::size_t> road;
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    if (!net.graph.link(l).is_virtual) road.push_back(l);
  }
  std::shuffle(road.begin(), road.end(), rng);
  const auto take = static_cast<std::size_t>(
      std::lround(coverage * static_cast<double>(road.size())));
  road.resize(std::min(take, road.size()));
  std::sort(road.begin(), road.end());

  const auto volumes = [&] {
    std::vector<double> v(net.link_count(), 0.0);
    for (const auto& e : truth.entries()) v[e.key.link] += e.value;
    return v;
  }();
  CountSample out;
  out.obs.mask.assign(net.link_count(), 0);
  out.obs.counts.assign(net.link_count(), 0.0);
  out.noise.assign(net.link_count(), 0.0);
  std::normal_distribution<double> gauss(0.0, sigma > 0.0 ? sigma : 1.0);
  for (std::size_t l : road) {
    const double eps = sigma > 0.0 ? gauss(rng) : 0.0;
    out.obs.mask[l] = 1;
    out.noise[l] = eps;
    out.obs.counts[l] = std::max(0.0, volumes[l] + eps);
  }
  return out;
}

Simulation Simulate(const SimulationOptions& options, std::uint64_t seed) {
  Simulation sim;
  sim.seed = seed;
  sim.options = options;
  sim.net = GenerateNetwork(options.network, seed);
  sim.demand = GenerateDemand(sim.net, options.users, seed);
  sim.bluetooth = SampleBluetooth(sim.demand, sim.net.scanner_count(),
                                  options.rate_low, options.rate_high, seed);
  sim.counts = ObserveCounts(sim.net, sim.demand.truth, options.coverage,
                             options.noise_sigma, seed);
  return sim;
}

void WriteSimulation(const Simulation& sim, const std::filesystem::path& dir) {
  WriteNodes(sim.net.graph, dir / "nodes.csv");
  WriteLinks(sim.net.graph, dir / "links.csv");
  WriteScanners(sim.net.scanners, dir / "scanners.csv");
  WriteCounts(sim.net, sim.counts.obs, dir / "counts.csv");
  WriteTensor(sim.net, sim.demand.truth, dir / "truth_lod.csv");
  WriteTensor(sim.net, sim.bluetooth.b, dir / "bluetooth_lod.csv");

  const std::size_t ns = sim.net.scanner_count();
  nlohmann::ordered_json j;
  j["seed"] = sim.seed;
  j["nodes"] = sim.options.network.nodes;
  j["avg_out_degree"] = sim.options.network.avg_out_degree;
  j["extent_m"] = sim.options.network.extent_m;
  j["users"] = sim.options.users;
  j["rate_low"] = sim.options.rate_low;
  j["rate_high"] = sim.options.rate_high;
  j["coverage"] = sim.options.coverage;
  j["noise_sigma"] = sim.options.noise_sigma;
  j["sampled_users"] = sim.bluetooth.sampled_users;
  auto& rates = j["penetration"] = nlohmann::ordered_json::array();
  for (const OdDemand& od : sim.demand.ods) {
    rates.push_back({{"origin", sim.net.scanners[od.origin].id},
                     {"destination", sim.net.scanners[od.destination].id},
                     {"users", od.users},
                     {"rate", sim.bluetooth.penetration[od.origin * ns + od.destination]}});
  }
  auto& noise = j["count_noise"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < sim.net.link_count(); ++l) {
    if (sim.counts.obs.mask[l]) {
      noise.push_back({{"link_id", sim.net.graph.link(l).id},
                       {"noise", sim.counts.noise[l]}});
    }
  }
  auto out = csv::OpenForWrite(dir / "groundtruth.json");
  out << j.dump(2) << '\n';
}

}  // namespace lodem
