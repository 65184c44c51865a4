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

#include "pipeline.hpp"

#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "log.hpp"
#include "simulator.hpp"
#include "solver.hpp"
#include "trajectories.hpp"

namespace lodem {

namespace {

using Json = nlohmann::ordered_json;

std::filesystem::path OutPath(const RunConfig& config, const char* name) {
  return config.Path("out_dir") / name;
}

void WriteJson(const Json& j, const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << j.dump(2) << '\n';
}

Network LoadNet(const RunConfig& config) {
  return Network::Load(config.Path("nodes"), config.Path("links"),
                       config.Path("scanners"));
}

Weights WeightsFrom(const RunConfig& config) {
  Weights w;
  w.tc = config.Real("gamma_tc");
  w.p = config.Real("gamma_p");
  w.c = config.Real("gamma_c");
  w.k = config.Real("gamma_k");
  w.tv = config.Real("gamma_tv");
  w.Validate();
  return w;
}

std::size_t NonNegative(const RunConfig& config, std::string_view key) {
  const auto v = config.Int(key);
  if (v < 0) Fail(ErrorKind::kConfig, std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

SimilarityOperator SimilarityFrom(const RunConfig& config, const Network& net) {
  return BuildSimilarityOperator(net.graph, net.scanner_nodes, net.terminal_only,
                                 config.Real("d0_m"),
                                 config.Real("similarity_cutoff_m"));
}

std::size_t ScannerIndex(const Network& net, std::int64_t id) {
  auto s = net.scanners.Find(id);
  if (!s) Fail(ErrorKind::kConfig, "unknown scanner id " + std::to_string(id));
  return *s;
}

}  // namespace

RunStatus RunSimplify(const RunConfig& config) {
  config.RequireFiles({"nodes", "links", "scanners"});
  const RoadGraph input = LoadNetwork(config.Path("nodes"), config.Path("links"));
  const ScannerSet scanners = LoadScanners(config.Path("scanners"));
  const RoadGraph road = StripVirtual(input);

  std::set<std::string> classes;
  for (auto& c : csv::Split(config.String("road_classes"), ',')) {
    if (!c.empty()) classes.insert(c);
  }
  FilterResult filtered;
  if (classes.empty()) {
    filtered.graph = road;
    for (std::size_t l = 0; l < road.link_count(); ++l)
      filtered.link_translation.push_back(l);
  } else {
    filtered = FilterByClass(road, classes);
  }

  const ScannerMap map = MapScanners(filtered.graph, scanners);
  const SimplifyResult simplified = Simplify(filtered.graph, map.ProtectedNodes());
  const AttachResult attached =
      AttachVirtualScannerLinks(simplified.graph, scanners, map);
  const Network net = Network::Bind(attached.graph, scanners);

  LinkMap link_map;
  for (std::size_t l = 0; l < road.link_count(); ++l) {
    if (auto t = filtered.link_translation[l]) {
      link_map.entries.push_back(simplified.link_map.entries[*t]);
    } else {
      link_map.entries.push_back({road.link(l).id, LinkStatus::kRemoved, 0});
    }
  }

  WriteNodes(net.graph, OutPath(config, "nodes.csv"));
  WriteLinks(net.graph, OutPath(config, "links.csv"));
  WriteScanners(scanners, OutPath(config, "scanners.csv"));
  WriteLinkMap(link_map, OutPath(config, "linkmap.csv"));
  WriteCounts(net, CountsFromGraph(net.graph), OutPath(config, "counts.csv"));

  Json d;
  d["input_nodes"] = road.node_count();
  d["input_links"] = road.link_count();
  d["filtered_nodes"] = filtered.graph.node_count();
  d["filtered_links"] = filtered.graph.link_count();
  d["filter_empty"] = filtered.empty_warning;
  d["iterations"] = simplified.iterations;
  d["simplified_nodes"] = simplified.graph.node_count();
  d["simplified_links"] = simplified.graph.link_count();
  d["links_kept"] = link_map.Count(LinkStatus::kKept);
  d["links_merged"] = link_map.Count(LinkStatus::kMerged);
  d["links_removed"] = link_map.Count(LinkStatus::kRemoved);
  d["unmapped_scanners"] = map.unmapped_scanners;
  d["scanners_without_links"] = attached.scanners_without_links;
  d["output_nodes"] = net.graph.node_count();
  d["output_links"] = net.graph.link_count();
  WriteJson(d, OutPath(config, "simplify_diagnostics.json"));
  log::Info("simplify: " + std::to_string(simplified.iterations) + " passes");
  return RunStatus::kOk;
}

RunStatus RunMatch(const RunConfig& config) {
  config.RequireFiles({"nodes", "links", "scanners", "detections"});
  const Network net = LoadNet(config);
  const DetectionLog detections = LoadDetections(config.Path("detections"));

  SessionizeOptions options;
  options.gap_s = config.Int("gap_s");
  if (auto v = config.OptionalInt("window_start")) options.window_start = *v;
  if (auto v = config.OptionalInt("window_end")) options.window_end = *v;
  SessionizeStats session_stats;
  const auto trips = Sessionize(detections, net.scanners, options, &session_stats);
  ResolveStats resolve_stats;
  const auto resolved = ResolveAll(trips, net, &resolve_stats);
  const LodTensor b =
      BuildBluetoothLodm(resolved, net.scanner_count(), net.link_count());

  WriteTrips(resolved, net, OutPath(config, "trips.jsonl"));
  WriteTensor(net, b, OutPath(config, "bluetooth_lod.csv"));
  Json d;
  d["records"] = detections.size();
  d["unknown_scanner_records"] = session_stats.unknown_scanner_records;
  d["short_fragments"] = session_stats.short_fragments;
  d["outside_window"] = session_stats.outside_window;
  d["sessions"] = trips.size();
  d["unresolved_legs"] = resolve_stats.unresolved_legs;
  d["dropped_pieces"] = resolve_stats.dropped_trips;
  d["trips"] = resolved.size();
  d["b_entries"] = b.nnz();
  d["b_sum"] = b.Sum();
  WriteJson(d, OutPath(config, "match_diagnostics.json"));
  return RunStatus::kOk;
}

RunStatus RunEstimate(const RunConfig& config) {
  config.RequireFiles({"nodes", "links", "scanners", "bluetooth", "counts"});
  const Network net = LoadNet(config);
  const LodTensor b = LoadTensor(net, config.Path("bluetooth"));
  const CountObservations obs = LoadCounts(net, config.Path("counts"));

  SolverConfig solver;
  solver.weights = WeightsFrom(config);
  if (solver.weights.AllZero()) Fail(ErrorKind::kConfig, "objective empty");
  solver.max_iterations = NonNegative(config, "max_iter");
  solver.rms_tolerance = config.Real("rms_tol");
  solver.check_interval = NonNegative(config, "check_interval");
  solver.tau = config.OptionalReal("tau");
  solver.sigma = config.OptionalReal("sigma");
  solver.support.k_paths = NonNegative(config, "k_paths");
  solver.support.full = config.Bool("full_support");
  solver.seed = static_cast<std::uint64_t>(config.Int("seed"));

  const SimilarityOperator similarity = SimilarityFrom(config, net);
  const SolverResult result = EstimateLodm(net, b, obs, similarity, solver);

  WriteTensor(net, result.estimate, OutPath(config, "estimate_lod.csv"));
  WriteTrace(result.trace, OutPath(config, "trace.csv"));
  WriteReport(EvalObjective(result.estimate, b, obs, net, similarity,
                            result.eta, solver.weights),
              OutPath(config, "objective.json"));
  Json d;
  d["converged"] = result.converged;
  d["iterations"] = result.iterations;
  d["eta"] = result.eta;
  d["support_size"] = result.support_size;
  d["similar_pairs"] = similarity.rows.size();
  d["tau"] = result.tau;
  d["sigma"] = result.sigma;
  d["tv_norm"] = result.tv_norm;
  d["lipschitz"] = result.lipschitz;
  d["initial_objective"] = result.initial_objective;
  d["final_objective"] = result.final_objective;
  WriteJson(d, OutPath(config, "solver.json"));
  return result.converged ? RunStatus::kOk : RunStatus::kNotConverged;
}

RunStatus RunSimulate(const RunConfig& config) {
  SimulationOptions options;
  const auto nodes = config.Int("sim_nodes");
  const auto users = config.Int("sim_users");
  if (nodes < 0 || users < 0) {
    Fail(ErrorKind::kConfig, "sim_nodes and sim_users must be >= 0");
  }
  options.network.nodes = static_cast<std::size_t>(nodes);
  options.network.avg_out_degree = config.Real("sim_degree");
  options.network.extent_m = config.Real("sim_extent_m");
  options.users = static_cast<std::size_t>(users);
  options.rate_low = config.Real("rate_low");
  options.rate_high = config.Real("rate_high");
  options.coverage = config.Real("coverage");
  options.noise_sigma = config.Real("noise_sigma");
  const Simulation sim =
      Simulate(options, static_cast<std::uint64_t>(config.Int("seed")));
  WriteSimulation(sim, config.Path("out_dir"));
  return RunStatus::kOk;
}

RunStatus RunEvaluate(const RunConfig& config) {
  config.RequireFiles({"nodes", "links", "scanners", "bluetooth", "counts"});
  if (config.Has("estimate")) config.RequireFiles({"estimate"});
  if (config.Has("truth")) config.RequireFiles({"truth"});
  const Network net = LoadNet(config);
  const LodTensor b = LoadTensor(net, config.Path("bluetooth"));
  const CountObservations obs = LoadCounts(net, config.Path("counts"));
  const Weights w = WeightsFrom(config);
  const SimilarityOperator similarity = SimilarityFrom(config, net);
  const double eta = PenetrationRate(b, obs);

  std::optional<LodTensor> truth;
  if (config.Has("truth")) truth = LoadTensor(net, config.Path("truth"));
  std::vector<ComparisonRow> rows;
  auto add = [&](std::string label, const LodTensor& q,
                 std::optional<Weights> weights) {
    std::optional<double> err;
    if (truth) err = Rmse(q, *truth);
    rows.push_back(MakeRow(std::move(label),
                           EvalObjective(q, b, obs, net, similarity, eta, w),
                           weights, err));
  };
  const LodTensor naive = NaiveSolution(b, eta);
  add("naive", naive, std::nullopt);
  std::optional<LodTensor> estimate;
  if (config.Has("estimate")) {
    estimate = LoadTensor(net, config.Path("estimate"));
    add("estimate", *estimate, w);
  }
  if (truth) add("truth", *truth, std::nullopt);
  WriteComparison(rows, OutPath(config, "report.csv"));

  const LodTensor& sliced = estimate ? *estimate : naive;
  if (auto id = config.OptionalInt("slice_link")) {
    auto l = net.graph.FindLink(*id);
    if (!l) Fail(ErrorKind::kConfig, "unknown link id " + std::to_string(*id));
    std::vector<TensorEntry> entries;
    for (const OdFlow& f : ExtractLinkOd(sliced, *l, NonNegative(config, "top_n"))) {
      entries.push_back({{f.origin, f.destination, *l}, f.value});
    }
    WriteTensor(net,
                LodTensor::FromEntries(net.scanner_count(), net.link_count(),
                                       std::move(entries)),
                OutPath(config, "link_od.csv"));
  }
  const auto so = config.OptionalInt("slice_origin");
  const auto sd = config.OptionalInt("slice_destination");
  if (so.has_value() != sd.has_value()) {
    Fail(ErrorKind::kConfig, "slice_origin and slice_destination go together");
  }
  if (so) {
    const std::size_t o = ScannerIndex(net, *so);
    const std::size_t d = ScannerIndex(net, *sd);
    std::vector<TensorEntry> entries;
    for (const LinkFlow& f : ExtractOdLinks(sliced, o, d)) {
      entries.push_back({{o, d, f.link}, f.value});
    }
    WriteTensor(net,
                LodTensor::FromEntries(net.scanner_count(), net.link_count(),
                                       std::move(entries)),
                OutPath(config, "od_links.csv"));
  }
  return RunStatus::kOk;
}

RunStatus RunCommand(std::string_view command, const RunConfig& config) {
  if (command == "simplify") return RunSimplify(config);
  if (command == "match") return RunMatch(config);
  if (command == "estimate") return RunEstimate(config);
  if (command == "simulate") return RunSimulate(config);
  if (command == "evaluate") return RunEvaluate(config);
  Fail(ErrorKind::kConfig, "unknown command '" + std::string(command) + "'");
}

}  // namespace lodem
