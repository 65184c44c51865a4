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

// A processed network ready for estimation: the graph, its scanners, and
// where each scanner lives in the graph.
//
// Two layouts are supported. Attached scanners are their own nodes (flagged
// "scanner") connected to nearby intersections by zero-length virtual links;
// they are pure sources and sinks, so no path passes through them and the
// conservation term ignores them. Co-located scanners share the id of a road
// node (the synthetic layout); such a node behaves like any intersection for
// OD pairs that neither start nor end there.

#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "graph.hpp"
#include "tensor.hpp"

namespace lodem {

struct Network {
  RoadGraph graph;
  ScannerSet scanners;
  std::vector<std::size_t> scanner_nodes;  // scanner index -> node index
  std::vector<char> terminal_only;         // per node

  // Throws kIntegrity when a scanner id matches no node.
  static Network Bind(RoadGraph graph, ScannerSet scanners);
  static Network Load(const std::filesystem::path& nodes_csv,
                      const std::filesystem::path& links_csv,
                      const std::filesystem::path& scanners_csv);

  std::size_t scanner_count() const { return scanners.size(); }
  std::size_t link_count() const { return graph.link_count(); }
};

// Traffic counts on the measured subset of links.
struct CountObservations {
  std::vector<char> mask;      // per link
  std::vector<double> counts;  // per link, zero where unmeasured

  std::size_t measured() const;
};

CountObservations LoadCounts(const Network& net,
                             const std::filesystem::path& counts_csv);
CountObservations ParseCounts(const Network& net, std::string_view counts_csv);
// Counts carried on the links themselves (as written by simplify).
CountObservations CountsFromGraph(const RoadGraph& graph);
void WriteCounts(const Network& net, const CountObservations& obs,
                 const std::filesystem::path& path);

// lod_sparse.csv: origin_scanner,destination_scanner,link_id,value
LodTensor LoadTensor(const Network& net, const std::filesystem::path& path);
LodTensor ParseTensor(const Network& net, std::string_view text);
void WriteTensor(const Network& net, const LodTensor& tensor,
                 const std::filesystem::path& path);

}  // namespace lodem
