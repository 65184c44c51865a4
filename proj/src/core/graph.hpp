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

// Road network model: directed graph of intersections and road links,
// scanner placement, network contraction and incidence structure.
//
// Nodes and links carry stable external ids (as found in the CSV files) and
// are addressed internally by dense indices into the graph's vectors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lodem {

using NodeId = std::int64_t;
using LinkId = std::int64_t;

inline constexpr std::string_view kVirtualClass = "virtual";
inline constexpr std::string_view kScannerFlag = "scanner";

struct Node {
  NodeId id = 0;
  double lon = 0.0;  // degrees, WGS84
  double lat = 0.0;
  std::vector<std::string> flags;

  bool HasFlag(std::string_view flag) const;
};

struct Link {
  LinkId id = 0;
  std::size_t tail = 0;  // node index
  std::size_t head = 0;  // node index
  double length_m = 0.0;
  std::string road_class;
  bool is_virtual = false;
  std::optional<double> count;  // observed traffic count, when measured
};

// Immutable directed graph. Construction validates endpoint references,
// id uniqueness and the length rules (real links > 0, virtual links == 0).
class RoadGraph {
 public:
  RoadGraph() = default;
  RoadGraph(std::vector<Node> nodes, std::vector<Link> links);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(std::size_t index) const { return nodes_[index]; }
  const Link& link(std::size_t index) const { return links_[index]; }

  std::optional<std::size_t> FindNode(NodeId id) const;
  std::optional<std::size_t> FindLink(LinkId id) const;

  std::span<const std::size_t> OutLinks(std::size_t node) const;
  std::span<const std::size_t> InLinks(std::size_t node) const;

  LinkId MaxLinkId() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<NodeId, std::size_t> node_index_;
  std::unordered_map<LinkId, std::size_t> link_index_;
  std::vector<std::size_t> out_offsets_, out_links_;
  std::vector<std::size_t> in_offsets_, in_links_;
};

struct Scanner {
  NodeId id = 0;  // shares the node id space once attached to a graph
  double lon = 0.0;
  double lat = 0.0;
  double range_m = 0.0;
};

class ScannerSet {
 public:
  ScannerSet() = default;
  // Throws kIntegrity on duplicate ids or negative ranges.
  explicit ScannerSet(std::vector<Scanner> scanners);

  std::size_t size() const { return scanners_.size(); }
  const std::vector<Scanner>& scanners() const { return scanners_; }
  const Scanner& operator[](std::size_t i) const { return scanners_[i]; }
  std::optional<std::size_t> Find(NodeId id) const;

 private:
  std::vector<Scanner> scanners_;
  std::unordered_map<NodeId, std::size_t> index_;
};

// For each scanner (by position in the ScannerSet), the ids of the graph
// nodes within its detection range.
struct ScannerMap {
  std::vector<std::vector<NodeId>> nodes;
  std::vector<NodeId> unmapped_scanners;  // diagnostics

  std::set<NodeId> ProtectedNodes() const;
};

enum class LinkStatus { kKept, kRemoved, kMerged };

struct LinkMapEntry {
  LinkId original_id = 0;
  LinkStatus status = LinkStatus::kKept;
  LinkId target_id = 0;  // meaningful for kMerged only
};

// Fate of every link of the pre-contraction graph, indexed like its links.
struct LinkMap {
  std::vector<LinkMapEntry> entries;

  std::size_t Count(LinkStatus status) const;
};

struct SimplifyResult {
  RoadGraph graph;
  LinkMap link_map;
  int iterations = 0;  // passes of the outer loop, the final quiet pass included
};

struct FilterResult {
  RoadGraph graph;
  // Old index -> new index, nullopt when dropped.
  std::vector<std::optional<std::size_t>> node_translation;
  std::vector<std::optional<std::size_t>> link_translation;
  bool empty_warning = false;
};

struct AttachResult {
  RoadGraph graph;
  std::vector<NodeId> scanners_without_links;  // diagnostics
};

// Great-circle distance in meters on a sphere of mean Earth radius.
double HaversineMeters(double lon1, double lat1, double lon2, double lat2);
inline constexpr double kEarthRadiusM = 6371008.8;

RoadGraph LoadNetwork(const std::filesystem::path& nodes_csv,
                      const std::filesystem::path& links_csv);
RoadGraph ParseNetwork(std::string_view nodes_csv, std::string_view links_csv);
ScannerSet LoadScanners(const std::filesystem::path& scanners_csv);
ScannerSet ParseScanners(std::string_view scanners_csv);

void WriteNodes(const RoadGraph& graph, const std::filesystem::path& path);
void WriteLinks(const RoadGraph& graph, const std::filesystem::path& path);
void WriteScanners(const ScannerSet& scanners, const std::filesystem::path& path);
void WriteLinkMap(const LinkMap& map, const std::filesystem::path& path);

FilterResult FilterByClass(const RoadGraph& graph,
                           const std::set<std::string>& keep);

// Removes virtual links and scanner-flagged nodes (the output of a previous
// attachment) so a processed network can be fed back through simplify.
RoadGraph StripVirtual(const RoadGraph& graph);

ScannerMap MapScanners(const RoadGraph& graph, const ScannerSet& scanners);

SimplifyResult Simplify(const RoadGraph& graph,
                        const std::set<NodeId>& protected_nodes);

AttachResult AttachVirtualScannerLinks(const RoadGraph& graph,
                                       const ScannerSet& scanners,
                                       const ScannerMap& map);

// Node-link arrival (I) and departure (E) tables.
class IncidenceOperators {
 public:
  IncidenceOperators() = default;
  explicit IncidenceOperators(const RoadGraph& graph);

  std::size_t node_count() const { return node_count_; }
  std::size_t link_count() const { return head_.size(); }
  // I[k,l]
  int Arrival(std::size_t node, std::size_t link) const {
    return head_[link] == node ? 1 : 0;
  }
  // E[k,l]
  int Departure(std::size_t node, std::size_t link) const {
    return tail_[link] == node ? 1 : 0;
  }
  std::size_t Head(std::size_t link) const { return head_[link]; }
  std::size_t Tail(std::size_t link) const { return tail_[link]; }

 private:
  std::size_t node_count_ = 0;
  std::vector<std::size_t> tail_, head_;
};

// Shortest-path search over link lengths. Nodes flagged in `no_transit` may
// start or end a path but are never passed through.
struct ShortestPathTree {
  static constexpr double kUnreachable = 1e300;
  std::size_t source = 0;
  std::vector<double> distance;
  std::vector<std::optional<std::size_t>> parent_link;

  bool Reaches(std::size_t node) const { return distance[node] < kUnreachable; }
  // Link indices from source to `target`; empty when unreachable or equal.
  std::vector<std::size_t> PathTo(const RoadGraph& graph, std::size_t target) const;
};

ShortestPathTree Dijkstra(const RoadGraph& graph, std::size_t source,
                          const std::vector<char>& no_transit = {},
                          const std::vector<char>& banned_links = {},
                          const std::vector<char>& banned_nodes = {});

// Up to k loopless shortest paths (Yen) from source to target, ordered by
// length, ties broken by link sequence.
std::vector<std::vector<std::size_t>> KShortestPaths(
    const RoadGraph& graph, std::size_t source, std::size_t target,
    std::size_t k, const std::vector<char>& no_transit = {});

// Pairs of "similar" scanners for the total-variation term.
struct SimilarityRow {
  std::size_t first = 0;   // scanner index, carries -weight
  std::size_t second = 0;  // scanner index, carries +weight
  double distance_m = 0.0;
  double weight = 0.0;     // exp(-d / d0)
};

struct SimilarityOperator {
  std::size_t scanner_count = 0;
  std::vector<SimilarityRow> rows;
};

// `scanner_nodes[s]` is the graph node hosting scanner s.
SimilarityOperator BuildSimilarityOperator(
    const RoadGraph& graph, const std::vector<std::size_t>& scanner_nodes,
    const std::vector<char>& no_transit, double d0_m = 300.0,
    double cutoff_m = 300.0);

}  // namespace lodem
