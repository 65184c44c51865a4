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

#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <queue>
#include <tuple>

#include "csv.hpp"
#include "error.hpp"
#include "log.hpp"

namespace lodem {

namespace {

const std::vector<std::string> kNodesHeader = {"node_id", "lon", "lat", "flags"};
const std::vector<std::string> kLinksHeader = {
    "link_id", "tail", "head", "length_m", "road_class", "oneway", "count"};
const std::vector<std::string> kScannersHeader = {"scanner_id", "lon", "lat",
                                                  "range_m"};

void BuildCsr(std::size_t n, const std::vector<Link>& links, bool by_tail,
              std::vector<std::size_t>& offsets, std::vector<std::size_t>& out) {
  offsets.assign(n + 1, 0);
  for (const Link& l : links) ++offsets[(by_tail ? l.tail : l.head) + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  out.assign(links.size(), 0);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    out[fill[by_tail ? l.tail : l.head]++] = i;
  }
}

RoadGraph NetworkFromTables(const csv::Table& nodes_table,
                            const csv::Table& links_table) {
  std::vector<Node> nodes;
  std::unordered_map<NodeId, std::size_t> node_index;
  for (const auto& row : nodes_table.rows()) {
    Node n;
    n.id = nodes_table.Int(row, 0);
    n.lon = nodes_table.Double(row, 1);
    n.lat = nodes_table.Double(row, 2);
    if (!row.fields[3].empty()) {
      for (auto& f : csv::Split(row.fields[3], ';')) {
        if (!f.empty()) n.flags.push_back(std::move(f));
      }
    }
    if (!node_index.emplace(n.id, nodes.size()).second) {
      Fail(ErrorKind::kIntegrity, nodes_table.source() + ":" +
                                      std::to_string(row.line) +
                                      ": duplicate node_id " +
                                      std::to_string(n.id));
    }
    nodes.push_back(std::move(n));
  }

  struct Pending {
    Link link;
    bool two_way;
  };
  std::vector<Pending> pending;
  LinkId max_id = -1;
  for (const auto& row : links_table.rows()) {
    Link l;
    l.id = links_table.Int(row, 0);
    NodeId tail = links_table.Int(row, 1);
    NodeId head = links_table.Int(row, 2);
    l.length_m = links_table.Double(row, 3);
    l.road_class = row.fields[4];
    l.is_virtual = l.road_class == kVirtualClass;
    const std::string& oneway = row.fields[5];
    if (oneway != "0" && oneway != "1") {
      links_table.FailAt(row, "oneway must be 0 or 1");
    }
    if (!row.fields[6].empty()) {
      l.count = links_table.Double(row, 6);
      if (*l.count < 0) links_table.FailAt(row, "negative count");
    }
    auto t = node_index.find(tail);
    auto h = node_index.find(head);
    if (t == node_index.end() || h == node_index.end()) {
      Fail(ErrorKind::kIntegrity,
           links_table.source() + ":" + std::to_string(row.line) +
               ": link " + std::to_string(l.id) + " references unknown node " +
               std::to_string(t == node_index.end() ? tail : head));
    }
    l.tail = t->second;
    l.head = h->second;
    max_id = std::max(max_id, l.id);
    pending.push_back({std::move(l), oneway == "0"});
  }

  // Reverse directions of two-way rows get fresh ids above every row id, in
  // file order.
  std::vector<Link> links;
  LinkId next_id = max_id + 1;
  for (auto& p : pending) {
    links.push_back(p.link);
    if (p.two_way) {
      Link rev = p.link;
      rev.id = next_id++;
      std::swap(rev.tail, rev.head);
      links.push_back(std::move(rev));
    }
  }
  return RoadGraph(std::move(nodes), std::move(links));
}

}  // namespace

bool Node::HasFlag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i].id, i).second) {
      Fail(ErrorKind::kIntegrity,
           "duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!link_index_.emplace(l.id, i).second) {
      Fail(ErrorKind::kIntegrity, "duplicate link id " + std::to_string(l.id));
    }
    if (l.tail >= nodes_.size() || l.head >= nodes_.size()) {
      Fail(ErrorKind::kIntegrity,
           "link " + std::to_string(l.id) + " references a missing node");
    }
    if (l.is_virtual ? l.length_m != 0.0 : !(l.length_m > 0.0)) {
      Fail(ErrorKind::kIntegrity,
           "link " + std::to_string(l.id) +
               (l.is_virtual ? ": virtual links must have zero length"
                             : ": road links must have positive length"));
    }
  }
  BuildCsr(nodes_.size(), links_, true, out_offsets_, out_links_);
  BuildCsr(nodes_.size(), links_, false, in_offsets_, in_links_);
}

std::optional<std::size_t> RoadGraph::FindNode(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RoadGraph::FindLink(LinkId id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> RoadGraph::OutLinks(std::size_t node) const {
  return {out_links_.data() + out_offsets_[node],
          out_offsets_[node + 1] - out_offsets_[node]};
}

std::span<const std::size_t> RoadGraph::InLinks(std::size_t node) const {
  return {in_links_.data() + in_offsets_[node],
          in_offsets_[node + 1] - in_offsets_[node]};
}

LinkId RoadGraph::MaxLinkId() const {
  LinkId m = -1;
  for (const Link& l : links_) m = std::max(m, l.id);
  return m;
}

ScannerSet::ScannerSet(std::vector<Scanner> scanners)
    : scanners_(std::move(scanners)) {
  for (std::size_t i = 0; i < scanners_.size(); ++i) {
    if (!(scanners_[i].range_m >= 0.0)) {
      Fail(ErrorKind::kIntegrity, "scanner " + std::to_string(scanners_[i].id) +
                                      " has a negative range");
    }
    if (!index_.emplace(scanners_[i].id, i).second) {
      Fail(ErrorKind::kIntegrity,
           "duplicate scanner id " + std::to_string(scanners_[i].id));
    }
  }
}

std::optional<std::size_t> ScannerSet::Find(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::set<NodeId> ScannerMap::ProtectedNodes() const {
  std::set<NodeId> out;
  for (const auto& v : nodes) out.insert(v.begin(), v.end());
  return out;
}

std::size_t LinkMap::Count(LinkStatus status) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [&](const LinkMapEntry& e) { return e.status == status; }));
}

double HaversineMeters(double lon1, double lat1, double lon2, double lat2) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = lat1 * kDeg, phi2 = lat2 * kDeg;
  const double dphi = (lat2 - lat1) * kDeg, dlambda = (lon2 - lon1) * kDeg;
  const double s1 = std::sin(dphi / 2), s2 = std::sin(dlambda / 2);
  const double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

RoadGraph LoadNetwork(const std::filesystem::path& nodes_csv,
                      const std::filesystem::path& links_csv) {
  auto nodes = csv::Table::Read(nodes_csv, kNodesHeader);
  auto links = csv::Table::Read(links_csv, kLinksHeader);
  return NetworkFromTables(nodes, links);
}

RoadGraph ParseNetwork(std::string_view nodes_csv, std::string_view links_csv) {
  auto nodes = csv::Table::Parse(nodes_csv, "nodes.csv", kNodesHeader);
  auto links = csv::Table::Parse(links_csv, "links.csv", kLinksHeader);
  return NetworkFromTables(nodes, links);
}

namespace {

ScannerSet ScannersFromTable(const csv::Table& table) {
  std::vector<Scanner> out;
  for (const auto& row : table.rows()) {
    Scanner s;
    s.id = table.Int(row, 0);
    s.lon = table.Double(row, 1);
    s.lat = table.Double(row, 2);
    s.range_m = table.Double(row, 3);
    if (s.range_m < 0) table.FailAt(row, "negative range");
    out.push_back(s);
  }
  return ScannerSet(std::move(out));
}

}  // namespace

ScannerSet LoadScanners(const std::filesystem::path& scanners_csv) {
  return ScannersFromTable(csv::Table::Read(scanners_csv, kScannersHeader));
}

ScannerSet ParseScanners(std::string_view scanners_csv) {
  return ScannersFromTable(
      csv::Table::Parse(scanners_csv, "scanners.csv", kScannersHeader));
}

void WriteNodes(const RoadGraph& graph, const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << csv::Join(kNodesHeader, ',') << '\n';
  for (const Node& n : graph.nodes()) {
    out << n.id << ',' << csv::FormatDouble(n.lon) << ','
        << csv::FormatDouble(n.lat) << ',' << csv::Join(n.flags, ';') << '\n';
  }
}

void WriteLinks(const RoadGraph& graph, const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << csv::Join(kLinksHeader, ',') << '\n';
  for (const Link& l : graph.links()) {
    out << l.id << ',' << graph.node(l.tail).id << ',' << graph.node(l.head).id
        << ',' << csv::FormatDouble(l.length_m) << ',' << l.road_class << ",1,"
        << (l.count ? csv::FormatDouble(*l.count) : std::string()) << '\n';
  }
}

void WriteScanners(const ScannerSet& scanners,
                   const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << csv::Join(kScannersHeader, ',') << '\n';
  for (const Scanner& s : scanners.scanners()) {
    out << s.id << ',' << csv::FormatDouble(s.lon) << ','
        << csv::FormatDouble(s.lat) << ',' << csv::FormatDouble(s.range_m)
        << '\n';
  }
}

void WriteLinkMap(const LinkMap& map, const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << "orig_link_id,status,target_link_id\n";
  for (const auto& e : map.entries) {
    out << e.original_id << ',';
    switch (e.status) {
      case LinkStatus::kKept:
        out << "kept," << e.original_id;
        break;
      case LinkStatus::kRemoved:
        out << "removed,";
        break;
      case LinkStatus::kMerged:
        out << "merged," << e.target_id;
        break;
    }
    out << '\n';
  }
}

namespace {

// Rebuilds a graph from a subset of links; nodes not touched by any kept link
// are dropped unless `keep_node` says otherwise.
FilterResult Subgraph(const RoadGraph& graph, const std::vector<char>& keep_link,
                      const std::vector<char>& keep_node) {
  FilterResult r;
  r.node_translation.assign(graph.node_count(), std::nullopt);
  r.link_translation.assign(graph.link_count(), std::nullopt);
  std::vector<char> used(graph.node_count(), 0);
  for (std::size_t i = 0; i < graph.link_count(); ++i) {
    if (!keep_link[i]) continue;
    used[graph.link(i).tail] = used[graph.link(i).head] = 1;
  }
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    if (used[i] || (!keep_node.empty() && keep_node[i])) {
      r.node_translation[i] = nodes.size();
      nodes.push_back(graph.node(i));
    }
  }
  std::vector<Link> links;
  for (std::size_t i = 0; i < graph.link_count(); ++i) {
    if (!keep_link[i]) continue;
    Link l = graph.link(i);
    l.tail = *r.node_translation[l.tail];
    l.head = *r.node_translation[l.head];
    r.link_translation[i] = links.size();
    links.push_back(std::move(l));
  }
  r.graph = RoadGraph(std::move(nodes), std::move(links));
  return r;
}

}  // namespace

FilterResult FilterByClass(const RoadGraph& graph,
                           const std::set<std::string>& keep) {
  std::vector<char> keep_link(graph.link_count(), 0);
  for (std::size_t i = 0; i < graph.link_count(); ++i) {
    const Link& l = graph.link(i);
    keep_link[i] = l.is_virtual || keep.count(l.road_class) > 0;
  }
  FilterResult r = Subgraph(graph, keep_link, {});
  if (r.graph.link_count() == 0) {
    r.empty_warning = true;
    log::Warn("class filter removed every link");
  }
  return r;
}

RoadGraph StripVirtual(const RoadGraph& graph) {
  std::vector<char> keep_link(graph.link_count(), 0);
  for (std::size_t i = 0; i < graph.link_count(); ++i) {
    keep_link[i] = !graph.link(i).is_virtual;
  }
  std::vector<char> keep_node(graph.node_count(), 0);
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    keep_node[i] = !graph.node(i).HasFlag(kScannerFlag);
  }
  // Keep isolated road nodes: stripping must not change the road network.
  FilterResult r = Subgraph(graph, keep_link, keep_node);
  return std::move(r.graph);
}

ScannerMap MapScanners(const RoadGraph& graph, const ScannerSet& scanners) {
  ScannerMap map;
  map.nodes.resize(scanners.size());
  for (std::size_t s = 0; s < scanners.size(); ++s) {
    const Scanner& sc = scanners[s];
    for (const Node& n : graph.nodes()) {
      if (n.HasFlag(kScannerFlag)) continue;
      if (HaversineMeters(sc.lon, sc.lat, n.lon, n.lat) <= sc.range_m) {
        map.nodes[s].push_back(n.id);
      }
    }
    std::sort(map.nodes[s].begin(), map.nodes[s].end());
    if (map.nodes[s].empty()) {
      map.unmapped_scanners.push_back(sc.id);
      log::Warn("scanner " + std::to_string(sc.id) + " covers no node");
    }
  }
  return map;
}

namespace {

// Mutable working copy used by Simplify. Link slots are indexed like the
// input graph; contraction rewrites the surviving slot in place.
class Contractor {
 public:
  Contractor(const RoadGraph& graph, const std::set<NodeId>& protected_nodes)
      : graph_(graph) {
    const std::size_t n = graph.node_count();
    const std::size_t m = graph.link_count();
    tail_.resize(m);
    head_.resize(m);
    length_.resize(m);
    count_sum_.assign(m, 0.0);
    count_n_.assign(m, 0);
    alive_.assign(m, 1);
    status_.assign(m, LinkStatus::kKept);
    target_.assign(m, 0);
    frozen_.assign(n, 0);
    out_.resize(n);
    in_.resize(n);
    for (std::size_t i = 0; i < m; ++i) {
      const Link& l = graph.link(i);
      tail_[i] = l.tail;
      head_[i] = l.head;
      length_[i] = l.length_m;
      if (l.count) {
        count_sum_[i] = *l.count;
        count_n_[i] = 1;
      }
      out_[l.tail].push_back(i);
      in_[l.head].push_back(i);
      if (l.is_virtual) frozen_[l.tail] = frozen_[l.head] = 1;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (protected_nodes.count(graph.node(v).id)) frozen_[v] = 1;
      if (graph.node(v).HasFlag(kScannerFlag)) frozen_[v] = 1;
    }
    order_.resize(n);
    for (std::size_t v = 0; v < n; ++v) order_[v] = v;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return graph.node(a).id < graph.node(b).id;
    });
  }

  SimplifyResult Run() {
    int iterations = 0;
    bool changed = true;
    while (changed) {
      ++iterations;
      changed = false;
      for (std::size_t v : order_) {
        if (!frozen_[v]) changed |= ReduceNode(v);
      }
      changed |= RemoveLoopsAndDuplicates();
    }
    return Finish(iterations);
  }

 private:
  void Remove(std::size_t l) {
    Detach(l);
    alive_[l] = 0;
    status_[l] = LinkStatus::kRemoved;
  }

  void Detach(std::size_t l) {
    auto erase = [l](std::vector<std::size_t>& v) {
      v.erase(std::find(v.begin(), v.end(), l));
    };
    erase(out_[tail_[l]]);
    erase(in_[head_[l]]);
  }

  // Appends `next` to `first` (series merge) and marks `next` merged.
  void Concatenate(std::size_t first, std::size_t next) {
    Detach(first);
    Detach(next);
    head_[first] = head_[next];
    length_[first] += length_[next];
    count_sum_[first] += count_sum_[next];
    count_n_[first] += count_n_[next];
    out_[tail_[first]].push_back(first);
    in_[head_[first]].push_back(first);
    alive_[next] = 0;
    status_[next] = LinkStatus::kMerged;
    target_[next] = first;
  }

  std::size_t Other(std::size_t l, std::size_t v) const {
    return tail_[l] == v ? head_[l] : tail_[l];
  }

  bool ReduceNode(std::size_t v) {
    auto& in = in_[v];
    auto& out = out_[v];
    const std::size_t total = in.size() + out.size();
    if (total == 0) return false;
    std::set<std::size_t> neighbors;
    for (std::size_t l : in) neighbors.insert(tail_[l]);
    for (std::size_t l : out) neighbors.insert(head_[l]);
    if (neighbors.count(v)) return false;  // self-loop, handled in step 2

    // Dead end: a single link, two links to one neighbour, or a pure sink or
    // source that no path can cross.
    if (total == 1 || (total == 2 && neighbors.size() == 1) || in.empty() ||
        out.empty()) {
      std::vector<std::size_t> incident(in.begin(), in.end());
      incident.insert(incident.end(), out.begin(), out.end());
      for (std::size_t l : incident) Remove(l);
      return true;
    }
    // One-way pass-through.
    if (in.size() == 1 && out.size() == 1) {
      Concatenate(in[0], out[0]);
      return true;
    }
    if (neighbors.size() != 2) return false;
    // Two-way pass-through: u<->v<->w.
    if (in.size() == 2 && out.size() == 2) {
      if (tail_[in[0]] == tail_[in[1]] || head_[out[0]] == head_[out[1]]) {
        return false;  // parallel links; wait for duplicate removal
      }
      std::size_t a_in = in[0], b_in = in[1];
      std::size_t a_out = head_[out[0]] == tail_[b_in] ? out[0] : out[1];
      std::size_t b_out = a_out == out[0] ? out[1] : out[0];
      Concatenate(a_in, a_out);
      Concatenate(b_in, b_out);
      return true;
    }
    // Pass-through in one direction, dead end in the other: drop the U-turn
    // stub now; the remaining one-way pass-through contracts next pass.
    if (total == 3) {
      const bool out_major = out.size() == 2;
      const auto& major = out_major ? out : in;
      const auto& minor = out_major ? in : out;
      std::size_t m0 = Other(major[0], v), m1 = Other(major[1], v);
      if (m0 == m1) return false;
      std::size_t minor_peer = Other(minor[0], v);
      Remove(m0 == minor_peer ? major[0] : major[1]);
      return true;
    }
    return false;
  }

  bool RemoveLoopsAndDuplicates() {
    bool changed = false;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>>
        groups;
    for (std::size_t l = 0; l < alive_.size(); ++l) {
      if (!alive_[l] || graph_.link(l).is_virtual) continue;
      if (tail_[l] == head_[l]) {
        Remove(l);
        changed = true;
        continue;
      }
      groups[{tail_[l], head_[l]}].push_back(l);
    }
    for (auto& [key, members] : groups) {
      if (members.size() < 2) continue;
      std::size_t keep = *std::min_element(
          members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return std::tie(length_[a], graph_.link(a).id) <
                   std::tie(length_[b], graph_.link(b).id);
          });
      // Parallel merge sums the counts carried by each link.
      double total = 0.0;
      bool any = false;
      for (std::size_t l : members) {
        if (count_n_[l]) {
          total += count_sum_[l] / count_n_[l];
          any = true;
        }
      }
      for (std::size_t l : members) {
        if (l == keep) continue;
        Detach(l);
        alive_[l] = 0;
        status_[l] = LinkStatus::kMerged;
        target_[l] = keep;
      }
      if (any) {
        count_sum_[keep] = total;
        count_n_[keep] = 1;
      }
      changed = true;
    }
    return changed;
  }

  SimplifyResult Finish(int iterations) {
    const std::size_t m = alive_.size();
    SimplifyResult result;
    result.iterations = iterations;
    result.link_map.entries.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
      // Follow merge chains; a chain ending at a removed link means the road
      // it was folded into disappeared.
      std::size_t cur = l;
      while (status_[cur] == LinkStatus::kMerged) cur = target_[cur];
      LinkMapEntry& e = result.link_map.entries[l];
      e.original_id = graph_.link(l).id;
      if (cur == l) {
        e.status = status_[l];
      } else if (status_[cur] == LinkStatus::kRemoved) {
        e.status = LinkStatus::kRemoved;
      } else {
        e.status = LinkStatus::kMerged;
        e.target_id = graph_.link(cur).id;
      }
    }

    std::vector<char> used(graph_.node_count(), 0);
    for (std::size_t l = 0; l < m; ++l) {
      if (alive_[l]) used[tail_[l]] = used[head_[l]] = 1;
    }
    std::vector<std::size_t> remap(graph_.node_count(), 0);
    std::vector<Node> nodes;
    for (std::size_t v = 0; v < graph_.node_count(); ++v) {
      if (!used[v]) continue;
      remap[v] = nodes.size();
      nodes.push_back(graph_.node(v));
    }
    std::vector<Link> links;
    for (std::size_t l = 0; l < m; ++l) {
      if (!alive_[l]) continue;
      Link link = graph_.link(l);
      link.tail = remap[tail_[l]];
      link.head = remap[head_[l]];
      link.length_m = length_[l];
      link.count.reset();
      if (count_n_[l]) link.count = count_sum_[l] / count_n_[l];
      links.push_back(std::move(link));
    }
    result.graph = RoadGraph(std::move(nodes), std::move(links));
    return result;
  }

  const RoadGraph& graph_;
  std::vector<std::size_t> tail_, head_;
  std::vector<double> length_, count_sum_;
  std::vector<int> count_n_;
  std::vector<char> alive_;
  std::vector<LinkStatus> status_;
  std::vector<std::size_t> target_;
  std::vector<char> frozen_;
  std::vector<std::vector<std::size_t>> out_, in_;
  std::vector<std::size_t> order_;
};

}  // namespace

SimplifyResult Simplify(const RoadGraph& graph,
                        const std::set<NodeId>& protected_nodes) {
  SimplifyResult r = Contractor(graph, protected_nodes).Run();
  log::Info("simplify: " + std::to_string(graph.link_count()) + " -> " +
            std::to_string(r.graph.link_count()) + " links in " +
            std::to_string(r.iterations) + " passes");
  return r;
}

AttachResult AttachVirtualScannerLinks(const RoadGraph& graph,
                                       const ScannerSet& scanners,
                                       const ScannerMap& map) {
  AttachResult result;
  std::vector<Node> nodes = graph.nodes();
  std::vector<Link> links = graph.links();
  LinkId next_id = graph.MaxLinkId() + 1;
  for (std::size_t s = 0; s < scanners.size(); ++s) {
    const Scanner& sc = scanners[s];
    if (graph.FindNode(sc.id)) {
      Fail(ErrorKind::kIntegrity, "scanner id " + std::to_string(sc.id) +
                                      " collides with a road node id");
    }
    const std::size_t scanner_node = nodes.size();
    nodes.push_back(Node{sc.id, sc.lon, sc.lat, {std::string(kScannerFlag)}});
    std::size_t attached = 0;
    for (NodeId id : map.nodes.at(s)) {
      auto road = graph.FindNode(id);
      if (!road) continue;  // contracted away or isolated
      Link out{next_id++, scanner_node, *road, 0.0,
               std::string(kVirtualClass), true, std::nullopt};
      Link in{next_id++, *road, scanner_node, 0.0,
              std::string(kVirtualClass), true, std::nullopt};
      links.push_back(std::move(out));
      links.push_back(std::move(in));
      ++attached;
    }
    if (attached == 0) {
      result.scanners_without_links.push_back(sc.id);
      log::Warn("scanner " + std::to_string(sc.id) + " has no virtual links");
    }
  }
  result.graph = RoadGraph(std::move(nodes), std::move(links));
  return result;
}

IncidenceOperators::IncidenceOperators(const RoadGraph& graph)
    : node_count_(graph.node_count()) {
  tail_.reserve(graph.link_count());
  head_.reserve(graph.link_count());
  for (const Link& l : graph.links()) {
    tail_.push_back(l.tail);
    head_.push_back(l.head);
  }
}

std::vector<std::size_t> ShortestPathTree::PathTo(const RoadGraph& graph,
                                                  std::size_t target) const {
  std::vector<std::size_t> path;
  if (!Reaches(target)) return path;
  std::size_t cur = target;
  while (cur != source) {
    std::size_t l = *parent_link[cur];
    path.push_back(l);
    cur = graph.link(l).tail;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

ShortestPathTree DijkstraImpl(const RoadGraph& graph, std::size_t source,
                              std::optional<std::size_t> target,
                              const std::vector<char>& no_transit,
                              const std::vector<char>& banned_links,
                              const std::vector<char>& banned_nodes) {
  const std::size_t n = graph.node_count();
  ShortestPathTree tree;
  tree.source = source;
  tree.distance.assign(n, ShortestPathTree::kUnreachable);
  tree.parent_link.assign(n, std::nullopt);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  tree.distance[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    if (target && v == *target) break;
    if (v != source && !no_transit.empty() && no_transit[v]) continue;
    for (std::size_t l : graph.OutLinks(v)) {
      if (!banned_links.empty() && banned_links[l]) continue;
      std::size_t w = graph.link(l).head;
      if (!banned_nodes.empty() && banned_nodes[w]) continue;
      double nd = d + graph.link(l).length_m;
      if (nd < tree.distance[w]) {
        tree.distance[w] = nd;
        tree.parent_link[w] = l;
        heap.emplace(nd, w);
      }
    }
  }
  return tree;
}

double PathLength(const RoadGraph& graph, const std::vector<std::size_t>& path) {
  double s = 0.0;
  for (std::size_t l : path) s += graph.link(l).length_m;
  return s;
}

}  // namespace

ShortestPathTree Dijkstra(const RoadGraph& graph, std::size_t source,
                          const std::vector<char>& no_transit,
                          const std::vector<char>& banned_links,
                          const std::vector<char>& banned_nodes) {
  return DijkstraImpl(graph, source, std::nullopt, no_transit, banned_links,
                      banned_nodes);
}

std::vector<std::vector<std::size_t>> KShortestPaths(
    const RoadGraph& graph, std::size_t source, std::size_t target,
    std::size_t k, const std::vector<char>& no_transit) {
  std::vector<std::vector<std::size_t>> accepted;
  if (k == 0 || source == target) return accepted;
  {
    auto tree = DijkstraImpl(graph, source, target, no_transit, {}, {});
    if (!tree.Reaches(target)) return accepted;
    accepted.push_back(tree.PathTo(graph, target));
  }
  using Candidate = std::pair<double, std::vector<std::size_t>>;
  std::set<Candidate> candidates;
  std::vector<char> banned_links(graph.link_count(), 0);
  std::vector<char> banned_nodes(graph.node_count(), 0);
  while (accepted.size() < k) {
    const auto& last = accepted.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
      std::size_t spur = i == 0 ? source : graph.link(last[i - 1]).head;
      std::vector<std::size_t> root(last.begin(), last.begin() + i);
      std::fill(banned_links.begin(), banned_links.end(), 0);
      std::fill(banned_nodes.begin(), banned_nodes.end(), 0);
      for (const auto& p : accepted) {
        if (p.size() > i && std::equal(root.begin(), root.end(), p.begin())) {
          banned_links[p[i]] = 1;
        }
      }
      banned_nodes[source] = spur != source;
      for (std::size_t l : root) {
        std::size_t h = graph.link(l).head;
        if (h != spur) banned_nodes[h] = 1;
      }
      auto tree = DijkstraImpl(graph, spur, target, no_transit, banned_links,
                               banned_nodes);
      if (!tree.Reaches(target)) continue;
      auto spur_path = tree.PathTo(graph, target);
      std::vector<std::size_t> full = root;
      full.insert(full.end(), spur_path.begin(), spur_path.end());
      candidates.emplace(PathLength(graph, full), std::move(full));
    }
    // Drop candidates already accepted.
    while (!candidates.empty() &&
           std::find(accepted.begin(), accepted.end(),
                     candidates.begin()->second) != accepted.end()) {
      candidates.erase(candidates.begin());
    }
    if (candidates.empty()) break;
    accepted.push_back(candidates.begin()->second);
    candidates.erase(candidates.begin());
  }
  return accepted;
}

SimilarityOperator BuildSimilarityOperator(
    const RoadGraph& graph, const std::vector<std::size_t>& scanner_nodes,
    const std::vector<char>& no_transit, double d0_m, double cutoff_m) {
  if (!(d0_m > 0.0)) Fail(ErrorKind::kArgument, "d0 must be positive");
  SimilarityOperator op;
  op.scanner_count = scanner_nodes.size();
  for (std::size_t i = 0; i < scanner_nodes.size(); ++i) {
    auto tree = Dijkstra(graph, scanner_nodes[i], no_transit);
    for (std::size_t j = 0; j < scanner_nodes.size(); ++j) {
      if (i == j) continue;
      double d = tree.distance[scanner_nodes[j]];
      if (d <= cutoff_m) {
        op.rows.push_back({i, j, d, std::exp(-d / d0_m)});
      }
    }
  }
  return op;
}

}  // namespace lodem
