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

#include "network.hpp"

#include "csv.hpp"
#include "error.hpp"

namespace lodem {

namespace {

const std::vector<std::string> kCountsHeader = {"link_id", "count"};
const std::vector<std::string> kTensorHeader = {
    "origin_scanner", "destination_scanner", "link_id", "value"};

CountObservations CountsFromTable(const Network& net, const csv::Table& table) {
  CountObservations obs;
  obs.mask.assign(net.link_count(), 0);
  obs.counts.assign(net.link_count(), 0.0);
  for (const auto& row : table.rows()) {
    auto link = net.graph.FindLink(table.Int(row, 0));
    if (!link) table.FailAt(row, "unknown link_id " + row.fields[0]);
    double c = table.Double(row, 1);
    if (c < 0) table.FailAt(row, "negative count");
    if (obs.mask[*link]) table.FailAt(row, "duplicate link_id " + row.fields[0]);
    obs.mask[*link] = 1;
    obs.counts[*link] = c;
  }
  return obs;
}

LodTensor TensorFromTable(const Network& net, const csv::Table& table) {
  std::vector<TensorEntry> entries;
  entries.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    auto o = net.scanners.Find(table.Int(row, 0));
    auto d = net.scanners.Find(table.Int(row, 1));
    auto l = net.graph.FindLink(table.Int(row, 2));
    if (!o || !d) table.FailAt(row, "unknown scanner id");
    if (!l) table.FailAt(row, "unknown link_id " + row.fields[2]);
    double v = table.Double(row, 3);
    if (v < 0) table.FailAt(row, "negative value");
    entries.push_back({{*o, *d, *l}, v});
  }
  return LodTensor::FromEntries(net.scanner_count(), net.link_count(),
                                std::move(entries));
}

}  // namespace

Network Network::Bind(RoadGraph graph, ScannerSet scanners) {
  Network net;
  net.graph = std::move(graph);
  net.scanners = std::move(scanners);
  net.terminal_only.assign(net.graph.node_count(), 0);
  for (std::size_t v = 0; v < net.graph.node_count(); ++v) {
    net.terminal_only[v] = net.graph.node(v).HasFlag(kScannerFlag);
  }
  for (const Scanner& s : net.scanners.scanners()) {
    auto node = net.graph.FindNode(s.id);
    if (!node) {
      Fail(ErrorKind::kIntegrity,
           "scanner " + std::to_string(s.id) + " has no node in the graph");
    }
    net.scanner_nodes.push_back(*node);
  }
  return net;
}

Network Network::Load(const std::filesystem::path& nodes_csv,
                      const std::filesystem::path& links_csv,
                      const std::filesystem::path& scanners_csv) {
  return Bind(LoadNetwork(nodes_csv, links_csv), LoadScanners(scanners_csv));
}

std::size_t CountObservations::measured() const {
  std::size_t n = 0;
  for (char m : mask) n += m != 0;
  return n;
}

CountObservations LoadCounts(const Network& net,
                             const std::filesystem::path& counts_csv) {
  return CountsFromTable(net, csv::Table::Read(counts_csv, kCountsHeader));
}

CountObservations ParseCounts(const Network& net, std::string_view counts_csv) {
  return CountsFromTable(
      net, csv::Table::Parse(counts_csv, "counts.csv", kCountsHeader));
}

CountObservations CountsFromGraph(const RoadGraph& graph) {
  CountObservations obs;
  obs.mask.assign(graph.link_count(), 0);
  obs.counts.assign(graph.link_count(), 0.0);
  for (std::size_t l = 0; l < graph.link_count(); ++l) {
    if (graph.link(l).count) {
      obs.mask[l] = 1;
      obs.counts[l] = *graph.link(l).count;
    }
  }
  return obs;
}

void WriteCounts(const Network& net, const CountObservations& obs,
                 const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << "link_id,count\n";
  for (std::size_t l = 0; l < net.link_count(); ++l) {
    if (obs.mask[l]) {
      out << net.graph.link(l).id << ',' << csv::FormatDouble(obs.counts[l])
          << '\n';
    }
  }
}

LodTensor LoadTensor(const Network& net, const std::filesystem::path& path) {
  return TensorFromTable(net, csv::Table::Read(path, kTensorHeader));
}

LodTensor ParseTensor(const Network& net, std::string_view text) {
  return TensorFromTable(net,
                         csv::Table::Parse(text, "lod_sparse.csv", kTensorHeader));
}

void WriteTensor(const Network& net, const LodTensor& tensor,
                 const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  out << csv::Join(kTensorHeader, ',') << '\n';
  for (const auto& e : tensor.entries()) {
    out << net.scanners[e.key.origin].id << ','
        << net.scanners[e.key.destination].id << ','
        << net.graph.link(e.key.link).id << ','
        << csv::FormatDouble(e.value) << '\n';
  }
}

}  // namespace lodem
