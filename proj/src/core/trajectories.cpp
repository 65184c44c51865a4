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

#include "trajectories.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace lodem {

namespace {

const std::vector<std::string> kDetectionsHeader = {"device_hash", "scanner_id",
                                                    "timestamp_unix"};

DetectionLog DetectionsFromTable(const csv::Table& table) {
  DetectionLog log;
  log.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    Detection d;
    d.device = row.fields[0];
    if (d.device.empty()) table.FailAt(row, "empty device hash");
    d.scanner = table.Int(row, 1);
    d.timestamp = table.Int(row, 2);
    if (d.timestamp < 0) table.FailAt(row, "negative timestamp");
    log.push_back(std::move(d));
  }
  return log;
}

}  // namespace

DetectionLog LoadDetections(const std::filesystem::path& path) {
  return DetectionsFromTable(csv::Table::Read(path, kDetectionsHeader));
}

DetectionLog ParseDetections(std::string_view text) {
  return DetectionsFromTable(
      csv::Table::Parse(text, "detections.csv", kDetectionsHeader));
}

std::vector<Trip> Sessionize(const DetectionLog& log, const ScannerSet& scanners,
                             const SessionizeOptions& options,
                             SessionizeStats* stats) {
  if (options.gap_s <= 0) Fail(ErrorKind::kConfig, "gap must be positive");
  SessionizeStats local;
  SessionizeStats& st = stats ? *stats : local;

  struct Hit {
    std::int64_t t;
    std::size_t scanner;
  };
  std::map<std::string, std::vector<Hit>> by_device;
  for (const Detection& d : log) {
    auto s = scanners.Find(d.scanner);
    if (!s) {
      ++st.unknown_scanner_records;
      continue;
    }
    by_device[d.device].push_back({d.timestamp, *s});
  }

  std::vector<Trip> trips;
  for (auto& [device, hits] : by_device) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return std::tie(a.t, a.scanner) < std::tie(b.t, b.scanner);
    });
    std::size_t start = 0;
    while (start < hits.size()) {
      std::size_t end = start + 1;
      while (end < hits.size() && hits[end].t - hits[end - 1].t <= options.gap_s)
        ++end;
      Trip trip;
      trip.device = device;
      for (std::size_t h = start; h < end; ++h) {
        if (!trip.scanners.empty() && trip.scanners.back() == hits[h].scanner)
          continue;
        trip.scanners.push_back(hits[h].scanner);
        trip.timestamps.push_back(hits[h].t);
      }
      start = end;
      if (trip.scanners.size() < 2) {
        ++st.short_fragments;
        continue;
      }
      const std::int64_t t0 = trip.timestamps.front();
      if (t0 < options.window_start || t0 >= options.window_end) {
        ++st.outside_window;
        continue;
      }
      if (options.keep && !options.keep(trip)) {
        ++st.filtered;
        continue;
      }
      trip.id = trips.size();
      trips.push_back(std::move(trip));
    }
  }
  return trips;
}

std::vector<Trip> ResolvePath(const Trip& trip, const Network& net,
                              ResolveStats* stats) {
  ResolveStats local;
  ResolveStats& st = stats ? *stats : local;
  std::vector<Trip> pieces;
  Trip current;
  current.device = trip.device;
  auto flush = [&] {
    if (current.scanners.size() >= 2) {
      pieces.push_back(current);
    } else if (!current.scanners.empty()) {
      ++st.dropped_trips;
    }
    current.scanners.clear();
    current.timestamps.clear();
    current.links.clear();
  };
  for (std::size_t k = 0; k < trip.scanners.size(); ++k) {
    if (current.scanners.empty()) {
      current.scanners.push_back(trip.scanners[k]);
      current.timestamps.push_back(trip.timestamps[k]);
      continue;
    }
    const std::size_t from = net.scanner_nodes[current.scanners.back()];
    const std::size_t to = net.scanner_nodes[trip.scanners[k]];
    auto tree = Dijkstra(net.graph, from, net.terminal_only);
    if (!tree.Reaches(to)) {
      ++st.unresolved_legs;
      flush();
      current.scanners.push_back(trip.scanners[k]);
      current.timestamps.push_back(trip.timestamps[k]);
      continue;
    }
    auto leg = tree.PathTo(net.graph, to);
    current.links.insert(current.links.end(), leg.begin(), leg.end());
    current.scanners.push_back(trip.scanners[k]);
    current.timestamps.push_back(trip.timestamps[k]);
  }
  flush();
  return pieces;
}

std::vector<Trip> ResolveAll(const std::vector<Trip>& trips, const Network& net,
                             ResolveStats* stats) {
  std::vector<Trip> out;
  for (const Trip& t : trips) {
    for (Trip& piece : ResolvePath(t, net, stats)) {
      piece.id = out.size();
      out.push_back(std::move(piece));
    }
  }
  return out;
}

LodTensor BuildBluetoothLodm(const std::vector<Trip>& trips,
                             std::size_t scanner_count,
                             std::size_t link_count) {
  std::vector<TensorEntry> entries;
  for (const Trip& t : trips) {
    if (t.scanners.size() < 2) {
      Fail(ErrorKind::kArgument, "trip with fewer than two scanners");
    }
    for (std::size_t l : t.links) {
      entries.push_back({{t.scanners.front(), t.scanners.back(), l}, 1.0});
    }
  }
  return LodTensor::FromEntries(scanner_count, link_count, std::move(entries));
}

void WriteTrips(const std::vector<Trip>& trips, const Network& net,
                const std::filesystem::path& path) {
  auto out = csv::OpenForWrite(path);
  for (const Trip& t : trips) {
    nlohmann::ordered_json j;
    j["trip_id"] = t.id;
    j["device_hash"] = t.device;
    auto& sc = j["scanners"] = nlohmann::ordered_json::array();
    for (std::size_t s : t.scanners) sc.push_back(net.scanners[s].id);
    j["timestamps"] = t.timestamps;
    auto& links = j["links"] = nlohmann::ordered_json::array();
    for (std::size_t l : t.links) links.push_back(net.graph.link(l).id);
    out << j.dump() << '\n';
  }
}

}  // namespace lodem
