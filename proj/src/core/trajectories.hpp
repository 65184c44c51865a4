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

// Bluetooth detections -> trips -> sampled LOD tensor B.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "network.hpp"
#include "tensor.hpp"

namespace lodem {

struct Detection {
  std::string device;  // anonymized device hash
  NodeId scanner = 0;
  std::int64_t timestamp = 0;  // seconds since epoch
};

using DetectionLog = std::vector<Detection>;

DetectionLog LoadDetections(const std::filesystem::path& path);
DetectionLog ParseDetections(std::string_view text);

struct Trip {
  std::size_t id = 0;
  std::string device;
  std::vector<std::size_t> scanners;     // scanner indices
  std::vector<std::int64_t> timestamps;  // one per scanner
  std::vector<std::size_t> links;        // resolved path, link indices
};

struct SessionizeOptions {
  std::int64_t gap_s = 3600;
  std::int64_t window_start = INT64_MIN;  // inclusive
  std::int64_t window_end = INT64_MAX;    // exclusive
  // Optional cleansing hook; trips for which it returns false are dropped.
  std::function<bool(const Trip&)> keep;
};

struct SessionizeStats {
  std::size_t unknown_scanner_records = 0;
  std::size_t short_fragments = 0;  // fewer than two distinct scanners
  std::size_t outside_window = 0;
  std::size_t filtered = 0;
};

// Groups detections per device, splits on gaps, collapses repeated scanners.
// The output does not depend on the order of the log records.
std::vector<Trip> Sessionize(const DetectionLog& log, const ScannerSet& scanners,
                             const SessionizeOptions& options,
                             SessionizeStats* stats = nullptr);

struct ResolveStats {
  std::size_t unresolved_legs = 0;
  std::size_t dropped_trips = 0;  // trips or pieces left with < 2 scanners
};

// Shortest path between consecutive scanner nodes, concatenated. A leg with
// no path splits the trip; pieces with fewer than two scanners are dropped.
std::vector<Trip> ResolvePath(const Trip& trip, const Network& net,
                              ResolveStats* stats = nullptr);

std::vector<Trip> ResolveAll(const std::vector<Trip>& trips, const Network& net,
                             ResolveStats* stats = nullptr);

// B[first scanner, last scanner, l] += 1 for every link of every trip.
LodTensor BuildBluetoothLodm(const std::vector<Trip>& trips,
                             std::size_t scanner_count, std::size_t link_count);

void WriteTrips(const std::vector<Trip>& trips, const Network& net,
                const std::filesystem::path& path);

}  // namespace lodem
