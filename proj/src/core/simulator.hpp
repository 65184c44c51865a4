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

// Synthetic ground-truth instances: random strongly connected networks with
// a scanner on every node, shortest-path demand, per-OD Bluetooth thinning
// and noisy partial counts.

#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "network.hpp"
#include "tensor.hpp"

namespace lodem {

struct SyntheticNetworkOptions {
  std::size_t nodes = 50;
  double avg_out_degree = 6.0;
  double extent_m = 3000.0;  // side of the square the nodes are drawn in
  double origin_lon = 153.0;
  double origin_lat = -27.5;
};

// Throws kConfig for fewer than two nodes, a degree below one, or a degree
// above nodes - 1.
Network GenerateNetwork(const SyntheticNetworkOptions& options,
                        std::uint64_t seed);

struct OdDemand {
  std::size_t origin = 0;
  std::size_t destination = 0;
  std::size_t users = 0;
  std::vector<std::size_t> path;  // link indices
};

struct Demand {
  LodTensor truth;
  std::vector<OdDemand> ods;  // sorted by (origin, destination)
  std::size_t users = 0;
};

Demand GenerateDemand(const Network& net, std::size_t users, std::uint64_t seed);

struct BluetoothSample {
  LodTensor b;
  std::vector<double> penetration;  // N_S x N_S row-major, 0 on the diagonal
  std::size_t sampled_users = 0;
};

// Throws kConfig unless 0 < low <= high <= 1.
BluetoothSample SampleBluetooth(const Demand& demand, std::size_t scanner_count,
                                double low, double high, std::uint64_t seed);

struct CountSample {
  CountObservations obs;
  std::vector<double> noise;  // realized noise per link, 0 where unmeasured
};

// Throws kConfig unless 0 < coverage <= 1 and sigma >= 0.
CountSample ObserveCounts(const Network& net, const LodTensor& truth,
                          double coverage, double sigma, std::uint64_t seed);

struct SimulationOptions {
  SyntheticNetworkOptions network;
  std::size_t users = 10000;
  double rate_low = 0.05;
  double rate_high = 0.4;
  double coverage = 0.36;
  double noise_sigma = 0.0;
};

struct Simulation {
  Network net;
  Demand demand;
  BluetoothSample bluetooth;
  CountSample counts;
  std::uint64_t seed = 0;
  SimulationOptions options;
};

// All stages seeded from one value.
Simulation Simulate(const SimulationOptions& options, std::uint64_t seed);

// nodes.csv, links.csv, scanners.csv, counts.csv, truth_lod.csv,
// bluetooth_lod.csv,
// groundtruth.json.
void WriteSimulation(const Simulation& sim, const std::filesystem::path& dir);

}  // namespace lodem
