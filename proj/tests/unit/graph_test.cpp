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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "error.hpp"
#include "fixtures.hpp"
#include "graph.hpp"

using namespace lodem;
using lodem::testing::kDegPerMeter;

namespace {

constexpr double kLat = -27.5;

// Node `id` placed `x` meters east of a fixed point.
std::string NodeRow(NodeId id, double x, const std::string& flags = "") {
  std::ostringstream s;
  s.precision(12);
  s << id << ',' << 153.0 + x * kDegPerMeter / std::cos(kLat * M_PI / 180.0)
    << ',' << kLat << ',' << flags << '\n';
  return s.str();
}

const char* kNodesHead = "node_id,lon,lat,flags\n";
const char* kLinksHead = "link_id,tail,head,length_m,road_class,oneway,count\n";

}  // namespace

TEST_CASE("load network splits two-way rows") {
  const std::string nodes = std::string(kNodesHead) + NodeRow(1, 0) + NodeRow(2, 100);
  auto one = ParseNetwork(nodes, std::string(kLinksHead) + "7,1,2,100,primary,1,\n");
  CHECK(one.node_count() == 2);
  CHECK(one.link_count() == 1);

  auto two = ParseNetwork(nodes, std::string(kLinksHead) + "7,1,2,100,primary,0,5\n");
  REQUIRE(two.link_count() == 2);
  const Link& a = two.link(0);
  const Link& b = two.link(1);
  CHECK(a.tail == b.head);
  CHECK(a.head == b.tail);
  CHECK(a.length_m == b.length_m);
  CHECK(a.id != b.id);
  CHECK(b.count == 5.0);
}

TEST_CASE("load network errors") {
  const std::string nodes = std::string(kNodesHead) + NodeRow(1, 0) + NodeRow(2, 100);
  try {
    ParseNetwork(nodes, std::string(kLinksHead) + "7,1,9,100,primary,1,\n");
    FAIL("expected an integrity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIntegrity);
  }
  try {
    ParseNetwork(nodes, std::string(kLinksHead) + "7,1,2,abc,primary,1,\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(
      ParseNetwork(nodes, std::string(kLinksHead) + "7,1,2,100,primary,2,\n"),
      Error);
}

TEST_CASE("haversine") {
  CHECK(HaversineMeters(153, kLat, 153, kLat) == 0.0);
  // One degree of latitude.
  CHECK(HaversineMeters(0, 0, 0, 1) == doctest::Approx(kEarthRadiusM * M_PI / 180));
  CHECK(HaversineMeters(153, kLat, 153.01, kLat) ==
        doctest::Approx(HaversineMeters(153.01, kLat, 153, kLat)));
}

TEST_CASE("filter by class") {
  const std::string nodes = std::string(kNodesHead) + NodeRow(1, 0) +
                            NodeRow(2, 100) + NodeRow(3, 200) + NodeRow(4, 300);
  auto g = ParseNetwork(nodes, std::string(kLinksHead) +
                                   "1,1,2,100,motorway,1,\n"
                                   "2,2,3,100,footway,1,\n"
                                   "3,3,4,100,motorway,1,\n");
  auto r = FilterByClass(g, {"motorway"});
  CHECK(r.graph.link_count() == 2);
  CHECK(r.graph.node_count() == 4);
  CHECK_FALSE(r.link_translation[1].has_value());
  for (const Link& l : r.graph.links()) CHECK(l.road_class == "motorway");

  auto all = FilterByClass(g, {"motorway", "footway"});
  CHECK(all.graph.link_count() == 3);
  CHECK(all.graph.node_count() == 4);

  auto orphan = ParseNetwork(std::string(kNodesHead) + NodeRow(1, 0) +
                                 NodeRow(2, 100) + NodeRow(3, 200),
                             std::string(kLinksHead) +
                                 "1,1,2,100,motorway,1,\n2,2,3,100,footway,1,\n");
  auto o = FilterByClass(orphan, {"motorway"});
  CHECK(o.graph.node_count() == 2);
  CHECK_FALSE(o.node_translation[2].has_value());

  auto none = FilterByClass(g, {"cycleway"});
  CHECK(none.empty_warning);
  CHECK(none.graph.link_count() == 0);
}

TEST_CASE("map scanners by great-circle distance") {
  const std::string nodes = std::string(kNodesHead) + NodeRow(1, 50) +
                            NodeRow(2, 100) + NodeRow(3, 200);
  auto g = ParseNetwork(nodes, std::string(kLinksHead) +
                                   "1,1,2,50,primary,0,\n2,2,3,100,primary,0,\n");
  auto s = ParseScanners("scanner_id,lon,lat,range_m\n90,153,-27.5,150\n"
                         "91,153,-27.5,1\n");
  auto m = MapScanners(g, s);
  CHECK(m.nodes[0] == std::vector<NodeId>{1, 2});
  CHECK(m.nodes[1].empty());
  CHECK(m.unmapped_scanners == std::vector<NodeId>{91});
  CHECK(m.ProtectedNodes() == std::set<NodeId>{1, 2});
}

TEST_CASE("scanner set validation") {
  CHECK_THROWS_AS(ParseScanners("scanner_id,lon,lat,range_m\n1,0,0,5\n1,0,0,5\n"),
                  Error);
  CHECK_THROWS_AS(ParseScanners("scanner_id,lon,lat,range_m\n1,0,0,-5\n"), Error);
}

TEST_CASE("attach virtual scanner links") {
  const std::string nodes =
      std::string(kNodesHead) + NodeRow(1, 0) + NodeRow(2, 20) + NodeRow(3, 500);
  auto g = ParseNetwork(nodes, std::string(kLinksHead) +
                                   "1,1,2,20,primary,0,\n2,2,3,480,primary,0,\n");
  auto s = ParseScanners("scanner_id,lon,lat,range_m\n90,153,-27.5,50\n"
                         "91,154,-27.5,10\n");
  auto m = MapScanners(g, s);
  auto r = AttachVirtualScannerLinks(g, s, m);
  CHECK(r.graph.node_count() == g.node_count() + 2);
  CHECK(r.graph.link_count() == g.link_count() + 4);
  CHECK(r.scanners_without_links == std::vector<NodeId>{91});
  std::size_t virtual_links = 0;
  for (const Link& l : r.graph.links()) {
    if (!l.is_virtual) continue;
    ++virtual_links;
    CHECK(l.length_m == 0.0);
  }
  CHECK(virtual_links == 4);
  auto v = r.graph.FindNode(90);
  REQUIRE(v);
  CHECK(r.graph.node(*v).HasFlag(kScannerFlag));

  auto clash = ParseScanners("scanner_id,lon,lat,range_m\n2,153,-27.5,50\n");
  CHECK_THROWS_AS(AttachVirtualScannerLinks(g, clash, MapScanners(g, clash)), Error);
}

TEST_CASE("incidence tables") {
  const std::string nodes =
      std::string(kNodesHead) + NodeRow(1, 0) + NodeRow(2, 100) + NodeRow(3, 50);
  auto single = ParseNetwork(nodes, std::string(kLinksHead) + "1,1,2,100,primary,1,\n");
  IncidenceOperators one(single);
  CHECK(one.Departure(0, 0) == 1);
  CHECK(one.Arrival(1, 0) == 1);
  CHECK(one.Arrival(0, 0) == 0);
  CHECK(one.Departure(1, 0) == 0);
  CHECK(one.Arrival(2, 0) + one.Departure(2, 0) == 0);

  auto tri = ParseNetwork(nodes, std::string(kLinksHead) +
                                     "1,1,2,100,primary,1,\n2,2,3,90,primary,1,\n"
                                     "3,3,1,90,primary,1,\n");
  IncidenceOperators ops(tri);
  for (std::size_t k = 0; k < 3; ++k) {
    int balance = 0;
    for (std::size_t l = 0; l < 3; ++l) balance += ops.Arrival(k, l) - ops.Departure(k, l);
    CHECK(balance == 0);
  }
  for (std::size_t l = 0; l < 3; ++l) {
    int arrivals = 0, departures = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      arrivals += ops.Arrival(k, l);
      departures += ops.Departure(k, l);
    }
    CHECK(arrivals == 1);
    CHECK(departures == 1);
  }
  IncidenceOperators empty{RoadGraph{}};
  CHECK(empty.node_count() == 0);
  CHECK(empty.link_count() == 0);
}

TEST_CASE("dijkstra respects no-transit nodes") {
  const std::string nodes =
      std::string(kNodesHead) + NodeRow(1, 0) + NodeRow(2, 100) + NodeRow(3, 200);
  auto g = ParseNetwork(nodes, std::string(kLinksHead) +
                                   "1,1,2,100,primary,1,\n2,2,3,100,primary,1,\n"
                                   "3,1,3,500,primary,1,\n");
  auto t = Dijkstra(g, 0);
  CHECK(t.distance[2] == 200.0);
  CHECK(t.PathTo(g, 2).size() == 2);
  auto blocked = Dijkstra(g, 0, {0, 1, 0});
  CHECK(blocked.distance[2] == 500.0);
  CHECK(blocked.Reaches(1));  // may still end there

  auto paths = KShortestPaths(g, 0, 2, 3);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].size() == 2);
  CHECK(paths[1].size() == 1);
}

TEST_CASE("similarity weights and cutoff") {
  const std::string nodes = std::string(kNodesHead) + NodeRow(1, 0) +
                            NodeRow(2, 300) + NodeRow(3, 700);
  auto g = ParseNetwork(nodes, std::string(kLinksHead) +
                                   "1,1,2,300,primary,0,\n2,2,3,400,primary,0,\n");
  auto sim = BuildSimilarityOperator(g, {0, 1, 2}, {});
  REQUIRE(sim.rows.size() == 2);  // (0,1) and (1,0); 400 m is beyond the cutoff
  for (const auto& r : sim.rows) {
    CHECK(r.weight == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(r.first != r.second);
  }

  auto close = ParseNetwork(nodes, std::string(kLinksHead) +
                                       "1,1,2,100,primary,0,\n2,2,3,100,primary,0,\n");
  auto three = BuildSimilarityOperator(close, {0, 1, 2}, {});
  CHECK(three.rows.size() == 6);
  for (const auto& r : three.rows) {
    CHECK(r.weight > 0.0);
    CHECK(r.weight <= 1.0);
  }
}
