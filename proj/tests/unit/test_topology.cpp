#include <doctest.h>

#include <cmath>
#include <limits>

#include "fog/topology/topology.hpp"
#include "fog/topology/topology_json.hpp"

using namespace fog;
using namespace fog::topology;

namespace {

LinkModel link(simcore::DistSpec d, double bw = 10.0) {
  LinkModel l;
  l.from = "robot";
  l.to = "edge";
  l.one_way_latency = d;
  l.bandwidth = bw;
  return l;
}

Topology minimal() {
  Topology t;
  t.domains = {{0, "lab"}};
  NodeSpec r;
  r.id = "robot";
  r.kind = NodeKind::robot;
  r.accelerator = Accelerator::none;
  NodeSpec e;
  e.id = "edge";
  e.kind = NodeKind::edge;
  e.mem_capacity = 4;
  t.nodes = {r, e};
  t.links = {link(simcore::Constant{1.0})};
  return t;
}

bool has(const std::vector<Violation>& v, ViolationKind k) {
  for (const auto& x : v)
    if (x.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("loopback link has zero latency") {
  simcore::RngStream s(1, "l");
  CHECK(sample_one_way_latency(link(simcore::Constant{0.0}), s) == 0.0);
}

TEST_CASE("calibrated edge-gpu link averages 43.07 ms") {
  simcore::RngStream s(5, "edge");
  const auto l = link(simcore::TruncNormal{43.065, 5.83, 10});
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_one_way_latency(l, s);
  CHECK(sum / n == doctest::Approx(43.07).epsilon(0.001));
}

TEST_CASE("same seed and stream position give the same draw") {
  const auto l = link(simcore::TruncNormal{43.065, 5.83, 10});
  simcore::RngStream a(9, "x"), b(9, "x");
  CHECK(sample_one_way_latency(l, a) == sample_one_way_latency(l, b));
}

TEST_CASE("latency draws are never negative") {
  const simcore::DistSpec dists[] = {simcore::TruncNormal{1, 50, 0}, simcore::Uniform{0, 3},
                                     simcore::Constant{0.0}, simcore::TruncNormal{0, 1, 0}};
  for (const auto& d : dists) {
    simcore::RngStream s(11, "neg");
    const auto l = link(d);
    double lo = 1e300;
    for (int i = 0; i < 100000; ++i) lo = std::min(lo, sample_one_way_latency(l, s));
    CHECK(lo >= 0.0);
  }
}

TEST_CASE("transmission time matches hand arithmetic") {
  CHECK(transmission_time(0, link(simcore::Constant{0}, 10)) == 0.0);
  CHECK(transmission_time(921600, link(simcore::Constant{0}, 10)) == doctest::Approx(92.16).epsilon(1e-12));
  CHECK(transmission_time(1000000, link(simcore::Constant{0}, 1)) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(transmission_time(1 << 20, link(simcore::Constant{0}, std::numeric_limits<double>::infinity())) == 0.0);
}

TEST_CASE("transmission time is linear in bytes and inverse in bandwidth") {
  for (std::uint64_t bytes : {1ULL, 977ULL, 123456ULL, 9999999ULL}) {
    for (double bw : {0.5, 3.0, 125.0}) {
      const double base = transmission_time(bytes, link(simcore::Constant{0}, bw));
      CHECK(transmission_time(3 * bytes, link(simcore::Constant{0}, bw)) == doctest::Approx(3 * base));
      CHECK(transmission_time(bytes, link(simcore::Constant{0}, 4 * bw)) == doctest::Approx(base / 4));
    }
  }
}

TEST_CASE("minimal topology validates") { CHECK(validate_topology(minimal()).empty()); }

TEST_CASE("dangling link is reported once") {
  auto t = minimal();
  auto l = link(simcore::Constant{1});
  l.to = "ghost";
  t.links.push_back(l);
  const auto v = validate_topology(t);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::dangling_link);
}

TEST_CASE("robot without links is isolated") {
  auto t = minimal();
  t.links.clear();
  CHECK(has(validate_topology(t), ViolationKind::isolated_robot));
}

TEST_CASE("robot linked only to another robot is isolated") {
  auto t = minimal();
  NodeSpec r2 = t.nodes[0];
  r2.id = "robot2";
  t.nodes.push_back(r2);
  LinkModel l = link(simcore::Constant{1});
  l.from = "robot2";
  l.to = "robot";
  t.links.push_back(l);
  CHECK(has(validate_topology(t), ViolationKind::isolated_robot));
}

TEST_CASE("other invariant violations are reported") {
  auto t = minimal();
  t.nodes.push_back(t.nodes[1]);
  CHECK(has(validate_topology(t), ViolationKind::duplicate_node));

  t = minimal();
  t.nodes[0].accelerator = Accelerator::gpu;
  CHECK(has(validate_topology(t), ViolationKind::robot_accelerator));

  t = minimal();
  t.nodes[1].mem_capacity = -1;
  t.nodes[1].hourly_cost = -2;
  const auto v = validate_topology(t);
  CHECK(has(v, ViolationKind::negative_capacity));
  CHECK(has(v, ViolationKind::negative_cost));

  t = minimal();
  t.links[0].bandwidth = 0;
  CHECK(has(validate_topology(t), ViolationKind::bad_bandwidth));

  t = minimal();
  t.links[0].one_way_latency = simcore::Uniform{-1, 2};
  CHECK(has(validate_topology(t), ViolationKind::bad_latency));

  t = minimal();
  t.nodes[1].trust_domain = 9;
  CHECK(has(validate_topology(t), ViolationKind::unknown_domain));

  t = minimal();
  t.domains.push_back({0, "again"});
  CHECK(has(validate_topology(t), ViolationKind::duplicate_domain));
}

TEST_CASE("link lookup is symmetric and missing links raise NoRoute") {
  const auto t = minimal();
  CHECK(t.find_link("edge", "robot") == t.find_link("robot", "edge"));
  CHECK_THROWS_AS(t.link("robot", "cloud"), NoRoute);
  CHECK_THROWS_AS(t.node("cloud"), TopologyError);
}

TEST_CASE("topology JSON round-trips") {
  auto t = minimal();
  t.links[0].one_way_latency = simcore::TruncNormal{43.065, 5.83, 10};
  t.links[0].bandwidth = std::numeric_limits<double>::infinity();
  const auto j = topology_to_json(t);
  const auto back = topology_from_json(j);
  CHECK(topology_to_json(back) == j);
  const auto& d = std::get<simcore::TruncNormal>(back.links[0].one_way_latency);
  CHECK(d.mean == 43.065);
  CHECK(d.std == 5.83);
  CHECK(d.min == 10);
  CHECK(std::isinf(back.links[0].bandwidth));
}

TEST_CASE("latency specs parse from the documented JSON form") {
  const auto d = dist_from_json(nlohmann::json::parse(R"({"dist":"tnorm","mean_ms":5,"std_ms":1,"min_ms":0})"));
  CHECK(std::get<simcore::TruncNormal>(d).mean == 5);
  CHECK(std::get<simcore::Constant>(dist_from_json(nlohmann::json::parse(R"({"dist":"const","value_ms":2})"))).value == 2);
  CHECK_THROWS_AS(dist_from_json(nlohmann::json::parse(R"({"dist":"gamma"})")), TopologyError);
  CHECK_THROWS_AS(topology_from_json(nlohmann::json::parse(R"({"nodes":[{"kind":"edge"}]})")), TopologyError);
}
