#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fog/error.hpp"
#include "fog/simcore/rng.hpp"

namespace fog::topology {

using DomainId = std::uint32_t;

enum class NodeKind { robot, edge, cloud };
enum class Accelerator { none, cpu, gpu };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Accelerator acc);
NodeKind parse_node_kind(std::string_view text);
Accelerator parse_accelerator(std::string_view text);

struct TrustDomain {
  DomainId id = 0;
  std::string name;
};

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::edge;
  Accelerator accelerator = Accelerator::cpu;
  DomainId trust_domain = 0;
  // Abstract memory units; calibration uses 1 unit ~ 100 MB of weights.
  std::int64_t mem_capacity = 0;
  double hourly_cost = 0.0;

  bool can_host_models() const { return kind != NodeKind::robot; }
};

/// A direct bidirectional link. Latency is one-way, in milliseconds;
/// bandwidth is in megabytes (10^6 bytes) per second and may be +inf.
struct LinkModel {
  std::string from;
  std::string to;
  simcore::DistSpec one_way_latency = simcore::Constant{0.0};
  double bandwidth = 0.0;

  bool connects(std::string_view a, std::string_view b) const {
    return (from == a && to == b) || (from == b && to == a);
  }
};

class NoRoute : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<LinkModel> links;
  std::vector<TrustDomain> domains;

  const NodeSpec* find_node(std::string_view id) const;
  const NodeSpec& node(std::string_view id) const;  // throws TopologyError
  const LinkModel* find_link(std::string_view a, std::string_view b) const;
  const LinkModel& link(std::string_view a, std::string_view b) const;  // throws NoRoute
  std::vector<const NodeSpec*> robots() const;
  std::vector<const NodeSpec*> hosts() const;
};

enum class ViolationKind {
  duplicate_node,
  duplicate_domain,
  unknown_domain,
  dangling_link,
  isolated_robot,
  robot_accelerator,
  negative_capacity,
  negative_cost,
  bad_bandwidth,
  bad_latency,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::string message;
};

/// Every invariant violation in `t`; the topology is valid iff empty.
std::vector<Violation> validate_topology(const Topology& t);

/// One-way latency draw in ms, never negative.
double sample_one_way_latency(const LinkModel& link, simcore::RngStream& stream);

/// Serialization time for `bytes` over the link, in ms.
double transmission_time(std::uint64_t bytes, const LinkModel& link);

}  // namespace fog::topology
