#include "fog/topology/topology.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fog::topology {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::robot: return "robot";
    case NodeKind::edge: return "edge";
    case NodeKind::cloud: return "cloud";
  }
  return "?";
}

std::string_view to_string(Accelerator acc) {
  switch (acc) {
    case Accelerator::none: return "none";
    case Accelerator::cpu: return "cpu";
    case Accelerator::gpu: return "gpu";
  }
  return "?";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "robot") return NodeKind::robot;
  if (text == "edge") return NodeKind::edge;
  if (text == "cloud") return NodeKind::cloud;
  throw TopologyError("unknown node kind '" + std::string(text) + "'");
}

Accelerator parse_accelerator(std::string_view text) {
  if (text == "none") return Accelerator::none;
  if (text == "cpu") return Accelerator::cpu;
  if (text == "gpu") return Accelerator::gpu;
  throw TopologyError("unknown accelerator '" + std::string(text) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::duplicate_node: return "duplicate_node";
    case ViolationKind::duplicate_domain: return "duplicate_domain";
    case ViolationKind::unknown_domain: return "unknown_domain";
    case ViolationKind::dangling_link: return "dangling_link";
    case ViolationKind::isolated_robot: return "isolated_robot";
    case ViolationKind::robot_accelerator: return "robot_accelerator";
    case ViolationKind::negative_capacity: return "negative_capacity";
    case ViolationKind::negative_cost: return "negative_cost";
    case ViolationKind::bad_bandwidth: return "bad_bandwidth";
    case ViolationKind::bad_latency: return "bad_latency";
  }
  return "?";
}

const NodeSpec* Topology::find_node(std::string_view id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const NodeSpec& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const NodeSpec& Topology::node(std::string_view id) const {
  if (const auto* n = find_node(id)) return *n;
  throw TopologyError("unknown node '" + std::string(id) + "'");
}

const LinkModel* Topology::find_link(std::string_view a, std::string_view b) const {
  auto it = std::find_if(links.begin(), links.end(), [&](const LinkModel& l) { return l.connects(a, b); });
  return it == links.end() ? nullptr : &*it;
}

const LinkModel& Topology::link(std::string_view a, std::string_view b) const {
  if (const auto* l = find_link(a, b)) return *l;
  throw NoRoute("no link between '" + std::string(a) + "' and '" + std::string(b) + "'");
}

std::vector<const NodeSpec*> Topology::robots() const {
  std::vector<const NodeSpec*> out;
  for (const auto& n : nodes)
    if (n.kind == NodeKind::robot) out.push_back(&n);
  return out;
}

std::vector<const NodeSpec*> Topology::hosts() const {
  std::vector<const NodeSpec*> out;
  for (const auto& n : nodes)
    if (n.can_host_models()) out.push_back(&n);
  return out;
}

std::vector<Violation> validate_topology(const Topology& t) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, std::string subject, std::string msg) {
    out.push_back(Violation{k, std::move(subject), std::move(msg)});
  };

  std::set<DomainId> domain_ids;
  for (const auto& d : t.domains)
    if (!domain_ids.insert(d.id).second)
      add(ViolationKind::duplicate_domain, d.name, "trust domain id " + std::to_string(d.id) + " is not unique");

  std::set<std::string> node_ids;
  for (const auto& n : t.nodes) {
    if (!node_ids.insert(n.id).second) add(ViolationKind::duplicate_node, n.id, "node id is not unique");
    if (!domain_ids.contains(n.trust_domain))
      add(ViolationKind::unknown_domain, n.id, "trust domain " + std::to_string(n.trust_domain) + " is not declared");
    if (n.kind == NodeKind::robot && n.accelerator != Accelerator::none)
      add(ViolationKind::robot_accelerator, n.id, "robots must have accelerator=none");
    if (n.mem_capacity < 0) add(ViolationKind::negative_capacity, n.id, "mem_capacity < 0");
    if (!(n.hourly_cost >= 0.0)) add(ViolationKind::negative_cost, n.id, "hourly_cost < 0");
  }

  for (const auto& l : t.links) {
    const std::string name = l.from + "->" + l.to;
    for (const auto* end : {&l.from, &l.to})
      if (!node_ids.contains(*end)) add(ViolationKind::dangling_link, name, "unknown endpoint '" + *end + "'");
    if (!(l.bandwidth > 0.0)) add(ViolationKind::bad_bandwidth, name, "bandwidth must be > 0");
    try {
      simcore::validate(l.one_way_latency);
      if (simcore::support_min(l.one_way_latency) < 0.0)
        add(ViolationKind::bad_latency, name, "latency distribution has negative support");
    } catch (const simcore::ParameterError& e) {
      add(ViolationKind::bad_latency, name, e.what());
    }
  }

  for (const auto& n : t.nodes) {
    if (n.kind != NodeKind::robot) continue;
    bool reachable = false;
    for (const auto& l : t.links) {
      const std::string* other = l.from == n.id ? &l.to : (l.to == n.id ? &l.from : nullptr);
      if (!other) continue;
      const auto* peer = t.find_node(*other);
      if (peer && peer->can_host_models()) reachable = true;
    }
    if (!reachable) add(ViolationKind::isolated_robot, n.id, "robot has no link to an edge or cloud node");
  }
  return out;
}

double sample_one_way_latency(const LinkModel& link, simcore::RngStream& stream) {
  return std::max(0.0, stream.draw(link.one_way_latency));
}

double transmission_time(std::uint64_t bytes, const LinkModel& link) {
  if (bytes == 0) return 0.0;
  return static_cast<double>(bytes) / (link.bandwidth * 1e6) * 1000.0;
}

}  // namespace fog::topology
