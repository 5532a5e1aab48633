#include "fog/topology/topology_json.hpp"

#include <cmath>
#include <limits>

namespace fog::topology {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key))
    throw TopologyError(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw TopologyError(std::string(where) + ": field '" + key + "': " + e.what());
  }
}

double bandwidth_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (j.is_number()) return j.get<double>();
  throw TopologyError("link: bandwidth must be a number or \"inf\"");
}

}  // namespace

simcore::DistSpec dist_from_json(const json& j) {
  const auto kind = field<std::string>(j, "dist", "latency");
  if (kind == "tnorm")
    return simcore::TruncNormal{field<double>(j, "mean_ms", "tnorm"), field<double>(j, "std_ms", "tnorm"),
                                j.value("min_ms", 0.0)};
  if (kind == "const") return simcore::Constant{field<double>(j, "value_ms", "const")};
  if (kind == "uniform") return simcore::Uniform{field<double>(j, "lo_ms", "uniform"), field<double>(j, "hi_ms", "uniform")};
  throw TopologyError("latency: unknown dist '" + kind + "'");
}

json dist_to_json(const simcore::DistSpec& dist) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, simcore::Constant>) {
          return {{"dist", "const"}, {"value_ms", d.value}};
        } else if constexpr (std::is_same_v<T, simcore::Uniform>) {
          return {{"dist", "uniform"}, {"lo_ms", d.lo}, {"hi_ms", d.hi}};
        } else {
          return {{"dist", "tnorm"}, {"mean_ms", d.mean}, {"std_ms", d.std}, {"min_ms", d.min}};
        }
      },
      dist);
}

Topology topology_from_json(const json& j) {
  if (!j.is_object()) throw TopologyError("topology: expected an object");
  Topology t;
  for (const auto& d : j.value("trust_domains", json::array()))
    t.domains.push_back(TrustDomain{field<DomainId>(d, "id", "trust_domain"), d.value("name", std::string())});
  for (const auto& n : j.value("nodes", json::array())) {
    NodeSpec spec;
    spec.id = field<std::string>(n, "id", "node");
    spec.kind = parse_node_kind(field<std::string>(n, "kind", "node"));
    spec.accelerator = parse_accelerator(
        n.value("accelerator", std::string(spec.kind == NodeKind::robot ? "none" : "cpu")));
    spec.trust_domain = field<DomainId>(n, "trust_domain", "node");
    spec.mem_capacity = n.value("mem_capacity", std::int64_t{0});
    spec.hourly_cost = n.value("hourly_cost", 0.0);
    t.nodes.push_back(std::move(spec));
  }
  for (const auto& l : j.value("links", json::array())) {
    LinkModel link;
    link.from = field<std::string>(l, "from", "link");
    link.to = field<std::string>(l, "to", "link");
    if (!l.contains("one_way_latency")) throw TopologyError("link: missing field 'one_way_latency'");
    link.one_way_latency = dist_from_json(l.at("one_way_latency"));
    if (!l.contains("bandwidth")) throw TopologyError("link: missing field 'bandwidth'");
    link.bandwidth = bandwidth_from_json(l.at("bandwidth"));
    t.links.push_back(std::move(link));
  }
  return t;
}

json topology_to_json(const Topology& t) {
  json domains = json::array();
  for (const auto& d : t.domains) domains.push_back({{"id", d.id}, {"name", d.name}});
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"accelerator", to_string(n.accelerator)},
                     {"trust_domain", n.trust_domain},
                     {"mem_capacity", n.mem_capacity},
                     {"hourly_cost", n.hourly_cost}});
  json links = json::array();
  for (const auto& l : t.links) {
    json bw = std::isinf(l.bandwidth) ? json("inf") : json(l.bandwidth);
    links.push_back({{"from", l.from}, {"to", l.to}, {"one_way_latency", dist_to_json(l.one_way_latency)}, {"bandwidth", bw}});
  }
  return {{"trust_domains", domains}, {"nodes", nodes}, {"links", links}};
}

}  // namespace fog::topology
