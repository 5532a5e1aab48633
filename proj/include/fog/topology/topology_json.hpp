#pragma once

#include <json.hpp>

#include "fog/topology/topology.hpp"

namespace fog::topology {

/// Latency specs: {"dist":"tnorm","mean_ms","std_ms","min_ms"},
/// {"dist":"const","value_ms"} or {"dist":"uniform","lo_ms","hi_ms"}.
simcore::DistSpec dist_from_json(const nlohmann::json& j);
nlohmann::json dist_to_json(const simcore::DistSpec& dist);

/// Parses the `nodes`/`links`/`trust_domains` object. Structural problems
/// (missing fields, wrong types) throw TopologyError; semantic ones are left
/// to validate_topology().
Topology topology_from_json(const nlohmann::json& j);
nlohmann::json topology_to_json(const Topology& t);

}  // namespace fog::topology
