#pragma once

#include <map>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/lifecycle/artifact.hpp"
#include "fog/topology/topology.hpp"

namespace fog::placement {

struct Demand {
  std::string robot;
  std::string model_id;
  double requests_per_second = 0.0;
};

struct PlacementProblem {
  topology::Topology topology;
  std::vector<lifecycle::ModelArtifact> models;
  std::vector<Demand> demand;
  double alpha = 1.0;  // weight on demand-weighted expected rtt (ms)
  double beta = 0.0;   // weight on hourly cost of every node that hosts a model
  std::vector<std::string> candidate_hosts;  // empty: every non-robot node
};

struct PlacementPlan {
  std::map<std::string, std::string> assignment;  // model_id -> node id
  double objective_value = 0.0;
};

enum class Mode { exact, greedy };

Mode parse_mode(std::string_view text);

class PlacementError : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePlan : public PlacementError {
 public:
  using PlacementError::PlacementError;
};

class InfeasiblePlan : public PlacementError {
 public:
  using PlacementError::PlacementError;
};

enum class ViolationKind { unassigned, not_candidate, robot_host, capacity_exceeded, privacy_violation, no_route };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string model_id;  // empty for per-node violations
  std::string node_id;
  std::string message;
};

struct Feasibility {
  bool ok = true;
  std::vector<Violation> violations;
};

/// 2 * mean(one-way latency) + tx(request) + tx(response) + mean compute on `node`.
double expected_rtt(const std::string& robot, const lifecycle::WorkloadProfile& profile, const topology::NodeSpec& node,
                    const topology::Topology& topology);

/// Checks demand, weights and references; throws PlacementError.
void validate_problem(const PlacementProblem& problem);

/// Candidate hosts in ascending id order.
std::vector<std::string> candidate_hosts(const PlacementProblem& problem);

/// Capacity, privacy, robot-host and routing constraints. A model with
/// positive demand from a robot that has no link to the chosen host is a
/// no_route violation.
Feasibility feasible(const PlacementPlan& plan, const PlacementProblem& problem);

/// alpha * sum demand * expected_rtt + beta * sum hourly_cost of used nodes.
/// Throws InfeasiblePlan.
double plan_cost(const PlacementPlan& plan, const PlacementProblem& problem);

/// exact: global minimizer by branch-and-bound over all |hosts|^|models|
/// assignments (at most 1e6), ties resolved toward the lexicographically
/// smallest node-id sequence over models sorted by id.
/// greedy: models in descending total demand, each to its cheapest feasible
/// host given earlier choices.
/// Throws NoFeasiblePlan when nothing satisfies the constraints.
PlacementPlan optimize(const PlacementProblem& problem, Mode mode);

inline constexpr double kMaxExactAssignments = 1e6;

}  // namespace fog::placement
