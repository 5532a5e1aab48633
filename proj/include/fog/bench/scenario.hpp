#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fog/bench/stats.hpp"
#include "fog/capsule/capsule.hpp"
#include "fog/lifecycle/manifest.hpp"
#include "fog/lifecycle/registry.hpp"
#include "fog/placement/placement.hpp"
#include "fog/serving/sim.hpp"
#include "fog/topology/topology.hpp"

namespace fog::bench {

/// Scenario loading or lifecycle failures; the CLI maps these to exit code 2.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

struct CapsuleDecl {
  std::string id;  // capsule ids derive from this name
  capsule::Privacy privacy = capsule::Privacy::public_data;
  topology::DomainId home_domain = 0;
};

struct LifecycleStep {
  enum class Op { train, adapt, deploy };
  Op op = Op::train;
  std::string model_id;
  std::optional<std::uint32_t> version;  // adapt/deploy; latest when absent
  std::string node;
  std::vector<std::string> capsules;     // train/adapt
  std::optional<std::string> expect_error;  // e.g. "PrivacyViolation"
};

struct DeploymentDecl {
  std::string model_id;
  std::optional<std::uint32_t> version;
  std::string node;
};

struct PlacementSpec {
  placement::Mode mode = placement::Mode::exact;
  double alpha = 1.0;
  double beta = 0.0;
  std::vector<std::string> candidate_hosts;
  std::vector<placement::Demand> demand;
};

struct RequestTarget {
  std::string robot;
  std::string model_id;
  std::optional<std::string> host;  // resolved from deployments when absent
};

enum class Arrival { sequential, poisson };

struct RequestSchedule {
  std::size_t count = 200;  // per target
  Arrival arrival = Arrival::sequential;
  double rate_per_s = 1.0;  // poisson only
  std::vector<RequestTarget> targets;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  topology::Topology topology;
  std::vector<lifecycle::ManifestEntry> models;
  std::vector<CapsuleDecl> capsules;
  std::vector<LifecycleStep> lifecycle;
  std::vector<DeploymentDecl> deployments;
  std::optional<PlacementSpec> placement;
  RequestSchedule requests;
  std::vector<ReferenceRow> reference;
};

/// Link latencies may use {"dist": "calibrated", "inf_mean_ms", "inf_std_ms",
/// "rtt_mean_ms", "rtt_std_ms"}; they are replaced by the calibrated one-way
/// distribution before the topology is parsed. Relative weight paths resolve
/// against `base_dir`. Throws ScenarioError.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Checks topology invariants and that every reference resolves.
void validate_scenario(const Scenario& s);

struct StepOutcome {
  std::size_t index = 0;
  std::string description;
  std::string result;  // "ok" or the error class that blocked the step
};

struct ScenarioResult {
  std::vector<serving::TimingRecord> log;  // ascending request index
  TimingSummary summary;
  std::vector<StepOutcome> steps;
  std::vector<lifecycle::Deployment> deployments;
  std::optional<placement::PlacementPlan> plan;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> requests;
};

/// Validation and placement errors surface before any request is simulated.
/// Throws ScenarioError or placement::NoFeasiblePlan.
ScenarioResult run_scenario(const Scenario& s, const RunOverrides& overrides = {});

lifecycle::Registry build_registry(const Scenario& s, std::vector<StepOutcome>* steps = nullptr);

}  // namespace fog::bench
