#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fog/lifecycle/artifact.hpp"

namespace fog::lifecycle {

/// With `ignore`, trained weights never inherit privacy from their data;
/// the data itself is still confined to its trust domain.
enum class TaintPolicy { propagate, ignore };

using DeploymentId = std::uint64_t;

struct Deployment {
  DeploymentId id = 0;
  std::string model_id;
  std::uint32_t version = 0;
  std::string node_id;
  bool active = true;

  bool operator==(const Deployment&) const = default;
};

/// Model registry and stage machine: train -> adapt* -> deploy -> deprecate.
///
/// Every mutating call validates completely before changing anything, so a
/// thrown error leaves the registry exactly as it was. Checks run in a fixed
/// order: privacy (MixedDomain, PrivacyViolation), NodeIsRobot, stage,
/// capacity. A call that would move private data or private weights out of
/// their trust domain therefore always fails with PrivacyViolation.
///
/// Not internally synchronized; one owner serializes mutations.
class Registry {
 public:
  explicit Registry(topology::Topology topology, TaintPolicy policy = TaintPolicy::propagate);

  const topology::Topology& topology() const { return topology_; }
  TaintPolicy policy() const { return policy_; }

  /// Version 1 of a new model, trained on `node` from `capsules`.
  const ModelArtifact& register_train(const std::string& model_id, std::span<const capsule::CapsuleLabel> capsules,
                                      const std::string& node_id, WorkloadProfile profile);

  /// New version refined on `node` with `capsules`; taint joins the parent's.
  const ModelArtifact& adapt(const std::string& model_id, std::uint32_t version,
                             std::span<const capsule::CapsuleLabel> capsules, const std::string& node_id);

  /// Makes (model_id, version) the single active version on `node`. The
  /// version it replaces there is deactivated and, once active nowhere,
  /// Deprecated. Redeploying the active version returns its id unchanged.
  DeploymentId deploy(const std::string& model_id, std::uint32_t version, const std::string& node_id);

  /// Registers an externally built artifact (e.g. from a manifest) as given.
  const ModelArtifact& import_artifact(ModelArtifact artifact);

  const ModelArtifact* find(const std::string& model_id, std::uint32_t version) const;
  const ModelArtifact& get(const std::string& model_id, std::uint32_t version) const;
  const ModelArtifact* latest(const std::string& model_id) const;

  std::vector<Deployment> active_deployments() const;
  const std::vector<Deployment>& deployment_history() const { return deployments_; }
  const Deployment* active_on(const std::string& model_id, const std::string& node_id) const;
  std::int64_t mem_used(const std::string& node_id) const;

  const std::map<std::pair<std::string, std::uint32_t>, ModelArtifact>& artifacts() const { return artifacts_; }

 private:
  const topology::NodeSpec& host_node(const std::string& node_id) const;
  void check_data_placement(std::span<const capsule::CapsuleLabel> capsules, const topology::NodeSpec& node) const;
  void check_weights_placement(const ModelArtifact& a, const topology::NodeSpec& node) const;
  Taint effective(const Taint& t) const { return policy_ == TaintPolicy::propagate ? t : Taint::public_taint(); }

  topology::Topology topology_;
  TaintPolicy policy_;
  std::map<std::pair<std::string, std::uint32_t>, ModelArtifact> artifacts_;
  std::vector<Deployment> deployments_;
  DeploymentId next_deployment_ = 1;
};

/// Digest standing in for trained weights: hash of lineage (model, version,
/// parent digest, data ids, and node).
capsule::Digest lineage_digest(const std::string& model_id, std::uint32_t version, const capsule::Digest& parent,
                               std::span<const capsule::CapsuleId> data, const std::string& node_id);

}  // namespace fog::lifecycle
