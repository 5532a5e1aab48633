#include "fog/lifecycle/registry.hpp"

#include <algorithm>

#include "fog/detail/big_endian.hpp"

namespace fog::lifecycle {

capsule::Digest lineage_digest(const std::string& model_id, std::uint32_t version, const capsule::Digest& parent,
                               std::span<const capsule::CapsuleId> data, const std::string& node_id) {
  capsule::Bytes buf(model_id.begin(), model_id.end());
  buf.push_back(0);
  detail::put_be(buf, version);
  buf.insert(buf.end(), parent.begin(), parent.end());
  for (const auto& id : data) buf.insert(buf.end(), id.begin(), id.end());
  buf.insert(buf.end(), node_id.begin(), node_id.end());
  return capsule::sha256(buf);
}

Registry::Registry(topology::Topology topology, TaintPolicy policy)
    : topology_(std::move(topology)), policy_(policy) {}

const topology::NodeSpec& Registry::host_node(const std::string& node_id) const { return topology_.node(node_id); }

void Registry::check_data_placement(std::span<const capsule::CapsuleLabel> capsules,
                                    const topology::NodeSpec& node) const {
  for (const auto& c : capsules)
    if (!capsule::placement_allowed(c, node))
      throw PrivacyViolation("capsule " + capsule::to_hex(c.capsule_id) + " is private to trust domain " +
                             std::to_string(c.home_domain) + " and may not be used on node '" + node.id +
                             "' (domain " + std::to_string(node.trust_domain) + ")");
}

void Registry::check_weights_placement(const ModelArtifact& a, const topology::NodeSpec& node) const {
  if (a.taint.is_private() && *a.taint.domain != node.trust_domain)
    throw PrivacyViolation("model " + a.model_id + " v" + std::to_string(a.version) + " is " + to_string(a.taint) +
                           " and may not be placed on node '" + node.id + "' (domain " +
                           std::to_string(node.trust_domain) + ")");
}

const ModelArtifact& Registry::register_train(const std::string& model_id,
                                              std::span<const capsule::CapsuleLabel> capsules,
                                              const std::string& node_id, WorkloadProfile profile) {
  const Taint taint = taint_of(capsules);
  const auto& node = host_node(node_id);
  check_data_placement(capsules, node);
  if (!node.can_host_models()) throw NodeIsRobot("node '" + node_id + "' is a robot and cannot train models");
  if (latest(model_id)) throw DuplicateModel("model '" + model_id + "' is already registered");
  validate(profile);

  ModelArtifact a;
  a.model_id = model_id;
  a.version = 1;
  a.stage = Stage::trained;
  for (const auto& c : capsules) a.trained_on.push_back(c.capsule_id);
  a.taint = effective(taint);
  a.profile = std::move(profile);
  a.weights_digest = lineage_digest(model_id, 1, capsule::Digest{}, a.trained_on, node_id);
  a.produced_on = node_id;
  auto [it, inserted] = artifacts_.emplace(std::make_pair(model_id, 1u), std::move(a));
  return it->second;
}

const ModelArtifact& Registry::adapt(const std::string& model_id, std::uint32_t version,
                                     std::span<const capsule::CapsuleLabel> capsules, const std::string& node_id) {
  const ModelArtifact& parent = get(model_id, version);
  const Taint taint = join(parent.taint, taint_of(capsules));
  const auto& node = host_node(node_id);
  check_data_placement(capsules, node);
  check_weights_placement(parent, node);
  if (!node.can_host_models()) throw NodeIsRobot("node '" + node_id + "' is a robot and cannot adapt models");
  if (parent.stage == Stage::deprecated)
    throw StageError("model " + model_id + " v" + std::to_string(version) + " is Deprecated");

  ModelArtifact a;
  a.model_id = model_id;
  a.version = latest(model_id)->version + 1;
  a.stage = Stage::adapted;
  a.trained_on = parent.trained_on;
  for (const auto& c : capsules)
    if (std::find(a.trained_on.begin(), a.trained_on.end(), c.capsule_id) == a.trained_on.end())
      a.trained_on.push_back(c.capsule_id);
  a.taint = effective(taint);
  a.profile = parent.profile;
  std::vector<capsule::CapsuleId> used;
  for (const auto& c : capsules) used.push_back(c.capsule_id);
  a.weights_digest = lineage_digest(model_id, a.version, parent.weights_digest, used, node_id);
  a.produced_on = node_id;
  const auto key = std::make_pair(model_id, a.version);
  auto [it, inserted] = artifacts_.emplace(key, std::move(a));
  return it->second;
}

DeploymentId Registry::deploy(const std::string& model_id, std::uint32_t version, const std::string& node_id) {
  const ModelArtifact& a = get(model_id, version);
  const auto& node = host_node(node_id);
  check_weights_placement(a, node);
  if (!node.can_host_models()) throw NodeIsRobot("node '" + node_id + "' is a robot and cannot host models");
  if (a.stage == Stage::deprecated)
    throw StageError("model " + model_id + " v" + std::to_string(version) + " is Deprecated");

  const Deployment* current = active_on(model_id, node_id);
  if (current && current->version == version) return current->id;
  if (current && current->version > version)
    throw StageError("node '" + node_id + "' already runs newer version v" + std::to_string(current->version) +
                     " of " + model_id);

  std::int64_t used = mem_used(node_id) + a.profile.mem_units;
  if (current) used -= get(model_id, current->version).profile.mem_units;
  if (used > node.mem_capacity)
    throw CapacityExceeded("deploying " + model_id + " v" + std::to_string(version) + " on '" + node_id +
                           "' needs " + std::to_string(used) + " memory units, capacity is " +
                           std::to_string(node.mem_capacity));

  // Commit.
  if (current) {
    const std::uint32_t old_version = current->version;
    for (auto& d : deployments_)
      if (d.active && d.model_id == model_id && d.node_id == node_id) d.active = false;
    const bool still_active = std::any_of(deployments_.begin(), deployments_.end(), [&](const Deployment& d) {
      return d.active && d.model_id == model_id && d.version == old_version;
    });
    if (!still_active) artifacts_.at({model_id, old_version}).stage = Stage::deprecated;
  }
  deployments_.push_back(Deployment{next_deployment_, model_id, version, node_id, true});
  artifacts_.at({model_id, version}).stage = Stage::deployed;
  return next_deployment_++;
}

const ModelArtifact& Registry::import_artifact(ModelArtifact artifact) {
  validate(artifact.profile);
  if (find(artifact.model_id, artifact.version))
    throw DuplicateModel("model '" + artifact.model_id + "' v" + std::to_string(artifact.version) +
                         " is already registered");
  if (artifact.version < 1) throw LifecycleError("model versions start at 1");
  if (const auto* newest = latest(artifact.model_id); newest && newest->version > artifact.version)
    throw LifecycleError("model '" + artifact.model_id + "' has version v" + std::to_string(newest->version) +
                         " newer than imported v" + std::to_string(artifact.version));
  artifact.taint = effective(artifact.taint);
  const auto key = std::make_pair(artifact.model_id, artifact.version);
  auto [it, inserted] = artifacts_.emplace(key, std::move(artifact));
  return it->second;
}

const ModelArtifact* Registry::find(const std::string& model_id, std::uint32_t version) const {
  auto it = artifacts_.find({model_id, version});
  return it == artifacts_.end() ? nullptr : &it->second;
}

const ModelArtifact& Registry::get(const std::string& model_id, std::uint32_t version) const {
  if (const auto* a = find(model_id, version)) return *a;
  throw UnknownModel("no model '" + model_id + "' v" + std::to_string(version));
}

const ModelArtifact* Registry::latest(const std::string& model_id) const {
  auto it = artifacts_.upper_bound({model_id, UINT32_MAX});
  if (it == artifacts_.begin()) return nullptr;
  --it;
  return it->first.first == model_id ? &it->second : nullptr;
}

std::vector<Deployment> Registry::active_deployments() const {
  std::vector<Deployment> out;
  for (const auto& d : deployments_)
    if (d.active) out.push_back(d);
  return out;
}

const Deployment* Registry::active_on(const std::string& model_id, const std::string& node_id) const {
  for (const auto& d : deployments_)
    if (d.active && d.model_id == model_id && d.node_id == node_id) return &d;
  return nullptr;
}

std::int64_t Registry::mem_used(const std::string& node_id) const {
  std::int64_t used = 0;
  for (const auto& d : deployments_)
    if (d.active && d.node_id == node_id) used += get(d.model_id, d.version).profile.mem_units;
  return used;
}

}  // namespace fog::lifecycle
