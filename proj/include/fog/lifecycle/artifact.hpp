#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fog/capsule/capsule.hpp"
#include "fog/error.hpp"
#include "fog/simcore/rng.hpp"
#include "fog/topology/topology.hpp"

namespace fog::lifecycle {

enum class Task { object_recognition, grasp_planning, toy_dior };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

/// Inference service time on one kind of hardware, in ms.
struct ComputeTime {
  double mean_ms = 0.0;
  double std_ms = 0.0;

  bool operator==(const ComputeTime&) const = default;
};

struct WorkloadProfile {
  Task task = Task::object_recognition;
  std::uint64_t request_bytes = 0;
  std::uint64_t response_bytes = 0;
  ComputeTime cpu;
  ComputeTime gpu;
  // Hardware-specific measurements keyed by node id (e.g. a K80 cloud GPU
  // versus a Titan XP edge GPU). Falls back to cpu/gpu when absent.
  std::map<std::string, ComputeTime> by_node;
  std::int64_t mem_units = 0;

  ComputeTime compute_for(const topology::NodeSpec& node) const;
  /// Service-time distribution on `node`: normal(mean, std) truncated at 0.
  simcore::DistSpec compute_dist_for(const topology::NodeSpec& node) const;

  bool operator==(const WorkloadProfile&) const = default;
};

/// Throws LifecycleError when a mean/std is negative or non-finite.
void validate(const WorkloadProfile& profile);

/// Built-in profiles. Payloads follow the robot's sensors: a 640x480x3 RGB
/// frame for recognition, a 640x480 float32 depth frame for grasp planning
/// (answered with a 4-vector of doubles). Compute times are the edge
/// workstation's measured CPU and GPU inference times; byte sizes are
/// modeling choices.
WorkloadProfile default_profile(Task task);

/// public, or private to exactly one trust domain.
struct Taint {
  std::optional<topology::DomainId> domain;

  static Taint public_taint() { return Taint{}; }
  static Taint private_to(topology::DomainId d) { return Taint{d}; }
  bool is_private() const { return domain.has_value(); }

  bool operator==(const Taint&) const = default;
};

std::string to_string(const Taint& taint);
/// "public" or "private:<domain>".
Taint parse_taint(std::string_view text);

enum class Stage { trained, adapted, deployed, deprecated };

std::string_view to_string(Stage stage);

struct ModelArtifact {
  std::string model_id;
  std::uint32_t version = 1;
  Stage stage = Stage::trained;
  std::vector<capsule::CapsuleId> trained_on;
  Taint taint;
  WorkloadProfile profile;
  capsule::Digest weights_digest{};
  std::string produced_on;  // node that ran the training/adaptation step

  bool operator==(const ModelArtifact&) const = default;
};

class LifecycleError : public Error {
 public:
  using Error::Error;
};

class PrivacyViolation : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

/// Private capsules from more than one trust domain. A privacy violation:
/// data from at least one domain would leave it.
class MixedDomain : public PrivacyViolation {
 public:
  using PrivacyViolation::PrivacyViolation;
};

class DuplicateModel : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

class StageError : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

class CapacityExceeded : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

class NodeIsRobot : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

class UnknownModel : public LifecycleError {
 public:
  using LifecycleError::LifecycleError;
};

/// Join of capsule privacy: public iff all public, private(d) iff every
/// private capsule lives in d. Throws MixedDomain otherwise.
Taint taint_of(std::span<const capsule::CapsuleLabel> capsules);

/// Join of two taints (private absorbs public). Throws MixedDomain.
Taint join(const Taint& a, const Taint& b);

}  // namespace fog::lifecycle
