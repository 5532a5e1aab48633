#include "fog/lifecycle/artifact.hpp"

#include <charconv>
#include <cmath>

namespace fog::lifecycle {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::object_recognition: return "object_recognition";
    case Task::grasp_planning: return "grasp_planning";
    case Task::toy_dior: return "toy_dior";
  }
  return "?";
}

Task parse_task(std::string_view text) {
  if (text == "object_recognition") return Task::object_recognition;
  if (text == "grasp_planning") return Task::grasp_planning;
  if (text == "toy_dior") return Task::toy_dior;
  throw LifecycleError("unknown task '" + std::string(text) + "'");
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::trained: return "Trained";
    case Stage::adapted: return "Adapted";
    case Stage::deployed: return "Deployed";
    case Stage::deprecated: return "Deprecated";
  }
  return "?";
}

ComputeTime WorkloadProfile::compute_for(const topology::NodeSpec& node) const {
  if (auto it = by_node.find(node.id); it != by_node.end()) return it->second;
  return node.accelerator == topology::Accelerator::gpu ? gpu : cpu;
}

simcore::DistSpec WorkloadProfile::compute_dist_for(const topology::NodeSpec& node) const {
  const ComputeTime c = compute_for(node);
  return simcore::TruncNormal{c.mean_ms, c.std_ms, 0.0};
}

void validate(const WorkloadProfile& profile) {
  auto check = [](const ComputeTime& c, const std::string& what) {
    if (!std::isfinite(c.mean_ms) || !std::isfinite(c.std_ms) || c.mean_ms < 0.0 || c.std_ms < 0.0)
      throw LifecycleError("workload profile: " + what + " compute time must be finite and >= 0");
  };
  check(profile.cpu, "cpu");
  check(profile.gpu, "gpu");
  for (const auto& [node, c] : profile.by_node) check(c, "node '" + node + "'");
  if (profile.mem_units < 0) throw LifecycleError("workload profile: mem_units < 0");
}

WorkloadProfile default_profile(Task task) {
  WorkloadProfile p;
  p.task = task;
  switch (task) {
    case Task::object_recognition:
      p.request_bytes = 640 * 480 * 3;
      p.response_bytes = 100 * 6 * 4;  // up to 100 boxes of (x, y, w, h, class, score) float32
      p.cpu = {52.34, 4.18};
      p.gpu = {33.27, 3.09};
      p.mem_units = 2;
      break;
    case Task::grasp_planning:
      p.request_bytes = 640 * 480 * 4;
      p.response_bytes = 4 * 8;
      p.cpu = {3590.71, 327.57};
      p.gpu = {1753.65, 201.38};
      p.mem_units = 3;
      break;
    case Task::toy_dior:
      p.request_bytes = 2 * 8;
      p.response_bytes = 4 * 8;
      p.cpu = {0.05, 0.0};
      p.gpu = {0.05, 0.0};
      p.mem_units = 1;
      break;
  }
  return p;
}

std::string to_string(const Taint& taint) {
  return taint.is_private() ? "private:" + std::to_string(*taint.domain) : "public";
}

Taint parse_taint(std::string_view text) {
  if (text == "public") return Taint::public_taint();
  constexpr std::string_view prefix = "private:";
  if (text.starts_with(prefix)) {
    const auto digits = text.substr(prefix.size());
    topology::DomainId d = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) return Taint::private_to(d);
  }
  throw LifecycleError("taint must be \"public\" or \"private:<domain>\", got '" + std::string(text) + "'");
}

Taint join(const Taint& a, const Taint& b) {
  if (!a.is_private()) return b;
  if (!b.is_private()) return a;
  if (*a.domain != *b.domain)
    throw MixedDomain("private data from trust domains " + std::to_string(*a.domain) + " and " +
                      std::to_string(*b.domain) + " cannot be combined");
  return a;
}

Taint taint_of(std::span<const capsule::CapsuleLabel> capsules) {
  Taint t = Taint::public_taint();
  for (const auto& c : capsules)
    if (c.is_private()) t = join(t, Taint::private_to(c.home_domain));
  return t;
}

}  // namespace fog::lifecycle
