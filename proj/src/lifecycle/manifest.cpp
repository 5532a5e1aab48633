#include "fog/lifecycle/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "fog/lifecycle/registry.hpp"

namespace fog::lifecycle {

using nlohmann::json;

namespace {

ComputeTime compute_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("mean")) throw LifecycleError("manifest: " + where + " needs {mean, std}");
  return ComputeTime{j.at("mean").get<double>(), j.value("std", 0.0)};
}

json compute_to_json(const ComputeTime& c) { return {{"mean", c.mean_ms}, {"std", c.std_ms}}; }

}  // namespace

ManifestEntry manifest_entry_from_json(const json& j) {
  try {
    ManifestEntry e;
    ModelArtifact& a = e.artifact;
    a.model_id = j.at("model_id").get<std::string>();
    a.version = j.value("version", 1u);
    a.profile = default_profile(parse_task(j.at("task").get<std::string>()));
    a.profile.request_bytes = j.value("request_bytes", a.profile.request_bytes);
    a.profile.response_bytes = j.value("response_bytes", a.profile.response_bytes);
    a.profile.mem_units = j.value("mem_units", a.profile.mem_units);
    if (j.contains("compute_ms")) {
      const auto& c = j.at("compute_ms");
      if (c.contains("cpu")) a.profile.cpu = compute_from_json(c.at("cpu"), a.model_id + ".compute_ms.cpu");
      if (c.contains("gpu")) a.profile.gpu = compute_from_json(c.at("gpu"), a.model_id + ".compute_ms.gpu");
    }
    if (j.contains("compute_ms_by_node"))
      for (const auto& [node, c] : j.at("compute_ms_by_node").items())
        a.profile.by_node[node] = compute_from_json(c, a.model_id + ".compute_ms_by_node." + node);
    a.taint = parse_taint(j.value("taint", std::string("public")));
    a.stage = Stage::trained;
    validate(a.profile);
    a.weights_digest = lineage_digest(a.model_id, a.version, capsule::Digest{}, {}, "manifest");
    if (j.contains("weights")) e.weights_path = j.at("weights").get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw LifecycleError(std::string("manifest entry: ") + ex.what());
  }
}

json manifest_entry_to_json(const ManifestEntry& e) {
  const ModelArtifact& a = e.artifact;
  json j{{"model_id", a.model_id},
         {"version", a.version},
         {"task", to_string(a.profile.task)},
         {"request_bytes", a.profile.request_bytes},
         {"response_bytes", a.profile.response_bytes},
         {"compute_ms", {{"cpu", compute_to_json(a.profile.cpu)}, {"gpu", compute_to_json(a.profile.gpu)}}},
         {"mem_units", a.profile.mem_units},
         {"taint", to_string(a.taint)}};
  if (!a.profile.by_node.empty()) {
    json by_node = json::object();
    for (const auto& [node, c] : a.profile.by_node) by_node[node] = compute_to_json(c);
    j["compute_ms_by_node"] = by_node;
  }
  if (e.weights_path) j["weights"] = *e.weights_path;
  return j;
}

std::vector<ManifestEntry> manifest_from_json(const json& j) {
  if (!j.is_array()) throw LifecycleError("manifest: expected a JSON array of model entries");
  std::vector<ManifestEntry> out;
  for (const auto& entry : j) out.push_back(manifest_entry_from_json(entry));
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LifecycleError("manifest: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw LifecycleError("manifest '" + path + "': " + ex.what());
  }
  auto entries = manifest_from_json(j);
  const auto dir = std::filesystem::path(path).parent_path();
  for (auto& e : entries)
    if (e.weights_path && std::filesystem::path(*e.weights_path).is_relative())
      e.weights_path = (dir / *e.weights_path).string();
  return entries;
}

}  // namespace fog::lifecycle
