#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fog/lifecycle/artifact.hpp"

namespace fog::lifecycle {

/// One model manifest entry:
///   {model_id, version, task, request_bytes, response_bytes,
///    compute_ms: {cpu: {mean, std}, gpu: {mean, std}}, mem_units, taint}
/// plus the optional extensions `compute_ms_by_node` ({node_id: {mean, std}})
/// and `weights` (path to a toy_dior weights file).
struct ManifestEntry {
  ModelArtifact artifact;
  std::optional<std::string> weights_path;
};

ManifestEntry manifest_entry_from_json(const nlohmann::json& j);
nlohmann::json manifest_entry_to_json(const ManifestEntry& e);

std::vector<ManifestEntry> manifest_from_json(const nlohmann::json& j);
/// Relative weight paths are resolved against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace fog::lifecycle
