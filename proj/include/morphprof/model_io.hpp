#pragma once

#include "morphprof/clustering.hpp"

#include <json.hpp>

#include <string>

namespace morphprof {

inline constexpr int kModelSchemaVersion = 1;

/// Documents carry "schema_version" and "kind" ("pca", "kmeans", "gmm").
/// Doubles are written in shortest round-trip form, so reading back is exact.
nlohmann::json model_to_json(const PcaModel& m);
nlohmann::json model_to_json(const KMeansModel& m);
nlohmann::json model_to_json(const GmmModel& m);

PcaModel pca_model_from_json(const nlohmann::json& j);
KMeansModel kmeans_model_from_json(const nlohmann::json& j);
GmmModel gmm_model_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::string& path);
nlohmann::json load_json(const std::string& path);

}  // namespace morphprof
