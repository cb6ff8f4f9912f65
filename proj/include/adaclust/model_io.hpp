#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaclust/soft_cluster.hpp"

namespace adaclust {

using Json = nlohmann::ordered_json;

struct ModelDocument {
  MixtureParams params;
  std::vector<bool> logit_columns;
  std::optional<double> quasi_loglik;
  Json config = Json::object();
  std::uint64_t seed = 0;
};

// Fields in fixed order: families, alpha, kappa, pi, mu, quasi_loglik,
// config, seed.
Json model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(const Json& j);
void write_model(const std::string& path, const ModelDocument& doc);
ModelDocument read_model(const std::string& path);

// Columns row_index, cluster, then r_0..r_{K-1} when responsibilities are
// given.
void write_assignments(const std::string& path, const std::vector<int>& assign,
                       const Responsibilities* r = nullptr);
std::vector<int> read_assignments(const std::string& path);

void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

}  // namespace adaclust
