#pragma once

// One entry point for every clustering algorithm with restarts and the
// selection rule that goes with it: soft algorithms keep the restart with the
// highest quasi-log-likelihood, hard ones the lowest inertia.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adaclust/dataset.hpp"
#include "adaclust/model_io.hpp"
#include "adaclust/restarts.hpp"
#include "adaclust/soft_cluster.hpp"

namespace adaclust {

enum class Algo { AdaCluster, BregmanSoft, Gmm, KMeans, GmomHc, GmomLight };

std::string_view to_string(Algo a);
Algo algo_from_string(std::string_view s);
bool is_soft(Algo a);

struct RunConfig {
  Algo algo = Algo::AdaCluster;
  std::size_t K = 2;
  std::size_t restarts = 1000;
  int max_iter = 1000;
  double tol = 1e-8;
  // Unset: MAP for adacluster, bregman-soft and the GMoM variants, ML for gmm.
  std::optional<FitMode> mode;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> prior_b_mu;
  std::optional<double> prior_a_kappa;
  std::optional<double> prior_b_kappa;

  FitMode effective_mode() const;
};

struct RunResult {
  std::vector<int> assign;
  std::optional<Responsibilities> r;
  MixtureParams params;
  std::optional<double> quasi_loglik;
  std::optional<double> objective;   // CUGMoM objective for the GMoM variants
  double inertia = 0.0;
  int iterations = 0;
  long total_iterations = 0;
  std::string stop_reason;
  std::size_t best_index = 0;
  std::vector<RestartRecord> records;
};

// Single restart with its own seed.
RunResult run_once(const ModelData& data, const RunConfig& config, std::uint64_t seed);
RunResult run(const ModelData& data, const RunConfig& config);

// Means of the rows assigned to each cluster; rows of empty clusters are 0.
Matrix cluster_means(const Matrix& X, const std::vector<int>& assign, std::size_t K);

// Config fields that determine the result (threads excluded).
Json run_config_json(const RunConfig& config);

}  // namespace adaclust
