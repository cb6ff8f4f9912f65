#pragma once

// GMoM-HC: hard clustering by continuously-updated generalized method of
// moments. Each (cluster, attribute) block carries the two moment conditions
// m = [x - mu, (x - mu)^2 - kappa v(mu|alpha)] and a 2x2 weight matrix.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "adaclust/matrix.hpp"
#include "adaclust/numopt.hpp"
#include "adaclust/soft_cluster.hpp"

namespace adaclust {

// Row-major 2x2.
using Mat2 = std::array<double, 4>;

struct MomentBlock {
  std::array<double, 2> mbar{};
  Mat2 W{};
};

struct GmomConfig {
  int max_iter = 1000;
  // Raw second moment x^2 - kappa v(mu) instead of the centered one.
  bool literal_moments = false;
  // Lighter variant: means fixed at the cluster averages, diagonal weights.
  bool light = false;
  // Pseudo-samples added to every cluster at its k-means++ seed.
  double prior_weight = 0.0;
  BoxOptions box{1e-10, 500, 10, 1e-4};
  std::uint64_t seed = 0;
};

struct GmomResult {
  std::vector<int> assign;
  MixtureParams params;
  std::vector<double> objective_trace;
  double objective = 0.0;
  int iterations = 0;
};

std::array<double, 2> moment_vector(double x, double mu, double kappa, double alpha,
                                    const FamilySpec& family, bool literal = false);
std::array<double, 2> moment_vector(std::span<const double> x, std::size_t h, std::size_t j,
                                    const MixtureParams& lambda, bool literal = false);

// (S + r I)^-1 with r = 1e-8 trace(S) / 2. SingularBlock when trace(S) = 0.
Mat2 ridge_inverse(const Mat2& S);

// Weight matrix of one block from the attribute values of its cluster.
Mat2 weight_matrix(std::span<const double> values, double mu, double kappa, double alpha,
                   const FamilySpec& family, bool literal = false);

// Pseudo-sample locations used by the Bayesian variant: K x J, weight b.
struct PseudoSamples {
  Matrix location;
  double weight = 0.0;
};

// Sum over (h, j) of mbar' W mbar, W evaluated at lambda.
double cugmom_objective(const Matrix& X, const std::vector<int>& assign,
                        const MixtureParams& lambda, const GmomConfig& config = {},
                        const PseudoSamples* prior = nullptr);

std::vector<MomentBlock> moment_blocks(const Matrix& X, const std::vector<int>& assign,
                                       const MixtureParams& lambda, const GmomConfig& config = {},
                                       const PseudoSamples* prior = nullptr);

// Starting lambda for a partition: cluster means, default alpha, pooled
// method-of-moments dispersion.
MixtureParams initial_lambda(const Matrix& X, const std::vector<int>& assign, std::size_t K,
                             const std::vector<FamilySpec>& families);

MixtureParams optimize_lambda(const Matrix& X, const std::vector<int>& assign,
                              const MixtureParams& lambda0, const GmomConfig& config = {},
                              const PseudoSamples* prior = nullptr);

// blocks indexed h * J + j. Ties go to the lowest cluster index.
std::vector<int> assign_step(const Matrix& X, const MixtureParams& lambda,
                             const std::vector<MomentBlock>& blocks, bool literal = false);

GmomResult fit_gmom(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                    const GmomConfig& config);
GmomResult fit_gmom_from(const Matrix& X, const std::vector<FamilySpec>& families,
                         std::vector<int> assign, std::size_t K, const GmomConfig& config,
                         const PseudoSamples* prior = nullptr);

}  // namespace adaclust
