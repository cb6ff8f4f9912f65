#pragma once

// AdaCluster: EM for mixtures of steep EDMs whose topology alpha_j and
// dispersion kappa_j are learned per attribute and shared across components.
// Bregman soft clustering (homogeneous) and the diagonal shared-covariance
// GMM (gaussian_only) are restricted modes of the same loop.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adaclust/edm.hpp"
#include "adaclust/matrix.hpp"
#include "adaclust/rng.hpp"

namespace adaclust {

struct MixtureParams {
  std::vector<double> pi;             // K
  Matrix mu;                          // K x J
  std::vector<double> kappa;          // J
  std::vector<double> alpha;          // J
  std::vector<FamilySpec> families;   // J

  std::size_t K() const noexcept { return pi.size(); }
  std::size_t J() const noexcept { return families.size(); }
  // Throws DomainError when an invariant is violated.
  void validate() const;
};

// N x K posterior weights.
using Responsibilities = Matrix;

struct Priors {
  Matrix a_mu;                   // K x J prior mean locations
  Matrix b_mu;                   // K x J pseudo-counts
  std::vector<double> a_kappa;   // J inverse-gamma shape
  std::vector<double> b_kappa;   // J inverse-gamma scale

  static Priors none(std::size_t K, std::size_t J);
  // b_mu = 1 at the given locations, a_kappa = 1, b_kappa = 1e-9.
  static Priors defaults(const Matrix& locations, const std::vector<FamilySpec>& families);
  bool is_zero() const;
};

enum class FitMode { ML, MAP };

struct SoftConfig {
  FitMode mode = FitMode::MAP;
  bool homogeneous = false;
  bool gaussian_only = false;
  bool update_alpha = true;
  int max_iter = 1000;
  double tol = 1e-8;
  // Stop when argmax assignments are unchanged in two consecutive iterations.
  bool assignment_stop = true;
  // Added to every dispersion after its update (GMM covariance regularizer).
  double kappa_ridge = 0.0;
  // Terms with smaller responsibility are dropped while searching alpha.
  double alpha_weight_cutoff = 1e-12;
  std::uint64_t seed = 0;
};

struct EStepResult {
  Responsibilities r;
  double quasi_loglik = 0.0;
};

struct IterationInfo {
  int iteration;              // 0 for the initial E-step
  const MixtureParams& params;   // parameters that produced r
  const Responsibilities& r;
  double quasi_loglik;
  double objective;           // quasi_loglik plus log-prior terms in MAP mode
};
using IterationCallback = std::function<void(const IterationInfo&)>;

struct SoftFitResult {
  MixtureParams params;
  Responsibilities r;
  std::vector<double> trace;           // quasi-log-likelihood per E-step
  std::vector<double> objective_trace;  // penalized objective per E-step
  double quasi_loglik = 0.0;
  int iterations = 0;
  std::string stop_reason;
  std::vector<int> assignments() const;
};

// Log of the saddle-point density of x under component h, summed over the
// attributes.
double upsilon_aux(std::span<const double> x, std::size_t h, const MixtureParams& params);

EStepResult e_step(const Matrix& X, const MixtureParams& params);

std::vector<double> m_step_pi(const Responsibilities& r);
Matrix m_step_mu(const Matrix& X, const Responsibilities& r, const MixtureParams& params,
                 const Priors& priors, FitMode mode);
std::vector<double> m_step_kappa(const Matrix& X, const Responsibilities& r, const Matrix& mu,
                                 const MixtureParams& params, const Priors& priors, FitMode mode,
                                 bool homogeneous = false);
// Updates alpha (and, for continuous attributes, re-profiles kappa) one
// attribute at a time; returns the new parameters. Steps that do not improve
// the expected complete-data objective are rejected.
MixtureParams m_step_alpha(const Matrix& X, const Responsibilities& r, const MixtureParams& params,
                           const Priors& priors, FitMode mode, const SoftConfig& config);

// Log-prior contribution of the MAP model (zero in ML mode).
double log_prior(const MixtureParams& params, const Priors& priors, FitMode mode);

// Full fit with k-means++ initialization. X must already be in the model
// domain (unit-interval columns logit-transformed).
SoftFitResult fit(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                  const SoftConfig& config, const IterationCallback& callback = {});

struct SoftInit {
  MixtureParams params;
  Priors priors;
};
// Hard-assigns each row to the nearest k-means++ seed, then runs one M-step.
SoftInit initialize(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                    const SoftConfig& config, Rng& rng);

SoftFitResult fit_from(const Matrix& X, MixtureParams params, const Priors& priors,
                       const SoftConfig& config, const IterationCallback& callback = {});

// Families used by gaussian_only mode.
std::vector<FamilySpec> gaussian_families(std::size_t J);

}  // namespace adaclust
