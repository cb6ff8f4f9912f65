#include "adaclust/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "adaclust/error.hpp"
#include "adaclust/evaluation.hpp"
#include "adaclust/hard_cluster.hpp"
#include "adaclust/kmeans.hpp"

namespace adaclust {
namespace {

constexpr std::pair<Algo, std::string_view> kAlgoNames[] = {
    {Algo::AdaCluster, "adacluster"}, {Algo::BregmanSoft, "bregman-soft"},
    {Algo::Gmm, "gmm"},               {Algo::KMeans, "kmeans"},
    {Algo::GmomHc, "gmom-hc"},        {Algo::GmomLight, "gmom-light"}};

void apply_prior_overrides(Priors& p, const RunConfig& c) {
  if (c.prior_b_mu) std::ranges::fill(p.b_mu.flat(), *c.prior_b_mu);
  if (c.prior_a_kappa) std::ranges::fill(p.a_kappa, *c.prior_a_kappa);
  if (c.prior_b_kappa) std::ranges::fill(p.b_kappa, *c.prior_b_kappa);
}

RunResult run_soft(const ModelData& d, const RunConfig& c, std::uint64_t seed) {
  SoftConfig sc;
  sc.mode = c.effective_mode();
  sc.max_iter = c.max_iter;
  sc.tol = c.tol;
  sc.seed = seed;
  sc.homogeneous = c.algo == Algo::BregmanSoft;
  sc.gaussian_only = c.algo == Algo::Gmm;
  if (sc.gaussian_only) sc.kappa_ridge = 1e-9;
  const auto families = sc.gaussian_only ? gaussian_families(d.X.cols()) : d.families;

  Rng rng(seed);
  SoftInit init = initialize(d.X, families, c.K, sc, rng);
  if (sc.mode == FitMode::MAP) apply_prior_overrides(init.priors, c);
  SoftFitResult f = fit_from(d.X, std::move(init.params), init.priors, sc);

  RunResult out;
  out.assign = f.assignments();
  out.inertia = inertia(d.X, out.assign, cluster_means(d.X, out.assign, c.K));
  out.r = std::move(f.r);
  out.params = std::move(f.params);
  out.quasi_loglik = f.quasi_loglik;
  out.iterations = f.iterations;
  out.stop_reason = f.stop_reason;
  return out;
}

RunResult run_kmeans(const ModelData& d, const RunConfig& c, std::uint64_t seed) {
  const KMeansResult km = fit_kmeans(d.X, c.K, {c.max_iter, seed});
  const std::size_t n = d.X.rows(), J = d.X.cols();
  RunResult out;
  out.assign = km.assign;
  out.inertia = km.inertia;
  out.iterations = km.iterations;
  out.stop_reason = km.iterations >= c.max_iter ? "max_iter" : "assignments_stable";

  MixtureParams& p = out.params;
  p.families = gaussian_families(J);
  p.mu = km.centroids;
  p.alpha.assign(J, 0.0);
  p.pi.assign(c.K, 0.0);
  for (int a : km.assign) p.pi[a] += 1.0 / static_cast<double>(n);
  p.kappa.assign(J, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < J; ++j) {
      const double e = d.X(i, j) - km.centroids(km.assign[i], j);
      p.kappa[j] += e * e / static_cast<double>(n);
    }
  for (double& k : p.kappa) k = std::max(k, 1e-12);
  return out;
}

RunResult run_gmom(const ModelData& d, const RunConfig& c, std::uint64_t seed) {
  GmomConfig gc;
  gc.max_iter = c.max_iter;
  gc.light = c.algo == Algo::GmomLight;
  gc.prior_weight = c.effective_mode() == FitMode::MAP ? c.prior_b_mu.value_or(1.0) : 0.0;
  gc.seed = seed;
  GmomResult g = fit_gmom(d.X, d.families, c.K, gc);

  RunResult out;
  out.assign = std::move(g.assign);
  out.inertia = inertia(d.X, out.assign, cluster_means(d.X, out.assign, c.K));
  out.params = std::move(g.params);
  out.objective = g.objective;
  out.iterations = g.iterations;
  out.stop_reason = g.iterations >= c.max_iter ? "max_iter" : "assignments_stable";
  return out;
}

}  // namespace

std::string_view to_string(Algo a) {
  for (const auto& [k, v] : kAlgoNames)
    if (k == a) return v;
  return "unknown";
}

Algo algo_from_string(std::string_view s) {
  for (const auto& [k, v] : kAlgoNames)
    if (v == s) return k;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

bool is_soft(Algo a) { return a == Algo::AdaCluster || a == Algo::BregmanSoft || a == Algo::Gmm; }

FitMode RunConfig::effective_mode() const {
  if (mode) return *mode;
  return algo == Algo::Gmm || algo == Algo::KMeans ? FitMode::ML : FitMode::MAP;
}

Matrix cluster_means(const Matrix& X, const std::vector<int>& assign, std::size_t K) {
  if (assign.size() != X.rows()) throw LengthMismatch("assignment length differs from row count");
  Matrix m(K, X.cols());
  std::vector<double> count(K, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto h = static_cast<std::size_t>(assign[i]);
    if (h >= K) throw DomainError("cluster index out of range");
    count[h] += 1.0;
    for (std::size_t j = 0; j < X.cols(); ++j) m(h, j) += X(i, j);
  }
  for (std::size_t h = 0; h < K; ++h)
    if (count[h] > 0)
      for (std::size_t j = 0; j < X.cols(); ++j) m(h, j) /= count[h];
  return m;
}

RunResult run_once(const ModelData& data, const RunConfig& config, std::uint64_t seed) {
  if (config.K < 1) throw ConfigError("K must be at least 1");
  switch (config.algo) {
    case Algo::KMeans:
      return run_kmeans(data, config, seed);
    case Algo::GmomHc:
    case Algo::GmomLight:
      return run_gmom(data, config, seed);
    default:
      return run_soft(data, config, seed);
  }
}

RunResult run(const ModelData& data, const RunConfig& config) {
  const bool soft = is_soft(config.algo);
  std::vector<long> iters(config.restarts, 0);
  auto rr = run_restarts<RunResult>(
      config.restarts, config.seed, config.threads,
      [&](std::size_t k, std::uint64_t s) {
        RunResult r = run_once(data, config, s);
        iters[k] = r.iterations;
        return r;
      },
      [&](const RunResult& r) { return soft ? *r.quasi_loglik : -r.inertia; });
  RunResult out = std::move(rr.best);
  out.best_index = rr.best_index;
  out.records = std::move(rr.records);
  out.total_iterations = 0;
  for (long v : iters) out.total_iterations += v;
  return out;
}

Json run_config_json(const RunConfig& c) {
  Json j;
  j["algo"] = std::string(to_string(c.algo));
  j["k"] = c.K;
  j["restarts"] = c.restarts;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["mode"] = c.effective_mode() == FitMode::ML ? "ml" : "map";
  if (c.prior_b_mu) j["prior_b_mu"] = *c.prior_b_mu;
  if (c.prior_a_kappa) j["prior_a_kappa"] = *c.prior_a_kappa;
  if (c.prior_b_kappa) j["prior_b_kappa"] = *c.prior_b_kappa;
  return j;
}

}  // namespace adaclust
