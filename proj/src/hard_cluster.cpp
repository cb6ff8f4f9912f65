#include "adaclust/hard_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adaclust/error.hpp"
#include "adaclust/kmeans.hpp"

namespace adaclust {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKappaLo = 1e-9;
constexpr double kKappaHi = 1e9;

// Weighted power moments of one cluster's attribute about its own mean.
struct Sums {
  double w = 0.0;
  double c = 0.0;
  std::array<double, 5> M{};  // M[k] = avg (x - c)^k
};

Sums make_sums(std::span<const double> values, double prior_weight, double prior_location) {
  Sums s;
  double total = prior_weight * prior_location;
  for (double v : values) total += v;
  s.w = static_cast<double>(values.size()) + prior_weight;
  if (s.w <= 0.0) return s;
  s.c = total / s.w;
  auto add = [&](double x, double w) {
    const double y = x - s.c;
    double p = 1.0;
    for (int k = 0; k < 5; ++k, p *= y) s.M[k] += w * p;
  };
  for (double v : values) add(v, 1.0);
  if (prior_weight > 0.0) add(prior_location, prior_weight);
  for (auto& m : s.M) m /= s.w;
  return s;
}

// Quadratic polynomial in y = x - c.
using Poly = std::array<double, 3>;

double expect(const Poly& p, const Sums& s) { return p[0] + p[1] * s.M[1] + p[2] * s.M[2]; }

double expect(const Poly& p, const Poly& q, const Sums& s) {
  double e = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) e += p[a] * q[b] * s.M[a + b];
  return e;
}

struct BlockStats {
  std::array<double, 2> mbar;
  Mat2 S;
};

BlockStats block_stats(const Sums& s, double mu, double kappa, double alpha,
                       const FamilySpec& family, bool literal) {
  const double v = kappa * variance_function(mu, alpha, family);
  const double d = mu - s.c;
  const Poly m1{-d, 1.0, 0.0};
  const Poly m2 = literal ? Poly{s.c * s.c - v, 2.0 * s.c, 1.0} : Poly{d * d - v, -2.0 * d, 1.0};
  const double s12 = expect(m1, m2, s);
  return {{expect(m1, s), expect(m2, s)}, {expect(m1, m1, s), s12, s12, expect(m2, m2, s)}};
}

Mat2 diagonal_inverse(const Mat2& S) {
  const double tr = S[0] + S[3];
  if (!(tr > 0.0)) throw SingularBlock("moment residuals vanish; attribute is constant in a cluster");
  const double r = 1e-8 * tr / 2.0;
  return {1.0 / (S[0] + r), 0.0, 0.0, 1.0 / (S[3] + r)};
}

double quad(const Mat2& W, const std::array<double, 2>& m) {
  return W[0] * m[0] * m[0] + (W[1] + W[2]) * m[0] * m[1] + W[3] * m[1] * m[1];
}

double block_value(const Sums& s, double mu, double kappa, double alpha, const FamilySpec& family,
                   const GmomConfig& config, MomentBlock* out = nullptr) {
  const BlockStats b = block_stats(s, mu, kappa, alpha, family, config.literal_moments);
  const Mat2 W = config.light ? diagonal_inverse(b.S) : ridge_inverse(b.S);
  if (out) *out = {b.mbar, W};
  return quad(W, b.mbar);
}

// Per-cluster sums for attribute j.
std::vector<Sums> attribute_sums(const Matrix& X, const std::vector<int>& assign, std::size_t K,
                                 std::size_t j, const PseudoSamples* prior) {
  std::vector<std::vector<double>> members(K);
  for (std::size_t i = 0; i < X.rows(); ++i) members[static_cast<std::size_t>(assign[i])].push_back(X(i, j));
  std::vector<Sums> out;
  for (std::size_t h = 0; h < K; ++h) {
    const double w = prior ? prior->weight : 0.0;
    const double a = prior ? prior->location(h, j) : 0.0;
    out.push_back(make_sums(members[h], w, a));
  }
  return out;
}

void check_partition(const Matrix& X, const std::vector<int>& assign, std::size_t K) {
  if (assign.size() != X.rows()) throw LengthMismatch("partition length differs from row count");
  std::vector<std::size_t> n(K, 0);
  for (int a : assign) {
    if (a < 0 || static_cast<std::size_t>(a) >= K) throw DomainError("cluster index out of range");
    ++n[static_cast<std::size_t>(a)];
  }
  for (std::size_t h = 0; h < K; ++h)
    if (n[h] == 0) throw EmptyCluster("cluster " + std::to_string(h) + " is empty");
}

std::pair<double, double> mean_box(const std::vector<double>& col, const FamilySpec& family) {
  const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
  const double span = *hi_it - *lo_it + 1.0;
  const double lb = family.mean_lower_bound();
  const double lo = std::isfinite(lb) ? lb + 1e-9 : *lo_it - span;
  return {lo, *hi_it + span};
}

}  // namespace

std::array<double, 2> moment_vector(double x, double mu, double kappa, double alpha,
                                    const FamilySpec& family, bool literal) {
  if (!family.in_mean_domain(mu)) throw DomainError("mean outside the family's mean domain");
  if (!(kappa > 0.0)) throw DomainError("dispersion must be positive");
  const double v = kappa * variance_function(mu, alpha, family);
  return {x - mu, literal ? x * x - v : (x - mu) * (x - mu) - v};
}

std::array<double, 2> moment_vector(std::span<const double> x, std::size_t h, std::size_t j,
                                    const MixtureParams& lambda, bool literal) {
  return moment_vector(x[j], lambda.mu(h, j), lambda.kappa[j], lambda.alpha[j],
                       lambda.families[j], literal);
}

Mat2 ridge_inverse(const Mat2& S) {
  const double tr = S[0] + S[3];
  if (!(tr > 0.0)) throw SingularBlock("moment residuals vanish; attribute is constant in a cluster");
  const double r = 1e-8 * tr / 2.0;
  const double a = S[0] + r, b = 0.5 * (S[1] + S[2]), d = S[3] + r;
  const double det = a * d - b * b;
  if (!(det > 0.0)) throw SingularBlock("residual matrix is not positive definite after ridge");
  return {d / det, -b / det, -b / det, a / det};
}

Mat2 weight_matrix(std::span<const double> values, double mu, double kappa, double alpha,
                   const FamilySpec& family, bool literal) {
  if (values.empty()) throw EmptyCluster("weight matrix of an empty cluster");
  if (!family.in_mean_domain(mu)) throw DomainError("mean outside the family's mean domain");
  const Sums s = make_sums(values, 0.0, 0.0);
  return ridge_inverse(block_stats(s, mu, kappa, alpha, family, literal).S);
}

std::vector<MomentBlock> moment_blocks(const Matrix& X, const std::vector<int>& assign,
                                       const MixtureParams& lambda, const GmomConfig& config,
                                       const PseudoSamples* prior) {
  const std::size_t K = lambda.K(), J = lambda.J();
  check_partition(X, assign, K);
  std::vector<MomentBlock> blocks(K * J);
  for (std::size_t j = 0; j < J; ++j) {
    const auto sums = attribute_sums(X, assign, K, j, prior);
    for (std::size_t h = 0; h < K; ++h)
      block_value(sums[h], lambda.mu(h, j), lambda.kappa[j], lambda.alpha[j], lambda.families[j],
                  config, &blocks[h * J + j]);
  }
  return blocks;
}

double cugmom_objective(const Matrix& X, const std::vector<int>& assign,
                        const MixtureParams& lambda, const GmomConfig& config,
                        const PseudoSamples* prior) {
  double total = 0.0;
  for (const auto& b : moment_blocks(X, assign, lambda, config, prior)) total += quad(b.W, b.mbar);
  return total;
}

MixtureParams initial_lambda(const Matrix& X, const std::vector<int>& assign, std::size_t K,
                             const std::vector<FamilySpec>& families) {
  check_partition(X, assign, K);
  const std::size_t N = X.rows(), J = X.cols();
  MixtureParams p;
  p.families = families;
  p.pi.assign(K, 0.0);
  p.mu = Matrix(K, J);
  std::vector<double> n(K, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto h = static_cast<std::size_t>(assign[i]);
    n[h] += 1.0;
    for (std::size_t j = 0; j < J; ++j) p.mu(h, j) += X(i, j);
  }
  for (std::size_t h = 0; h < K; ++h) {
    p.pi[h] = n[h] / static_cast<double>(N);
    for (std::size_t j = 0; j < J; ++j) p.mu(h, j) /= n[h];
  }
  for (std::size_t j = 0; j < J; ++j) {
    const FamilySpec& f = families[j];
    const auto [lo, hi] = mean_box(X.col(j), f);
    for (std::size_t h = 0; h < K; ++h) p.mu(h, j) = std::clamp(p.mu(h, j), lo, hi);
    p.alpha.push_back(f.default_alpha());
    if (f.discrete()) {
      p.kappa.push_back(1.0);
      continue;
    }
    double ss = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto h = static_cast<std::size_t>(assign[i]);
      const double e = X(i, j) - p.mu(h, j);
      ss += e * e;
    }
    for (std::size_t h = 0; h < K; ++h) vv += n[h] * variance_function(p.mu(h, j), p.alpha[j], f);
    const double k = ss / vv;
    p.kappa.push_back(std::isfinite(k) ? std::clamp(k, kKappaLo, kKappaHi) : 1.0);
  }
  return p;
}

MixtureParams optimize_lambda(const Matrix& X, const std::vector<int>& assign,
                              const MixtureParams& lambda0, const GmomConfig& config,
                              const PseudoSamples* prior) {
  const std::size_t K = lambda0.K(), J = lambda0.J();
  check_partition(X, assign, K);
  MixtureParams out = lambda0;

  for (std::size_t j = 0; j < J; ++j) {
    const FamilySpec& f = lambda0.families[j];
    const auto sums = attribute_sums(X, assign, K, j, prior);
    const bool free_mu = !config.light;
    const bool free_kappa = !f.discrete();

    std::vector<double> mu(K);
    for (std::size_t h = 0; h < K; ++h) mu[h] = lambda0.mu(h, j);
    const auto [mlo, mhi] = mean_box(X.col(j), f);
    if (config.light)
      for (std::size_t h = 0; h < K; ++h) mu[h] = std::clamp(sums[h].c, mlo, mhi);

    // theta = [mu_0..mu_{K-1} if free] [log kappa if free] [alpha]
    Box box;
    std::vector<double> x0;
    if (free_mu)
      for (std::size_t h = 0; h < K; ++h) {
        box.lower.push_back(mlo);
        box.upper.push_back(mhi);
        x0.push_back(mu[h]);
      }
    if (free_kappa) {
      box.lower.push_back(std::log(kKappaLo));
      box.upper.push_back(std::log(kKappaHi));
      x0.push_back(std::log(lambda0.kappa[j]));
    }
    box.lower.push_back(f.alpha_lo());
    box.upper.push_back(f.alpha_hi());
    x0.push_back(lambda0.alpha[j]);

    auto unpack = [&](const std::vector<double>& t, std::vector<double>& m, double& kappa,
                      double& alpha) {
      std::size_t k = 0;
      m = mu;
      if (free_mu)
        for (std::size_t h = 0; h < K; ++h) m[h] = t[k++];
      kappa = free_kappa ? std::exp(t[k++]) : lambda0.kappa[j];
      alpha = t[k];
    };
    auto objective = [&](const std::vector<double>& t) {
      std::vector<double> m;
      double kappa, alpha;
      unpack(t, m, kappa, alpha);
      double total = 0.0;
      try {
        for (std::size_t h = 0; h < K; ++h)
          total += block_value(sums[h], m[h], kappa, alpha, f, config);
      } catch (const Error&) {
        return kInf;
      }
      return total;
    };

    BoxResult res;
    try {
      res = minimize_box(objective, {}, box, x0, config.box);
    } catch (const NonFinite& e) {
      throw NonFinite("moment objective for attribute " + std::to_string(j) + ": " + e.what());
    }
    std::vector<double> m;
    double kappa, alpha;
    unpack(res.x, m, kappa, alpha);
    for (std::size_t h = 0; h < K; ++h) out.mu(h, j) = m[h];
    out.kappa[j] = kappa;
    out.alpha[j] = alpha;
  }
  std::vector<double> n(K, 0.0);
  for (int a : assign) n[static_cast<std::size_t>(a)] += 1.0;
  for (std::size_t h = 0; h < K; ++h) out.pi[h] = n[h] / static_cast<double>(X.rows());
  return out;
}

std::vector<int> assign_step(const Matrix& X, const MixtureParams& lambda,
                             const std::vector<MomentBlock>& blocks, bool literal) {
  const std::size_t K = lambda.K(), J = lambda.J();
  if (blocks.size() != K * J) throw LengthMismatch("expected one moment block per (cluster, attribute)");
  Matrix v(K, J);
  for (std::size_t h = 0; h < K; ++h)
    for (std::size_t j = 0; j < J; ++j)
      v(h, j) = lambda.kappa[j] * variance_function(lambda.mu(h, j), lambda.alpha[j], lambda.families[j]);

  std::vector<int> assign(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double best = kInf;
    int arg = 0;
    for (std::size_t h = 0; h < K; ++h) {
      double q = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double e = X(i, j) - lambda.mu(h, j);
        const double x = X(i, j);
        q += quad(blocks[h * J + j].W, {e, literal ? x * x - v(h, j) : e * e - v(h, j)});
      }
      if (q < best) {
        best = q;
        arg = static_cast<int>(h);
      }
    }
    assign[i] = arg;
  }
  return assign;
}

namespace {

// Moves the points farthest from their own cluster into clusters with fewer
// than two members. Returns the clusters that received points.
std::vector<std::size_t> fill_small_clusters(const Matrix& X, const MixtureParams& lambda,
                                             const std::vector<MomentBlock>& blocks,
                                             std::vector<int>& assign, bool literal) {
  const std::size_t K = lambda.K(), J = lambda.J();
  std::vector<std::size_t> n(K, 0);
  for (int a : assign) ++n[static_cast<std::size_t>(a)];
  std::vector<std::size_t> changed;
  std::vector<double> dist;
  for (std::size_t h = 0; h < K; ++h) {
    while (n[h] < 2) {
      if (dist.empty()) {
        dist.resize(X.rows());
        for (std::size_t i = 0; i < X.rows(); ++i) {
          const auto g = static_cast<std::size_t>(assign[i]);
          double q = 0.0;
          for (std::size_t j = 0; j < J; ++j) {
            const double e = X(i, j) - lambda.mu(g, j);
            const double x = X(i, j);
            const double v = lambda.kappa[j] *
                             variance_function(lambda.mu(g, j), lambda.alpha[j], lambda.families[j]);
            q += quad(blocks[g * J + j].W, {e, literal ? x * x - v : e * e - v});
          }
          dist[i] = q;
        }
      }
      std::size_t pick = X.rows();
      for (std::size_t i = 0; i < X.rows(); ++i) {
        const auto g = static_cast<std::size_t>(assign[i]);
        if (g == h || n[g] <= 2) continue;
        if (pick == X.rows() || dist[i] > dist[pick]) pick = i;
      }
      if (pick == X.rows()) throw EmptyCluster("no point available to re-seed cluster " + std::to_string(h));
      --n[static_cast<std::size_t>(assign[pick])];
      assign[pick] = static_cast<int>(h);
      dist[pick] = -kInf;
      ++n[h];
      if (std::find(changed.begin(), changed.end(), h) == changed.end()) changed.push_back(h);
    }
  }
  return changed;
}

}  // namespace

GmomResult fit_gmom_from(const Matrix& X, const std::vector<FamilySpec>& families,
                         std::vector<int> assign, std::size_t K, const GmomConfig& config,
                         const PseudoSamples* prior) {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (X.rows() < 2 * K) throw ConfigError("GMoM-HC needs at least two points per cluster");
  if (families.size() != X.cols()) throw LengthMismatch("one family per attribute required");

  GmomResult res;
  MixtureParams lambda = initial_lambda(X, assign, K, families);
  for (int it = 1; it <= config.max_iter; ++it) {
    lambda = optimize_lambda(X, assign, lambda, config, prior);
    const auto blocks = moment_blocks(X, assign, lambda, config, prior);
    double obj = 0.0;
    for (const auto& b : blocks) obj += quad(b.W, b.mbar);
    res.objective_trace.push_back(obj);
    res.iterations = it;
    if (it == config.max_iter) break;

    std::vector<int> next = assign_step(X, lambda, blocks, config.literal_moments);
    const auto moved = fill_small_clusters(X, lambda, blocks, next, config.literal_moments);
    if (next == assign) break;
    assign = std::move(next);
    if (!moved.empty()) {
      const MixtureParams fresh = initial_lambda(X, assign, K, families);
      for (std::size_t h : moved)
        for (std::size_t j = 0; j < X.cols(); ++j) lambda.mu(h, j) = fresh.mu(h, j);
    }
  }
  res.assign = std::move(assign);
  res.params = std::move(lambda);
  res.objective = res.objective_trace.empty() ? 0.0 : res.objective_trace.back();
  return res;
}

GmomResult fit_gmom(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                    const GmomConfig& config) {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (X.rows() < 2 * K) throw ConfigError("GMoM-HC needs at least two points per cluster");
  Rng rng(config.seed);
  const auto seeds = kmeans_pp_init(X, K, rng);
  const Matrix centroids = rows_of(X, seeds);
  std::vector<int> assign(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i)
    assign[i] = static_cast<int>(nearest_centroid(X.row(i), centroids));

  // Clusters of the seeding partition need two points before moments exist.
  {
    std::vector<std::size_t> n(K, 0);
    for (int a : assign) ++n[static_cast<std::size_t>(a)];
    for (std::size_t h = 0; h < K; ++h) {
      while (n[h] < 2) {
        std::size_t pick = X.rows();
        double best = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
          const auto g = static_cast<std::size_t>(assign[i]);
          if (g == h || n[g] <= 2) continue;
          double d2 = 0.0;
          for (std::size_t j = 0; j < X.cols(); ++j) {
            const double e = X(i, j) - centroids(h, j);
            d2 += e * e;
          }
          if (pick == X.rows() || d2 < best) {
            pick = i;
            best = d2;
          }
        }
        if (pick == X.rows()) throw InitError("cannot give every cluster two points");
        --n[static_cast<std::size_t>(assign[pick])];
        assign[pick] = static_cast<int>(h);
        ++n[h];
      }
    }
  }

  if (config.prior_weight > 0.0) {
    const PseudoSamples prior{centroids, config.prior_weight};
    return fit_gmom_from(X, families, std::move(assign), K, config, &prior);
  }
  return fit_gmom_from(X, families, std::move(assign), K, config);
}

}  // namespace adaclust
