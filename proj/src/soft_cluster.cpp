#include "adaclust/soft_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adaclust/error.hpp"
#include "adaclust/kmeans.hpp"
#include "adaclust/numopt.hpp"

namespace adaclust {
namespace {

constexpr double kMuFloor = 1e-9;
constexpr double kKappaFloor = 1e-12;
constexpr double kKappaCeil = 1e12;
constexpr double kEmptyMass = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Distinct values of one column and the map from rows to them. Fits on
// count data touch each distinct value once instead of once per row.
struct Column {
  std::vector<double> values;
  std::vector<std::uint32_t> index;
  std::vector<double> counts;
  bool has_zero = false;
};

Column index_column(const Matrix& X, std::size_t j) {
  const std::size_t n = X.rows();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::ranges::sort(order, [&](auto a, auto b) { return X(a, j) < X(b, j); });
  Column c;
  c.index.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = X(order[k], j);
    if (c.values.empty() || v != c.values.back()) {
      c.values.push_back(v);
      c.counts.push_back(0.0);
    }
    c.index[order[k]] = static_cast<std::uint32_t>(c.values.size() - 1);
    c.counts.back() += 1.0;
    c.has_zero |= v == 0.0;
  }
  return c;
}

std::vector<Column> index_columns(const Matrix& X) {
  std::vector<Column> cols;
  cols.reserve(X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) cols.push_back(index_column(X, j));
  return cols;
}

// Attributes sharing one (kappa, alpha) pair.
std::vector<std::vector<std::size_t>> attribute_groups(std::size_t J, bool homogeneous) {
  std::vector<std::vector<std::size_t>> g;
  if (homogeneous) {
    g.emplace_back(J);
    std::iota(g[0].begin(), g[0].end(), std::size_t{0});
  } else {
    for (std::size_t j = 0; j < J; ++j) g.push_back({j});
  }
  return g;
}

double clamp_mean(double m, const FamilySpec& f) {
  return f.family_class() == FamilyClass::MorrisReal ? m : std::max(m, kMuFloor);
}

bool kappa_fixed(const FamilySpec& f) { return f.discrete(); }

// Closed-form dispersion applies when every point uses the continuous form.
bool kappa_closed_form(const FamilySpec& f, const Column& c) {
  return !f.discrete() && !(f.support() == AttributeKind::NonNegativeContinuous && c.has_zero);
}

// U x K responsibility mass per distinct value.
Matrix value_weights(const Responsibilities& r, const Column& c) {
  Matrix w(c.values.size(), r.cols());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    auto dst = w.row(c.index[i]);
    auto src = r.row(i);
    for (std::size_t h = 0; h < r.cols(); ++h) dst[h] += src[h];
  }
  return w;
}

double dmean_scaled_divergence(double x, double mu, double kappa, double alpha,
                               const FamilySpec& f) {
  // d/dmu of scaled_divergence; d/dy d(x, y) = -(x - y) / v(y)
  if (uses_lattice_form(x, f)) return -kappa * (x - mu) / variance_function(kappa * mu, alpha, f);
  return -(x - mu) / (kappa * variance_function(mu, alpha, f));
}

struct Context {
  const Matrix& X;
  const Responsibilities& r;
  const Priors& priors;
  FitMode mode;
  const std::vector<Column>& cols;
};

bool map_mode(const Context& c) { return c.mode == FitMode::MAP; }

// Negative expected complete-data log-likelihood of a group of attributes
// that share (kappa, alpha), plus their negative log-prior. Weights below
// `cutoff` are skipped.
double group_objective(const Context& ctx, const std::vector<std::size_t>& attrs,
                       const std::vector<Matrix>& weights, const Matrix& mu, double kappa,
                       double alpha, const std::vector<FamilySpec>& families, double cutoff) {
  const std::size_t K = mu.rows();
  double f = 0.0;
  for (std::size_t j : attrs) {
    const FamilySpec& fam = families[j];
    const Column& col = ctx.cols[j];
    const Matrix& w = weights[j];
    for (std::size_t u = 0; u < col.values.size(); ++u) {
      const double x = col.values[u];
      f -= col.counts[u] * log_normalizer(x, kappa, alpha, fam);
      for (std::size_t h = 0; h < K; ++h) {
        const double wt = w(u, h);
        if (wt <= cutoff) continue;
        f += wt * scaled_divergence(x, mu(h, j), kappa, alpha, fam);
      }
    }
    if (map_mode(ctx))
      for (std::size_t h = 0; h < K; ++h)
        if (ctx.priors.b_mu(h, j) > 0.0)
          f += ctx.priors.b_mu(h, j) * divergence(ctx.priors.a_mu(h, j), mu(h, j), alpha, fam);
  }
  if (map_mode(ctx)) {
    const std::size_t j0 = attrs.front();
    f += ctx.priors.a_kappa[j0] * std::log(kappa) + ctx.priors.b_kappa[j0] / kappa;
  }
  return f;
}

double group_objective_dalpha(const Context& ctx, const std::vector<std::size_t>& attrs,
                              const std::vector<Matrix>& weights, const Matrix& mu, double kappa,
                              double alpha, const std::vector<FamilySpec>& families,
                              double cutoff) {
  const std::size_t K = mu.rows();
  double g = 0.0;
  for (std::size_t j : attrs) {
    const FamilySpec& fam = families[j];
    const Column& col = ctx.cols[j];
    const Matrix& w = weights[j];
    for (std::size_t u = 0; u < col.values.size(); ++u) {
      const double x = col.values[u];
      g -= col.counts[u] * log_normalizer_dalpha(x, kappa, alpha, fam);
      for (std::size_t h = 0; h < K; ++h) {
        const double wt = w(u, h);
        if (wt <= cutoff) continue;
        g += wt * scaled_divergence_dalpha(x, mu(h, j), kappa, alpha, fam);
      }
    }
    if (map_mode(ctx))
      for (std::size_t h = 0; h < K; ++h)
        if (ctx.priors.b_mu(h, j) > 0.0)
          g += ctx.priors.b_mu(h, j) *
               divergence_dalpha(ctx.priors.a_mu(h, j), mu(h, j), alpha, fam);
  }
  return g;
}

// Closed-form dispersion for a group given the summed divergence S and the
// number of attribute observations R.
double closed_form_kappa(const Context& ctx, std::size_t j0, double S, double R) {
  double k;
  if (map_mode(ctx))
    k = (ctx.priors.b_kappa[j0] + S) / (ctx.priors.a_kappa[j0] + 0.5 * R);
  else
    k = 2.0 * S / R;
  return std::clamp(k, kKappaFloor, kKappaCeil);
}

// Profile of the group objective over kappa for continuous-form groups:
// returns (objective, d/dalpha, kappa*).
struct Profile {
  double f, df, kappa;
};

Profile profiled_objective(const Context& ctx, const std::vector<std::size_t>& attrs,
                           const std::vector<Matrix>& weights, const Matrix& mu, double alpha,
                           const std::vector<FamilySpec>& families, double cutoff, double ridge) {
  const std::size_t K = mu.rows();
  double S = 0.0, dS = 0.0, L = 0.0, dL = 0.0, P = 0.0, dP = 0.0, R = 0.0;
  for (std::size_t j : attrs) {
    const FamilySpec& fam = families[j];
    const Column& col = ctx.cols[j];
    const Matrix& w = weights[j];
    for (std::size_t u = 0; u < col.values.size(); ++u) {
      const double x = col.values[u];
      const double c = col.counts[u];
      R += c;
      // -log_normalizer = 0.5 (log 2 pi + log kappa + log v(x))
      L += c * std::log(variance_function(x, alpha, fam));
      dL -= 2.0 * c * log_normalizer_dalpha(x, 1.0, alpha, fam);
      for (std::size_t h = 0; h < K; ++h) {
        const double wt = w(u, h);
        if (wt <= cutoff) continue;
        S += wt * divergence(x, mu(h, j), alpha, fam);
        dS += wt * divergence_dalpha(x, mu(h, j), alpha, fam);
      }
    }
    if (map_mode(ctx))
      for (std::size_t h = 0; h < K; ++h) {
        const double b = ctx.priors.b_mu(h, j);
        if (b <= 0.0) continue;
        P += b * divergence(ctx.priors.a_mu(h, j), mu(h, j), alpha, fam);
        dP += b * divergence_dalpha(ctx.priors.a_mu(h, j), mu(h, j), alpha, fam);
      }
  }
  const std::size_t j0 = attrs.front();
  const double kappa = closed_form_kappa(ctx, j0, S, R) + ridge;
  const double ak = map_mode(ctx) ? ctx.priors.a_kappa[j0] : 0.0;
  const double bk = map_mode(ctx) ? ctx.priors.b_kappa[j0] : 0.0;
  const double f = (S + bk) / kappa + (ak + 0.5 * R) * std::log(kappa) + 0.5 * L + 0.5 * R * kLog2Pi + P;
  const double df = dS / kappa + 0.5 * dL + dP;
  return {f, df, kappa};
}

bool group_profiled(const std::vector<std::size_t>& attrs, const std::vector<FamilySpec>& families,
                    const std::vector<Column>& cols) {
  for (std::size_t j : attrs)
    if (!kappa_closed_form(families[j], cols[j])) return false;
  return true;
}

// Minimizes over log kappa with numerical derivatives; for groups that
// include lattice-form points.
double numeric_kappa(const Context& ctx, const std::vector<std::size_t>& attrs,
                     const std::vector<Matrix>& weights, const Matrix& mu, double kappa0,
                     double alpha, const std::vector<FamilySpec>& families) {
  auto f = [&](double t) {
    const double v = group_objective(ctx, attrs, weights, mu, std::exp(t), alpha, families, 0.0);
    return std::isfinite(v) ? v : kInf;
  };
  auto fdf = [&](double t) {
    const double h = std::max(1e-7, 1e-7 * std::fabs(t));
    return std::pair<double, double>{f(t), (f(t + h) - f(t - h)) / (2 * h)};
  };
  ScalarOptions opt;
  opt.grad_tol = 1e-7;
  const double lo = std::log(kKappaFloor), hi = std::log(kKappaCeil);
  const double t0 = std::clamp(std::log(kappa0), lo, hi);
  try {
    return std::exp(minimize_scalar_bounded(fdf, lo, hi, t0, opt).x);
  } catch (const NonFinite&) {
    return kappa0;
  }
}

void check_data(const Matrix& X, const MixtureParams& p) {
  if (X.cols() != p.J())
    throw ConfigError("data has " + std::to_string(X.cols()) + " columns, model has " +
                      std::to_string(p.J()));
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      if (!p.families[j].in_support(X(i, j), p.alpha[j]))
        throw DomainError("value " + std::to_string(X(i, j)) + " at row " + std::to_string(i) +
                          ", column " + std::to_string(j) + " is outside the support of " +
                          std::string(to_string(p.families[j].support())));
}

double row_logsumexp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<int> argmax_rows(const Responsibilities& r) {
  std::vector<int> a(r.rows());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    auto row = r.row(i);
    a[i] = static_cast<int>(std::ranges::max_element(row) - row.begin());
  }
  return a;
}

struct EStepFull {
  Responsibilities r;
  std::vector<double> row_loglik;
  double quasi_loglik;
};

EStepFull e_step_full(const Matrix& X, const MixtureParams& p) {
  const std::size_t n = X.rows(), K = p.K(), J = p.J();
  for (std::size_t h = 0; h < K; ++h)
    if (!(p.pi[h] >= 1e-300))
      throw DegenerateComponent("mixture weight of component " + std::to_string(h) +
                                " collapsed to " + std::to_string(p.pi[h]));
  std::vector<double> log_pi(K);
  for (std::size_t h = 0; h < K; ++h) log_pi[h] = std::log(p.pi[h]);

  EStepFull out{Responsibilities(n, K), std::vector<double>(n), 0.0};
  std::vector<double> lp(K);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = X.row(i);
    double norm = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      norm += log_normalizer(x[j], p.kappa[j], p.alpha[j], p.families[j]);
    for (std::size_t h = 0; h < K; ++h) {
      double s = 0.0;
      for (std::size_t j = 0; j < J; ++j)
        s += scaled_divergence(x[j], p.mu(h, j), p.kappa[j], p.alpha[j], p.families[j]);
      lp[h] = log_pi[h] + norm - s;
    }
    const double lse = row_logsumexp(lp);
    if (!std::isfinite(lse)) throw NonFinite("log-likelihood of row " + std::to_string(i) + " is not finite");
    auto ri = out.r.row(i);
    for (std::size_t h = 0; h < K; ++h) ri[h] = std::exp(lp[h] - lse);
    out.row_loglik[i] = lse;
    out.quasi_loglik += lse;
  }
  return out;
}

Matrix m_step_mu_impl(const Context& ctx, const MixtureParams& p) {
  const std::size_t K = p.K(), J = p.J();
  const Matrix& X = ctx.X;
  const Responsibilities& r = ctx.r;
  std::vector<double> mass(K, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t h = 0; h < K; ++h) mass[h] += r(i, h);
  Matrix wx(K, J);
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t h = 0; h < K; ++h) {
      const double w = r(i, h);
      if (w == 0.0) continue;
      auto x = X.row(i);
      for (std::size_t j = 0; j < J; ++j) wx(h, j) += w * x[j];
    }

  Matrix mu(K, J);
  for (std::size_t h = 0; h < K; ++h)
    for (std::size_t j = 0; j < J; ++j) {
      double num = wx(h, j), den = mass[h];
      if (map_mode(ctx)) {
        const double bk = ctx.priors.b_mu(h, j) * p.kappa[j];
        num += ctx.priors.a_mu(h, j) * bk;
        den += bk;
      }
      if (den < kEmptyMass)
        throw EmptyCluster("component " + std::to_string(h) + " has no responsibility mass");
      mu(h, j) = clamp_mean(num / den, p.families[j]);
    }

  // Zeros of non-negative continuous attributes use the lattice density, for
  // which the weighted mean is no longer the stationary point.
  for (std::size_t j = 0; j < J; ++j) {
    const FamilySpec& fam = p.families[j];
    if (kappa_closed_form(fam, ctx.cols[j]) || fam.discrete()) continue;
    const Column& col = ctx.cols[j];
    const Matrix w = value_weights(r, col);
    const double kappa = p.kappa[j], alpha = p.alpha[j];
    const double hi = 10.0 * (col.values.back() + 1.0);
    for (std::size_t h = 0; h < K; ++h) {
      const double a = map_mode(ctx) ? ctx.priors.a_mu(h, j) : 0.0;
      const double b = map_mode(ctx) ? ctx.priors.b_mu(h, j) : 0.0;
      auto fdf = [&](double m) {
        double f = 0.0, g = 0.0;
        for (std::size_t u = 0; u < col.values.size(); ++u) {
          const double wt = w(u, h);
          if (wt == 0.0) continue;
          f += wt * scaled_divergence(col.values[u], m, kappa, alpha, fam);
          g += wt * dmean_scaled_divergence(col.values[u], m, kappa, alpha, fam);
        }
        if (b > 0.0) {
          f += b * divergence(a, m, alpha, fam);
          g -= b * (a - m) / variance_function(m, alpha, fam);
        }
        return std::pair<double, double>{f, g};
      };
      const double old_mu = std::clamp(p.mu(h, j), kMuFloor, hi);
      const double cand = std::clamp(mu(h, j), kMuFloor, hi);
      const double start = fdf(cand).first <= fdf(old_mu).first ? cand : old_mu;
      ScalarOptions opt;
      opt.grad_tol = 1e-10;
      opt.initial_step = 0.1 * start;
      mu(h, j) = minimize_scalar_bounded(fdf, kMuFloor, hi, start, opt).x;
    }
  }
  return mu;
}

std::vector<double> m_step_kappa_impl(const Context& ctx, const Matrix& mu,
                                      const MixtureParams& p, bool homogeneous, double ridge) {
  const std::size_t K = p.K();
  std::vector<double> kappa = p.kappa;
  for (const auto& attrs : attribute_groups(p.J(), homogeneous)) {
    const std::size_t j0 = attrs.front();
    if (kappa_fixed(p.families[j0])) continue;
    if (group_profiled(attrs, p.families, ctx.cols)) {
      double S = 0.0, R = 0.0;
      for (std::size_t j : attrs) {
        for (std::size_t i = 0; i < ctx.X.rows(); ++i) {
          const double x = ctx.X(i, j);
          for (std::size_t h = 0; h < K; ++h) {
            const double w = ctx.r(i, h);
            if (w == 0.0) continue;
            S += w * divergence(x, mu(h, j), p.alpha[j], p.families[j]);
          }
        }
        R += static_cast<double>(ctx.X.rows());
      }
      const double k = closed_form_kappa(ctx, j0, S, R) + ridge;
      for (std::size_t j : attrs) kappa[j] = k;
    } else {
      std::vector<Matrix> weights(p.J());
      for (std::size_t j : attrs) weights[j] = value_weights(ctx.r, ctx.cols[j]);
      const double k = numeric_kappa(ctx, attrs, weights, mu, p.kappa[j0], p.alpha[j0], p.families);
      for (std::size_t j : attrs) kappa[j] = k;
    }
  }
  return kappa;
}

MixtureParams m_step_alpha_impl(const Context& ctx, const MixtureParams& p,
                                const SoftConfig& config) {
  MixtureParams out = p;
  if (config.gaussian_only || !config.update_alpha) return out;
  std::vector<Matrix> weights(p.J());
  for (const auto& attrs : attribute_groups(p.J(), config.homogeneous)) {
    const std::size_t j0 = attrs.front();
    const FamilySpec& fam = p.families[j0];
    for (std::size_t j : attrs) weights[j] = value_weights(ctx.r, ctx.cols[j]);
    const double lo = fam.alpha_lo(), hi = fam.alpha_hi();
    const double a0 = std::clamp(p.alpha[j0], lo, hi);
    const double cutoff = config.alpha_weight_cutoff;
    const bool profiled = group_profiled(attrs, p.families, ctx.cols);
    const double kappa = p.kappa[j0];

    ScalarFdf fdf;
    if (profiled) {
      fdf = [&](double a) {
        const Profile pr =
            profiled_objective(ctx, attrs, weights, p.mu, a, p.families, cutoff, config.kappa_ridge);
        return std::pair<double, double>{pr.f, pr.df};
      };
    } else {
      fdf = [&](double a) {
        return std::pair<double, double>{
            group_objective(ctx, attrs, weights, p.mu, kappa, a, p.families, cutoff),
            group_objective_dalpha(ctx, attrs, weights, p.mu, kappa, a, p.families, cutoff)};
      };
    }

    // The objective sums over every observation in the group, so the
    // stationarity test is scaled by that count.
    const double mass = static_cast<double>(attrs.size() * ctx.X.rows());
    ScalarOptions opt;
    opt.grad_tol = 1e-8 * mass;
    opt.x_tol = 1e-10;
    double a_new;
    try {
      const auto res = minimize_scalar_bounded(fdf, lo, hi, a0, opt);
      a_new = res.x;
    } catch (const Error&) {
      continue;  // keep the previous topology
    }
    double k_new = kappa;
    if (profiled)
      k_new = profiled_objective(ctx, attrs, weights, p.mu, a_new, p.families, 0.0,
                                 config.kappa_ridge)
                  .kappa;

    // Accept only if the exact objective does not get worse.
    const double f_old = group_objective(ctx, attrs, weights, p.mu, kappa, p.alpha[j0], p.families, 0.0);
    double f_new;
    try {
      f_new = group_objective(ctx, attrs, weights, p.mu, k_new, a_new, p.families, 0.0);
    } catch (const Error&) {
      continue;
    }
    if (std::isfinite(f_new) && f_new <= f_old) {
      for (std::size_t j : attrs) {
        out.alpha[j] = a_new;
        out.kappa[j] = k_new;
      }
    }
  }
  return out;
}

// Moves a vanished component onto the row the current mixture explains worst.
void reseed_empty(const Matrix& X, MixtureParams& p, const std::vector<double>& row_loglik,
                  std::vector<char>& taken) {
  const std::size_t n = X.rows();
  for (std::size_t h = 0; h < p.K(); ++h) {
    if (p.pi[h] * static_cast<double>(n) >= kEmptyMass) continue;
    std::size_t worst = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i] && (worst == n || row_loglik[i] < row_loglik[worst])) worst = i;
    if (worst == n) throw EmptyCluster("no row left to re-seed component " + std::to_string(h));
    taken[worst] = 1;
    for (std::size_t j = 0; j < p.J(); ++j) p.mu(h, j) = clamp_mean(X(worst, j), p.families[j]);
    p.pi[h] = 1.0 / static_cast<double>(n);
  }
  const double s = std::accumulate(p.pi.begin(), p.pi.end(), 0.0);
  for (double& v : p.pi) v /= s;
}

}  // namespace

void MixtureParams::validate() const {
  const std::size_t K = pi.size(), J = families.size();
  if (mu.rows() != K || mu.cols() != J || kappa.size() != J || alpha.size() != J)
    throw DomainError("mixture parameter dimensions are inconsistent");
  double s = 0.0;
  for (double v : pi) {
    if (!(v >= 0.0)) throw DomainError("negative mixture weight");
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-10) throw DomainError("mixture weights do not sum to one");
  for (std::size_t j = 0; j < J; ++j) {
    if (!(kappa[j] > 0.0) || !std::isfinite(kappa[j])) throw DomainError("dispersion must be positive");
    if (!families[j].alpha_in_domain(alpha[j])) throw DomainError("alpha outside its domain");
    for (std::size_t h = 0; h < K; ++h)
      if (!families[j].in_mean_domain(mu(h, j))) throw DomainError("mean outside the mean domain");
  }
}

Priors Priors::none(std::size_t K, std::size_t J) {
  return {Matrix(K, J, 1.0), Matrix(K, J, 0.0), std::vector<double>(J, 0.0),
          std::vector<double>(J, 0.0)};
}

Priors Priors::defaults(const Matrix& locations, const std::vector<FamilySpec>& families) {
  const std::size_t K = locations.rows(), J = locations.cols();
  Priors p{Matrix(K, J), Matrix(K, J, 1.0), std::vector<double>(J, 1.0),
           std::vector<double>(J, 1e-9)};
  for (std::size_t h = 0; h < K; ++h)
    for (std::size_t j = 0; j < J; ++j) p.a_mu(h, j) = clamp_mean(locations(h, j), families[j]);
  return p;
}

bool Priors::is_zero() const {
  for (double v : b_mu.flat())
    if (v != 0.0) return false;
  for (std::size_t j = 0; j < a_kappa.size(); ++j)
    if (a_kappa[j] != 0.0 || b_kappa[j] != 0.0) return false;
  return true;
}

std::vector<int> SoftFitResult::assignments() const { return argmax_rows(r); }

std::vector<FamilySpec> gaussian_families(std::size_t J) {
  return std::vector<FamilySpec>(J, FamilySpec::for_kind(AttributeKind::RealContinuous));
}

double upsilon_aux(std::span<const double> x, std::size_t h, const MixtureParams& p) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.J(); ++j)
    s += log_density(x[j], p.mu(h, j), p.kappa[j], p.alpha[j], p.families[j]);
  return s;
}

EStepResult e_step(const Matrix& X, const MixtureParams& params) {
  auto full = e_step_full(X, params);
  return {std::move(full.r), full.quasi_loglik};
}

std::vector<double> m_step_pi(const Responsibilities& r) {
  std::vector<double> pi(r.cols(), 0.0);
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t h = 0; h < r.cols(); ++h) pi[h] += r(i, h);
  const double n = static_cast<double>(r.rows());
  for (double& v : pi) v /= n;
  return pi;
}

Matrix m_step_mu(const Matrix& X, const Responsibilities& r, const MixtureParams& params,
                 const Priors& priors, FitMode mode) {
  const auto cols = index_columns(X);
  const Context ctx{X, r, priors, mode, cols};
  return m_step_mu_impl(ctx, params);
}

std::vector<double> m_step_kappa(const Matrix& X, const Responsibilities& r, const Matrix& mu,
                                 const MixtureParams& params, const Priors& priors, FitMode mode,
                                 bool homogeneous) {
  const auto cols = index_columns(X);
  const Context ctx{X, r, priors, mode, cols};
  return m_step_kappa_impl(ctx, mu, params, homogeneous, 0.0);
}

MixtureParams m_step_alpha(const Matrix& X, const Responsibilities& r, const MixtureParams& params,
                           const Priors& priors, FitMode mode, const SoftConfig& config) {
  const auto cols = index_columns(X);
  const Context ctx{X, r, priors, mode, cols};
  return m_step_alpha_impl(ctx, params, config);
}

double log_prior(const MixtureParams& p, const Priors& priors, FitMode mode) {
  if (mode == FitMode::ML) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < p.J(); ++j) {
    for (std::size_t h = 0; h < p.K(); ++h)
      if (priors.b_mu(h, j) > 0.0)
        s -= priors.b_mu(h, j) * divergence(priors.a_mu(h, j), p.mu(h, j), p.alpha[j], p.families[j]);
    s -= priors.a_kappa[j] * std::log(p.kappa[j]) + priors.b_kappa[j] / p.kappa[j];
  }
  return s;
}

SoftInit initialize(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                    const SoftConfig& config, Rng& rng) {
  const std::size_t n = X.rows(), J = X.cols();
  if (families.size() != J) throw ConfigError("one family per column is required");
  if (K == 0 || n < K) throw ConfigError("need 1 <= K <= N");
  const auto seeds = kmeans_pp_init(X, K, rng);
  const Matrix centroids = rows_of(X, seeds);

  Responsibilities r(n, K);
  for (std::size_t i = 0; i < n; ++i) r(i, nearest_centroid(X.row(i), centroids)) = 1.0;

  MixtureParams p;
  p.families = families;
  p.pi = m_step_pi(r);
  p.kappa.assign(J, 1.0);
  p.alpha.resize(J);
  for (std::size_t j = 0; j < J; ++j)
    p.alpha[j] = config.gaussian_only ? 0.0 : families[j].default_alpha();
  p.mu = Matrix(K, J);

  SoftInit init{p, config.mode == FitMode::MAP ? Priors::defaults(centroids, families)
                                               : Priors::none(K, J)};
  const auto cols = index_columns(X);
  const Priors none = Priors::none(K, J);
  const Context ml{X, r, none, FitMode::ML, cols};
  init.params.mu = m_step_mu_impl(ml, p);
  const Context ctx{X, r, init.priors, config.mode, cols};
  init.params.kappa = m_step_kappa_impl(ctx, init.params.mu, init.params, config.homogeneous,
                                        config.kappa_ridge);
  return init;
}

SoftFitResult fit(const Matrix& X, const std::vector<FamilySpec>& families, std::size_t K,
                  const SoftConfig& config, const IterationCallback& callback) {
  const std::vector<FamilySpec> fams = config.gaussian_only ? gaussian_families(X.cols()) : families;
  Rng rng(config.seed);
  SoftInit init = initialize(X, fams, K, config, rng);
  return fit_from(X, std::move(init.params), init.priors, config, callback);
}

SoftFitResult fit_from(const Matrix& X, MixtureParams params, const Priors& priors,
                       const SoftConfig& config, const IterationCallback& callback) {
  if (config.gaussian_only) {
    params.families = gaussian_families(params.J());
    std::ranges::fill(params.alpha, 0.0);
  }
  if (config.homogeneous) {
    for (const auto& f : params.families)
      if (!(f == params.families.front()))
        throw ConfigError("homogeneous mode needs the same family for every attribute");
    for (std::size_t j = 1; j < params.J(); ++j) {
      params.alpha[j] = params.alpha[0];
      params.kappa[j] = params.kappa[0];
    }
  }
  params.validate();
  check_data(X, params);
  if (priors.a_mu.rows() != params.K() || priors.a_mu.cols() != params.J() ||
      priors.a_kappa.size() != params.J())
    throw ConfigError("prior dimensions do not match the model");

  const auto cols = index_columns(X);
  SoftFitResult res;
  auto est = e_step_full(X, params);
  auto objective = [&](double ll) { return ll + log_prior(params, priors, config.mode); };
  res.trace.push_back(est.quasi_loglik);
  res.objective_trace.push_back(objective(est.quasi_loglik));
  if (callback) callback({0, params, est.r, est.quasi_loglik, res.objective_trace.back()});

  std::vector<int> prev_assign = argmax_rows(est.r);
  int stable = 0;
  res.stop_reason = "max_iter";
  for (int it = 1; it <= config.max_iter; ++it) {
    const Context ctx{X, est.r, priors, config.mode, cols};
    params.pi = m_step_pi(est.r);
    bool reseeded = false;
    if (std::ranges::any_of(params.pi, [&](double v) { return v * X.rows() < kEmptyMass; })) {
      std::vector<char> taken(X.rows(), 0);
      reseed_empty(X, params, est.row_loglik, taken);
      reseeded = true;
    }
    if (!reseeded) {
      params.mu = m_step_mu_impl(ctx, params);
      params.kappa = m_step_kappa_impl(ctx, params.mu, params, config.homogeneous, config.kappa_ridge);
      params = m_step_alpha_impl(ctx, params, config);
    }

    const double prev_ll = est.quasi_loglik;
    est = e_step_full(X, params);
    res.trace.push_back(est.quasi_loglik);
    res.objective_trace.push_back(objective(est.quasi_loglik));
    res.iterations = it;
    if (callback) callback({it, params, est.r, est.quasi_loglik, res.objective_trace.back()});
    if (reseeded) {
      stable = 0;
      prev_assign = argmax_rows(est.r);
      continue;
    }

    if (std::fabs(est.quasi_loglik - prev_ll) < config.tol * std::fabs(prev_ll)) {
      res.stop_reason = "tolerance";
      break;
    }
    auto assign = argmax_rows(est.r);
    stable = assign == prev_assign ? stable + 1 : 0;
    prev_assign = std::move(assign);
    if (config.assignment_stop && stable >= 2) {
      res.stop_reason = "assignments_stable";
      break;
    }
  }
  res.quasi_loglik = est.quasi_loglik;
  res.params = std::move(params);
  res.r = std::move(est.r);
  return res;
}

}  // namespace adaclust
