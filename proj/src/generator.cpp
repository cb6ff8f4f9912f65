#include "adaclust/generator.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <random>
#include <string>

#include "adaclust/error.hpp"

namespace adaclust {
namespace {

double positive(double v) { return std::max(v, DBL_MIN); }

double draw_gamma(double shape, double scale, Rng& rng) {
  return std::gamma_distribution<double>(shape, scale)(rng);
}

double inverse_gaussian(double mu, double lambda, Rng& rng, std::normal_distribution<double>& z) {
  const double nu = z(rng);
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  return uniform01(rng) <= mu / (mu + x) ? x : mu * mu / x;
}

double propose_centroid(Member m, Rng& rng) {
  if (m == Member::Gaussian) return -50.0 + 100.0 * uniform01(rng);
  return std::exp(std::log(0.1) + (std::log(100.0) - std::log(0.1)) * uniform01(rng));
}

std::vector<int> draw_labels(const std::vector<double>& pi, std::size_t n, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) {
    const double u = uniform01(rng);
    double acc = 0.0;
    l = static_cast<int>(pi.size() - 1);
    for (std::size_t h = 0; h < pi.size(); ++h) {
      acc += pi[h];
      if (u < acc) {
        l = static_cast<int>(h);
        break;
      }
    }
  }
  return labels;
}

}  // namespace

std::string_view to_string(Member m) {
  switch (m) {
    case Member::Gaussian: return "gaussian";
    case Member::Gamma: return "gamma";
    case Member::InverseGaussian: return "inverse-gaussian";
    case Member::Poisson: return "poisson";
    case Member::NegativeBinomial: return "negative-binomial";
  }
  return "?";
}

Member member_from_string(std::string_view s) {
  for (Member m : kAllMembers)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown member '" + std::string(s) + "'");
}

FamilySpec member_family(Member m) {
  switch (m) {
    case Member::Gaussian: return FamilySpec::for_kind(AttributeKind::RealContinuous);
    case Member::Gamma:
    case Member::InverseGaussian: return FamilySpec::for_kind(AttributeKind::PositiveContinuous);
    case Member::Poisson:
    case Member::NegativeBinomial: return FamilySpec::for_kind(AttributeKind::NonNegativeDiscrete);
  }
  throw ConfigError("unknown member");
}

double member_alpha(Member m) {
  switch (m) {
    case Member::InverseGaussian: return -1.0;
    case Member::NegativeBinomial: return 1.0;
    default: return 0.0;
  }
}

bool member_discrete(Member m) { return m == Member::Poisson || m == Member::NegativeBinomial; }

std::vector<double> sample_member(Member m, double mu, double kappa, std::size_t n, Rng& rng) {
  if (!std::isfinite(mu) || !(kappa > 0.0) || !std::isfinite(kappa))
    throw DomainError("member parameters must be finite with positive dispersion");
  if (m != Member::Gaussian && !(mu > 0.0))
    throw DomainError(std::string(to_string(m)) + " needs a positive mean");
  if (member_discrete(m) && std::fabs(kappa - 1.0) > 1e-12)
    throw DomainError("discrete members have unit dispersion");

  std::vector<double> out(n);
  switch (m) {
    case Member::Gaussian: {
      std::normal_distribution<double> d(mu, std::sqrt(kappa));
      for (auto& v : out) v = d(rng);
      break;
    }
    case Member::Gamma: {
      std::gamma_distribution<double> d(1.0 / kappa, kappa * mu);
      for (auto& v : out) v = positive(d(rng));
      break;
    }
    case Member::InverseGaussian: {
      std::normal_distribution<double> z(0.0, 1.0);
      for (auto& v : out) v = positive(inverse_gaussian(mu, 1.0 / kappa, rng, z));
      break;
    }
    case Member::Poisson: {
      std::poisson_distribution<long long> d(mu);
      for (auto& v : out) v = static_cast<double>(d(rng));
      break;
    }
    case Member::NegativeBinomial: {
      std::gamma_distribution<double> g(1.0, mu);
      for (auto& v : out) {
        const double rate = g(rng);
        v = rate > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(rate)(rng)) : 0.0;
      }
      break;
    }
  }
  return out;
}

GeneratedData generate_heterogeneous(const GeneratorSpec& spec) {
  if (spec.N < 1 || spec.J < 1 || spec.K < 1) throw ConfigError("N, J and K must be positive");
  if (!(spec.dirichlet_concentration > 0.0) || !(spec.kappa_shape > 0.0) ||
      !(spec.kappa_scale > 0.0) || !(spec.separation > 0.0))
    throw ConfigError("generator parameters must be positive");
  if (!spec.members.empty() && spec.members.size() != 1 && spec.members.size() != spec.J)
    throw ConfigError("members must list one entry or one per attribute");

  Rng rng(spec.seed);
  const std::size_t N = spec.N, J = spec.J, K = spec.K;

  std::vector<double> pi(K);
  double total = 0.0;
  for (auto& p : pi) total += (p = draw_gamma(spec.dirichlet_concentration, 1.0, rng));
  for (auto& p : pi) p /= total;

  GeneratedData g;
  g.truth.pi = pi;
  g.truth.mu = Matrix(K, J);
  const double log_sep = std::log(spec.separation);

  for (std::size_t j = 0; j < J; ++j) {
    Member m{};
    FamilySpec f = member_family(Member::Gaussian);
    double alpha = 0.0, kappa = 1.0;
    auto draw_attribute = [&] {
      if (spec.members.empty())
        m = kAllMembers[std::uniform_int_distribution<int>(0, 4)(rng)];
      else
        m = spec.members[spec.members.size() == 1 ? 0 : j];
      f = member_family(m);
      alpha = member_alpha(m);
      kappa = member_discrete(m) ? 1.0
                                 : 1.0 / draw_gamma(spec.kappa_shape, 1.0 / spec.kappa_scale, rng);
    };
    draw_attribute();

    std::size_t proposals = 0, streak = 0;
    for (std::size_t h = 0; h < K; ++h) {
      for (;;) {
        if (++proposals > spec.max_proposals)
          throw GeneratorTimeout("centroid rejection sampling for attribute " + std::to_string(j) +
                                 " exceeded " + std::to_string(spec.max_proposals) + " proposals");
        if (spec.redraw_after && streak >= spec.redraw_after) {
          draw_attribute();
          streak = 0;
          h = 0;
        }
        const double cand = propose_centroid(m, rng);
        bool ok = true;
        for (std::size_t o = 0; o < h && ok; ++o) {
          const double other = g.truth.mu(o, j);
          ok = log_density(other, cand, kappa, alpha, f) < log_sep &&
               log_density(cand, other, kappa, alpha, f) < log_sep;
        }
        if (ok) {
          g.truth.mu(h, j) = cand;
          streak = 0;
          break;
        }
        ++streak;
      }
    }
    g.members.push_back(m);
    g.truth.families.push_back(f);
    g.truth.alpha.push_back(alpha);
    g.truth.kappa.push_back(kappa);
  }

  const std::vector<int> labels = draw_labels(pi, N, rng);
  std::vector<std::vector<std::size_t>> rows(K);
  for (std::size_t i = 0; i < N; ++i) rows[static_cast<std::size_t>(labels[i])].push_back(i);

  g.data.values = Matrix(N, J);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t h = 0; h < K; ++h) {
      const auto draws = sample_member(g.members[j], g.truth.mu(h, j), g.truth.kappa[j],
                                       rows[h].size(), rng);
      for (std::size_t k = 0; k < rows[h].size(); ++k) g.data.values(rows[h][k], j) = draws[k];
    }
    g.data.names.push_back("x" + std::to_string(j));
  }
  g.data.kinds = detect_kinds(g.data.values);
  g.data.labels = labels;
  return g;
}

GeneratedData generate_homogeneous_1d(Member m, std::size_t K, std::size_t N, Rng& rng,
                                      double separation) {
  GeneratorSpec spec;
  spec.N = N;
  spec.J = 1;
  spec.K = K;
  spec.members = {m};
  spec.separation = separation;
  spec.seed = rng();
  return generate_heterogeneous(spec);
}

double quantile7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<std::pair<double, double>> qq_quantiles(std::vector<double> a, std::vector<double> b,
                                                    std::size_t q) {
  if (q < 2) throw ConfigError("need at least two quantiles");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < q; ++k) {
    const double p = static_cast<double>(k) / static_cast<double>(q - 1);
    out.emplace_back(quantile7(a, p), quantile7(b, p));
  }
  return out;
}

std::optional<Member> named_member(const FamilySpec& family, double alpha) {
  constexpr double tol = 1e-9;
  auto near = [&](double a) { return std::fabs(alpha - a) <= tol; };
  switch (family.family_class()) {
    case FamilyClass::MorrisReal:
      if (near(0.0)) return Member::Gaussian;
      break;
    case FamilyClass::Tweedie:
      if (near(0.0)) return Member::Gamma;
      if (near(-1.0)) return Member::InverseGaussian;
      break;
    case FamilyClass::MorrisCount:
      if (near(0.0)) return Member::Poisson;
      if (near(1.0)) return Member::NegativeBinomial;
      break;
  }
  return std::nullopt;
}

Matrix sample_mixture(const MixtureParams& params, const std::vector<Member>& members,
                      std::size_t n, Rng& rng, std::vector<int>* labels) {
  if (members.size() != params.J()) throw LengthMismatch("one member per attribute required");
  const std::vector<int> lab = draw_labels(params.pi, n, rng);
  Matrix out(n, params.J());
  std::vector<std::vector<std::size_t>> rows(params.K());
  for (std::size_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(lab[i])].push_back(i);
  for (std::size_t j = 0; j < params.J(); ++j)
    for (std::size_t h = 0; h < params.K(); ++h) {
      const auto d = sample_member(members[j], params.mu(h, j), params.kappa[j], rows[h].size(), rng);
      for (std::size_t k = 0; k < rows[h].size(); ++k) out(rows[h][k], j) = d[k];
    }
  if (labels) *labels = lab;
  return out;
}

}  // namespace adaclust
