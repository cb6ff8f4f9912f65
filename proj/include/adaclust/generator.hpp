#pragma once

// Synthetic mixtures built from five named EDM members.

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "adaclust/dataset.hpp"
#include "adaclust/rng.hpp"
#include "adaclust/soft_cluster.hpp"

namespace adaclust {

enum class Member { Gaussian, Gamma, InverseGaussian, Poisson, NegativeBinomial };

inline constexpr Member kAllMembers[] = {Member::Gaussian, Member::Gamma, Member::InverseGaussian,
                                         Member::Poisson, Member::NegativeBinomial};

std::string_view to_string(Member m);
Member member_from_string(std::string_view s);

// Family and topology the member belongs to.
FamilySpec member_family(Member m);
double member_alpha(Member m);
bool member_discrete(Member m);

// n draws with mean mu and variance kappa * v(mu | alpha). Discrete members
// require kappa = 1.
std::vector<double> sample_member(Member m, double mu, double kappa, std::size_t n, Rng& rng);

struct GeneratorSpec {
  std::size_t N = 1000;
  std::size_t J = 10;
  std::size_t K = 4;
  double dirichlet_concentration = 1.0;
  double kappa_shape = 1.01;
  double kappa_scale = 1.0;
  double separation = 0.01;
  // Empty: members drawn uniformly per attribute.
  std::vector<Member> members;
  // Per-attribute budget; GeneratorTimeout beyond it.
  std::size_t max_proposals = 100000;
  // After this many rejected proposals in a row the attribute's dispersion
  // (and member, unless members are fixed) is redrawn. 0 never redraws.
  std::size_t redraw_after = 2000;
  std::uint64_t seed = 0;
};

struct GeneratedData {
  Dataset data;             // labels filled
  MixtureParams truth;      // families of the members' natural kinds
  std::vector<Member> members;
};

GeneratedData generate_heterogeneous(const GeneratorSpec& spec);

// One-dimensional K-component mixture of a single member.
GeneratedData generate_homogeneous_1d(Member m, std::size_t K, std::size_t N, Rng& rng,
                                      double separation = 0.01);

// q matched type-7 quantiles of two samples at probabilities k / (q - 1).
std::vector<std::pair<double, double>> qq_quantiles(std::vector<double> a, std::vector<double> b,
                                                    std::size_t q);
double quantile7(const std::vector<double>& sorted, double p);

// n draws from a fitted mixture whose attributes are named members.
Matrix sample_mixture(const MixtureParams& params, const std::vector<Member>& members,
                      std::size_t n, Rng& rng, std::vector<int>* labels = nullptr);

// The named member matching a family and alpha, if any.
std::optional<Member> named_member(const FamilySpec& family, double alpha);

}  // namespace adaclust
