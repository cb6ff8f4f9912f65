#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "adaclust/error.hpp"
#include "adaclust/evaluation.hpp"
#include "adaclust/rng.hpp"
#include "adaclust/soft_cluster.hpp"

using namespace adaclust;

namespace {

double plogp_sum(const std::map<std::pair<int, int>, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [k, c] : counts) h -= (c / n) * std::log(c / n);
  return h;
}

// I = H(U) + H(V) - H(U,V), every entropy from its own frequency table.
double nmi_oracle(const std::vector<int>& u, const std::vector<int>& v) {
  std::map<std::pair<int, int>, double> cu, cv, cuv;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cu[{u[i], 0}] += 1;
    cv[{0, v[i]}] += 1;
    cuv[{u[i], v[i]}] += 1;
  }
  const double n = static_cast<double>(u.size());
  const double hu = plogp_sum(cu, n), hv = plogp_sum(cv, n), huv = plogp_sum(cuv, n);
  return (hu + hv - huv) / std::sqrt(hu * hv);
}

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(rng() % k);
  return out;
}

}  // namespace

TEST(Nmi, IdenticalLabelings) {
  EXPECT_DOUBLE_EQ(nmi({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(nmi({3, 3, 3}, {7, 7, 7}), 1.0);
}

TEST(Nmi, SingleClusterPredictionIsZero) {
  EXPECT_EQ(nmi({0, 0, 1, 1}, {0, 0, 0, 0}), 0.0);
  EXPECT_EQ(nmi({0, 0, 0, 0}, {0, 1, 0, 1}), 0.0);
}

TEST(Nmi, HandComputedExample) {
  const std::vector<int> u{0, 0, 1, 1}, v{0, 1, 1, 1};
  EXPECT_NEAR(nmi(u, v), nmi_oracle(u, v), 1e-14);
  EXPECT_NEAR(nmi(u, v), 0.3446, 2e-3);
}

TEST(Nmi, MatchesEntropyOracleOnRandomLabelings) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto u = random_labels(200, 2 + t % 4, rng);
    auto v = u;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (rng() % 3 == 0) v[i] = static_cast<int>(rng() % 5);
    EXPECT_NEAR(nmi(u, v), nmi_oracle(u, v), 1e-12);
  }
}

TEST(Nmi, SymmetricAndPermutationInvariant) {
  Rng rng(7);
  const auto u = random_labels(300, 4, rng);
  const auto v = random_labels(300, 3, rng);
  EXPECT_NEAR(nmi(u, v), nmi(v, u), 1e-14);
  auto w = v;
  for (auto& l : w) l = (l + 1) % 3 + 10;
  EXPECT_NEAR(nmi(u, v), nmi(u, w), 1e-14);
  const double x = nmi(u, v);
  EXPECT_GE(x, 0.0);
  EXPECT_LE(x, 1.0);
}

TEST(Nmi, LengthMismatch) {
  EXPECT_THROW(nmi({0, 1}, {0}), LengthMismatch);
}

TEST(Contingency, Counts) {
  const auto t = ContingencyTable::build({5, 5, 2, 2, 2}, {1, 0, 0, 0, 1});
  EXPECT_EQ(t.total, 5);
  ASSERT_EQ(t.n_true(), 2u);
  ASSERT_EQ(t.n_pred(), 2u);
  EXPECT_EQ(t.counts[0][0], 1);
  EXPECT_EQ(t.counts[0][1], 1);
  EXPECT_EQ(t.counts[1][0], 1);
  EXPECT_EQ(t.counts[1][1], 2);
}

TEST(Inertia, PointsAsOwnCentroids) {
  Matrix X(3, 2);
  X(0, 0) = 1;
  X(1, 1) = -2;
  X(2, 0) = 5;
  EXPECT_EQ(inertia(X, {0, 1, 2}, X), 0.0);
}

TEST(Inertia, TwoPointsOneCentroid) {
  Matrix X(2, 1);
  X(1, 0) = 2.0;
  EXPECT_DOUBLE_EQ(inertia(X, {0, 0}, Matrix(1, 1, 1.0)), 2.0);
  EXPECT_THROW(inertia(X, {0}, Matrix(1, 1, 1.0)), LengthMismatch);
}

TEST(PerSample, StandardGaussianAtMlFit) {
  Matrix X(2, 1);
  X(0, 0) = -1.0;
  X(1, 0) = 1.0;
  SoftConfig cfg;
  cfg.mode = FitMode::ML;
  cfg.gaussian_only = true;
  const auto res = fit(X, gaussian_families(1), 1, cfg);
  EXPECT_NEAR(res.params.mu(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(res.params.kappa[0], 1.0, 1e-15);
  const double expected = -0.5 * std::log(2.0 * M_PI) - 0.5;
  EXPECT_NEAR(per_sample(res.quasi_loglik, 2), expected, 1e-12);
  EXPECT_NEAR(per_sample(res.quasi_loglik, 2), -1.419, 5e-4);
}
