#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adaclust/edm.hpp"
#include "adaclust/error.hpp"
#include "adaclust/numopt.hpp"

using namespace adaclust;

TEST(ScalarBounded, Quadratic) {
  auto r = minimize_scalar_bounded([](double x) { return (x - 2) * (x - 2); },
                                   [](double x) { return 2 * (x - 2); }, 0.0, 5.0, 0.0);
  EXPECT_NEAR(r.x, 2.0, 1e-9);
  EXPECT_NEAR(r.f, 0.0, 1e-16);
}

TEST(ScalarBounded, ActiveLowerBound) {
  for (double x0 : {1.0, 2.0, 3.0}) {
    auto r = minimize_scalar_bounded([](double x) { return x; }, [](double) { return 1.0; }, 1.0,
                                     3.0, x0);
    EXPECT_NEAR(r.x, 1.0, 1e-9);
  }
}

TEST(ScalarBounded, ActiveUpperBound) {
  auto r = minimize_scalar_bounded([](double x) { return -std::log(x); },
                                   [](double x) { return -1.0 / x; }, 0.1, 1e3, 0.5);
  EXPECT_DOUBLE_EQ(r.x, 1e3);
}

TEST(ScalarBounded, NeverWorseThanStart) {
  // multimodal: the local search may stay in the nearest basin but not climb
  auto f = [](double x) { return std::sin(3 * x) + 0.1 * x * x; };
  auto df = [](double x) { return 3 * std::cos(3 * x) + 0.2 * x; };
  for (double x0 = -4.0; x0 <= 4.0; x0 += 0.37) {
    auto r = minimize_scalar_bounded(f, df, -4.0, 4.0, x0);
    EXPECT_LE(r.f, f(x0));
    EXPECT_TRUE(std::fabs(df(r.x)) <= 1e-6 || r.x <= -4.0 + 1e-9 || r.x >= 4.0 - 1e-9);
  }
}

TEST(ScalarBounded, NonFiniteStartThrows) {
  EXPECT_THROW(minimize_scalar_bounded([](double x) { return std::log(x); },
                                       [](double x) { return 1 / x; }, -1.0, 1.0, -0.5),
               NonFinite);
}

TEST(ScalarBounded, NonFiniteRegionActsAsWall) {
  // finite only for x < 1; minimum of (x - 2)^2 restricted there is at the wall
  auto fdf = [](double x) -> std::pair<double, double> {
    if (x >= 1.0) return {std::nan(""), std::nan("")};
    return {(x - 2) * (x - 2), 2 * (x - 2)};
  };
  auto r = minimize_scalar_bounded(fdf, 0.0, 5.0, 0.0);
  EXPECT_LT(r.x, 1.0);
  EXPECT_GT(r.x, 0.99);
}

TEST(ScalarBounded, GammaTopologyAgainstGridOracle) {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> gamma(4.0, 0.5);
  std::vector<double> xs(500);
  for (auto& x : xs) x = gamma(rng);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  const FamilySpec fam = FamilySpec::for_kind(AttributeKind::PositiveContinuous);
  // negative quasi-log-likelihood with kappa profiled out at each alpha
  auto nll = [&](double alpha) {
    double sd = 0.0, slv = 0.0;
    for (double x : xs) {
      sd += divergence(x, mean, alpha, fam);
      slv += std::log(variance_function(x, alpha, fam));
    }
    const double n = xs.size();
    const double kappa = 2 * sd / n;
    return sd / kappa + 0.5 * n * std::log(kappa) + 0.5 * slv;
  };
  auto dnll = [&](double alpha) {
    double sd = 0.0, sdd = 0.0, sdv = 0.0;
    for (double x : xs) {
      sd += divergence(x, mean, alpha, fam);
      sdd += divergence_dalpha(x, mean, alpha, fam);
      sdv += -std::log(x);
    }
    const double kappa = 2 * sd / xs.size();
    return sdd / kappa + 0.5 * sdv;
  };
  double grid_best = -20, grid_f = nll(-20);
  for (int k = 0; k <= 2200; ++k) {
    const double a = -20.0 + 0.01 * k;
    if (nll(a) < grid_f) grid_f = nll(a), grid_best = a;
  }
  auto r = minimize_scalar_bounded(nll, dnll, -20.0, 2.0, 0.0);
  EXPECT_NEAR(r.x, grid_best, 0.011);
  EXPECT_NEAR(r.x, 0.0, 0.3);
  EXPECT_LE(r.f, grid_f + 1e-9);
}

TEST(Box, QuadraticInterior) {
  const std::vector<double> c = {0.3, -1.2, 2.5};
  auto f = [&](const std::vector<double>& x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return s;
  };
  Box box{{-5, -5, -5}, {5, 5, 5}};
  auto r = minimize_box(f, {}, box, {0, 0, 0});
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(r.x[i], c[i], 1e-6);
  EXPECT_TRUE(r.converged);
}

TEST(Box, LinearGoesToLowerCorner) {
  auto f = [](const std::vector<double>& x) { return x[0] + x[1]; };
  auto g = [](const std::vector<double>&) { return std::vector<double>{1.0, 1.0}; };
  Box box{{0, 0}, {3, 3}};
  auto r = minimize_box(f, g, box, {2.0, 1.5});
  EXPECT_DOUBLE_EQ(r.x[0], 0.0);
  EXPECT_DOUBLE_EQ(r.x[1], 0.0);
}

TEST(Box, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  auto g = [](const std::vector<double>& x) {
    return std::vector<double>{-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]),
                               200 * (x[1] - x[0] * x[0])};
  };
  Box box{{-2, -2}, {2, 2}};
  auto r = minimize_box(f, g, box, {-1.2, 1.0});
  EXPECT_LE(r.f, 1e-6);
  EXPECT_NEAR(f({1.0, 1.0}), 0.0, 0.0);
  auto rn = minimize_box(f, {}, box, {-1.2, 1.0});
  EXPECT_LE(rn.f, 1e-6);
}

TEST(Box, IteratesStayFeasible) {
  Box box{{0.5, -1}, {2, 1}};
  auto f = [&](const std::vector<double>& x) {
    EXPECT_TRUE(box.contains(x));
    return std::pow(x[0] + 3, 2) + std::pow(x[1] - 4, 2) + x[0] * x[1];
  };
  auto r = minimize_box(f, {}, box, {1.0, 0.0});
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
  EXPECT_LE(r.f, f({1.0, 0.0}));
}

TEST(Box, NumericalGradient) {
  auto f = [](const std::vector<double>& x) { return std::exp(x[0]) * std::sin(x[1]); };
  Box box{{-3, -3}, {3, 3}};
  auto g = numerical_gradient(f, {0.4, 1.1}, box);
  EXPECT_NEAR(g[0], std::exp(0.4) * std::sin(1.1), 1e-7);
  EXPECT_NEAR(g[1], std::exp(0.4) * std::cos(1.1), 1e-7);
  auto gb = numerical_gradient(f, {3.0, 1.1}, box);
  EXPECT_NEAR(gb[0], std::exp(3.0) * std::sin(1.1), 1e-5);
}
