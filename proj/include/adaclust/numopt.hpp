#pragma once

// Bounded minimization used by the alpha step of the EM and the parameter
// step of GMoM-HC.

#include <functional>
#include <utility>
#include <vector>

namespace adaclust {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(const std::vector<double>& x) const;
  std::vector<double> project(std::vector<double> x) const;
};

struct ScalarOptions {
  double grad_tol = 1e-6;
  double bound_tol = 1e-9;
  double x_tol = 1e-12;
  // First trial step away from x0; 0 picks 0.1 * (1 + |x0|).
  double initial_step = 0.0;
  int max_evaluations = 200;
};

struct ScalarResult {
  double x;
  double f;
  double df;
  int evaluations;
};

// Returns value and derivative at x from a single evaluation.
using ScalarFdf = std::function<std::pair<double, double>(double)>;

// Local descent from x0: geometric bracketing in the downhill direction, then
// safeguarded secant/bisection on the derivative. The result is never worse
// than x0. Non-finite values inside the box are treated as +inf walls.
ScalarResult minimize_scalar_bounded(const ScalarFdf& fdf, double lo, double hi, double x0,
                                     const ScalarOptions& opt = {});
ScalarResult minimize_scalar_bounded(const std::function<double(double)>& f,
                                     const std::function<double(double)>& df, double lo,
                                     double hi, double x0, const ScalarOptions& opt = {});

struct BoxOptions {
  double pg_tol = 1e-5;
  int max_iter = 500;
  int memory = 10;
  double armijo = 1e-4;
};

struct BoxResult {
  std::vector<double> x;
  double f;
  double pg_norm;
  int iterations;
  bool converged;
};

using VectorFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Projected limited-memory BFGS with Armijo backtracking along the projected
// path. An empty gradient falls back to central differences.
BoxResult minimize_box(const VectorFn& f, const GradientFn& grad, const Box& box,
                       const std::vector<double>& x0, const BoxOptions& opt = {});

// Central differences with step max(1e-7, 1e-7 |x_i|), one-sided at active
// bounds.
std::vector<double> numerical_gradient(const VectorFn& f, const std::vector<double>& x,
                                       const Box& box);

double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const Box& box);

}  // namespace adaclust
