#include "adaclust/numopt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "adaclust/error.hpp"

namespace adaclust {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double x, f, g;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_box(const Box& box, std::size_t n) {
  if (box.lower.size() != n || box.upper.size() != n)
    throw ConfigError("box dimension does not match the starting point");
  for (std::size_t i = 0; i < n; ++i)
    if (!(box.lower[i] < box.upper[i])) throw ConfigError("box lower bound must be below upper");
}

}  // namespace

bool Box::contains(const std::vector<double>& x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  return true;
}

std::vector<double> Box::project(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

ScalarResult minimize_scalar_bounded(const ScalarFdf& fdf, double lo, double hi, double x0,
                                     const ScalarOptions& opt) {
  if (!(lo < hi)) throw ConfigError("scalar box requires lo < hi");
  if (!(x0 >= lo && x0 <= hi)) throw ConfigError("x0 outside the scalar box");

  int evals = 0;
  auto eval = [&](double x) {
    ++evals;
    auto [f, g] = fdf(x);
    if (!std::isfinite(f) || !std::isfinite(g)) return Point{x, kInf, 0.0};
    return Point{x, f, g};
  };

  Point a = eval(x0);
  if (!std::isfinite(a.f))
    throw NonFinite("objective is not finite at the starting point " + std::to_string(x0));

  auto done = [&](const Point& p) {
    if (std::fabs(p.g) <= opt.grad_tol) return true;
    if (p.x - lo <= opt.bound_tol && p.g > 0.0) return true;
    if (hi - p.x <= opt.bound_tol && p.g < 0.0) return true;
    return false;
  };
  if (done(a)) return {a.x, a.f, a.g, evals};

  const double dir = a.g < 0.0 ? 1.0 : -1.0;
  double step = opt.initial_step > 0.0 ? opt.initial_step : 0.1 * (1.0 + std::fabs(x0));

  // Bracketing: walk downhill with growing steps until the slope turns, the
  // value rises, or the bound is hit.
  Point b{};
  for (;;) {
    const double xt = std::clamp(a.x + dir * step, lo, hi);
    b = eval(xt);
    if (!std::isfinite(b.f) || b.f > a.f || b.g * dir >= 0.0) break;
    a = b;
    if (done(a) || xt == lo || xt == hi || evals >= opt.max_evaluations)
      return {a.x, a.f, a.g, evals};
    step *= 3.0;
  }

  // Refinement inside [a, b]: a is the best point and slopes towards b.
  while (evals < opt.max_evaluations && std::fabs(b.x - a.x) > opt.x_tol * (1.0 + std::fabs(a.x))) {
    const double w = b.x - a.x;
    double t = a.x + 0.5 * w;
    if (std::isfinite(b.f) && b.g * dir >= 0.0 && b.g != a.g) {
      const double s = a.x - a.g * w / (b.g - a.g);
      const double frac = (s - a.x) / w;
      if (std::isfinite(s) && frac > 0.0) t = a.x + std::clamp(frac, 0.05, 0.95) * w;
    }
    const Point p = eval(t);
    if (std::isfinite(p.f) && p.f <= a.f && p.g * dir < 0.0) {
      a = p;
    } else if (std::isfinite(p.f) && p.f <= a.f && std::fabs(p.g) <= opt.grad_tol) {
      return {p.x, p.f, p.g, evals};
    } else {
      b = p;
    }
    if (done(a)) break;
  }
  if (std::isfinite(b.f) && b.f < a.f) return {b.x, b.f, b.g, evals};
  return {a.x, a.f, a.g, evals};
}

ScalarResult minimize_scalar_bounded(const std::function<double(double)>& f,
                                     const std::function<double(double)>& df, double lo,
                                     double hi, double x0, const ScalarOptions& opt) {
  return minimize_scalar_bounded(
      [&](double x) { return std::pair<double, double>{f(x), df(x)}; }, lo, hi, x0, opt);
}

std::vector<double> numerical_gradient(const VectorFn& f, const std::vector<double>& x,
                                       const Box& box) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-7, 1e-7 * std::fabs(x[i]));
    const double up = std::min(x[i] + h, box.upper[i]);
    const double dn = std::max(x[i] - h, box.lower[i]);
    xp[i] = up;
    const double fu = f(xp);
    xp[i] = dn;
    const double fd = f(xp);
    xp[i] = x[i];
    g[i] = (fu - fd) / (up - dn);
  }
  return g;
}

double projected_gradient_norm(const std::vector<double>& x, const std::vector<double>& g,
                               const Box& box) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // length of the step x - P(x - g) along coordinate i
    const double p = x[i] - std::clamp(x[i] - g[i], box.lower[i], box.upper[i]);
    s += p * p;
  }
  return std::sqrt(s);
}

BoxResult minimize_box(const VectorFn& f, const GradientFn& grad, const Box& box,
                       const std::vector<double>& x0, const BoxOptions& opt) {
  const std::size_t n = x0.size();
  check_box(box, n);
  auto gradient = [&](const std::vector<double>& x) {
    return grad ? grad(x) : numerical_gradient(f, x, box);
  };

  std::vector<double> x = box.project(x0);
  double fx = f(x);
  if (!std::isfinite(fx)) throw NonFinite("objective is not finite at the starting point");
  std::vector<double> g = gradient(x);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;

  BoxResult res{x, fx, projected_gradient_norm(x, g, box), 0, false};
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    res.pg_norm = projected_gradient_norm(x, g, box);
    if (res.pg_norm <= opt.pg_tol) {
      res.converged = true;
      break;
    }

    // Variables held at a bound by the gradient stay fixed this iteration.
    std::vector<char> fixed(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      fixed[i] = (x[i] <= box.lower[i] && g[i] > 0.0) || (x[i] >= box.upper[i] && g[i] < 0.0);

    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = fixed[i] ? 0.0 : g[i];
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha[k] = memory[k].rho * dot(memory[k].s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * memory[k].y[i];
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, q);
      for (std::size_t i = 0; i < n; ++i) q[i] += (alpha[k] - beta) * memory[k].s[i];
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = fixed[i] ? 0.0 : -q[i];

    auto search = [&](const std::vector<double>& dir, double t0, std::vector<double>& xn,
                      double& fn) {
      double t = t0;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        xn = x;
        for (std::size_t i = 0; i < n; ++i) xn[i] += t * dir[i];
        xn = box.project(std::move(xn));
        std::vector<double> step(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = xn[i] - x[i];
        const double decrease = dot(g, step);
        if (decrease >= 0.0) continue;
        fn = f(xn);
        if (std::isfinite(fn) && fn <= fx + opt.armijo * decrease) return true;
      }
      return false;
    };

    std::vector<double> xn;
    double fn = fx;
    bool ok = dot(d, g) < 0.0 && search(d, 1.0, xn, fn);
    if (!ok) {
      memory.clear();
      std::vector<double> sd(n);
      for (std::size_t i = 0; i < n; ++i) sd[i] = fixed[i] ? 0.0 : -g[i];
      const double gn = std::sqrt(dot(sd, sd));
      ok = gn > 0.0 && search(sd, 1.0 / std::max(1.0, gn), xn, fn);
    }
    if (!ok) break;  // no further decrease representable

    std::vector<double> gn = gradient(xn);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      memory.push_back({s, y, 1.0 / sy});
      if (memory.size() > static_cast<std::size_t>(opt.memory)) memory.pop_front();
    } else {
      memory.clear();  // negative curvature along s: stale pairs would stall the search
    }
    x = std::move(xn);
    g = std::move(gn);
    fx = fn;
    res.iterations = it + 1;
  }
  res.x = x;
  res.f = fx;
  res.pg_norm = projected_gradient_norm(x, g, box);
  res.converged = res.converged || res.pg_norm <= opt.pg_tol;
  return res;
}

}  // namespace adaclust
