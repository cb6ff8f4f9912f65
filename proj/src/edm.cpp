#include "adaclust/edm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "adaclust/error.hpp"

namespace adaclust {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)
// Below this |z| (or alpha * scale) the closed forms lose digits to
// cancellation and the power series take over.
constexpr double kSeriesThreshold = 0.05;
constexpr int kMaxSeriesTerms = 40;

bool near(double a, double b) { return std::fabs(a - b) < kBranchTolerance; }

// (expm1(z) - z) / z
double f1(double z) {
  if (std::fabs(z) < kSeriesThreshold) {
    // sum_{m>=2} z^(m-1) / m!
    double term = 0.5 * z;  // m = 2
    double s = term;
    for (int m = 3; m < kMaxSeriesTerms; ++m) {
      term *= z / m;
      s += term;
      if (std::fabs(term) < 1e-18 * std::fabs(s)) break;
    }
    return s;
  }
  return (std::expm1(z) - z) / z;
}

// (z e^z - expm1(z)) / z^2
double f2(double z) {
  if (std::fabs(z) < kSeriesThreshold) {
    // sum_{m>=2} z^(m-2) (m-1) / m!
    double pow_over_fact = 0.5;  // z^(m-2)/m! at m = 2
    double s = pow_over_fact;
    for (int m = 3; m < kMaxSeriesTerms; ++m) {
      pow_over_fact *= z / m;
      const double term = pow_over_fact * (m - 1);
      s += term;
      if (std::fabs(term) < 1e-18 * std::fabs(s)) break;
    }
    return s;
  }
  return (z * std::exp(z) - std::expm1(z)) / (z * z);
}

[[noreturn]] void domain_fail(const char* what, double v) {
  throw DomainError(std::string(what) + " (value " + std::to_string(v) + ")");
}

void check_alpha(double alpha, const FamilySpec& f) {
  if (!f.alpha_in_domain(alpha)) domain_fail("alpha outside the hyper-parameter domain", alpha);
}
void check_support(double x, double alpha, const FamilySpec& f) {
  if (!f.in_support(x, alpha)) domain_fail("x outside the convex support", x);
}
void check_mean(double y, const FamilySpec& f) {
  if (!f.in_mean_domain(y)) domain_fail("mean outside the interior of the support", y);
}

// ---- MorrisCount: v(x) = x (1 + alpha x) ---------------------------------

// h = (log1p(alpha y) - log1p(alpha x)) / alpha and dh/dalpha.
struct CountTerms {
  double h;
  double dh;
};

CountTerms count_terms(double x, double y, double alpha) {
  const double u = alpha * y;
  const double v = alpha * x;
  if (std::max(u, v) < kSeriesThreshold) {
    // h  = sum_{n>=1} (-1)^(n+1) (y u^(n-1) - x v^(n-1)) / n
    // h' = sum_{n>=2} (-1)^(n+1) (n-1)/n (y^2 u^(n-2) - x^2 v^(n-2))
    double h = 0.0, dh = 0.0;
    double yu = y, xv = x;            // y u^(n-1), x v^(n-1)
    double yyu = y * y, xxv = x * x;  // y^2 u^(n-2), x^2 v^(n-2)
    for (int n = 1; n < kMaxSeriesTerms; ++n) {
      const double sign = (n % 2 == 1) ? 1.0 : -1.0;
      const double th = sign * (yu - xv) / n;
      h += th;
      if (n >= 2) {
        dh += sign * (n - 1.0) / n * (yyu - xxv);
        yyu *= u;
        xxv *= v;
      }
      yu *= u;
      xv *= v;
      if (n > 3 && std::fabs(yu) + std::fabs(xv) < 1e-18 * (std::fabs(h) + 1e-300)) break;
    }
    return {h, dh};
  }
  const double a = std::log1p(u) - std::log1p(v);
  const double da = y / (1.0 + u) - x / (1.0 + v);
  return {a / alpha, (alpha * da - a) / (alpha * alpha)};
}

double xlogxy(double x, double y) { return x == 0.0 ? 0.0 : x * (std::log(x) - std::log(y)); }

double count_divergence(double x, double y, double alpha) {
  if (near(alpha, 0.0)) return x == 0.0 ? y : y - x + xlogxy(x, y);
  if (x == 0.0) return std::log1p(alpha * y) / alpha;
  const CountTerms t = count_terms(x, y, alpha);
  return t.h * (1.0 + alpha * x) + xlogxy(x, y);
}

double count_divergence_dalpha(double x, double y, double alpha) {
  if (near(alpha, 0.0)) return -0.5 * (x - y) * (x - y);
  const CountTerms t = count_terms(x, y, alpha);
  return t.dh * (1.0 + alpha * x) + t.h * x;
}

// ---- MorrisReal: v(x) = 1 + alpha x^2 -----------------------------------

struct RealTerms {
  double d;
  double dd;
};

RealTerms real_terms(double x, double y, double alpha) {
  const double a = alpha * x * x;
  const double b = alpha * y * y;
  if (std::max(a, b) < kSeriesThreshold) {
    // d  = x sum_{n>=0} (-1)^n (x a^n - y b^n)/(2n+1)
    //    + sum_{n>=1} (-1)^(n+1) (y^2 b^(n-1) - x^2 a^(n-1))/(2n)
    // d' = x sum_{n>=1} (-1)^n n (x^3 a^(n-1) - y^3 b^(n-1))/(2n+1)
    //    + sum_{n>=2} (-1)^(n+1) (n-1) (y^4 b^(n-2) - x^4 a^(n-2))/(2n)
    double d = 0.0, dd = 0.0;
    double xa = x, yb = y;                          // x a^n, y b^n
    double xxa = x * x, yyb = y * y;                // x^2 a^(n-1), y^2 b^(n-1)
    double x3a = x * x * x, y3b = y * y * y;        // x^3 a^(n-1), ...
    double x4a = x * x * x * x, y4b = y * y * y * y;  // x^4 a^(n-2), ...
    for (int n = 0; n < kMaxSeriesTerms; ++n) {
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      d += x * sign * (xa - yb) / (2.0 * n + 1.0);
      if (n >= 1) {
        d += -sign * (yyb - xxa) / (2.0 * n);
        dd += x * sign * n * (x3a - y3b) / (2.0 * n + 1.0);
        xxa *= a;
        yyb *= b;
        x3a *= a;
        y3b *= b;
      }
      if (n >= 2) {
        dd += -sign * (n - 1.0) * (y4b - x4a) / (2.0 * n);
        x4a *= a;
        y4b *= b;
      }
      xa *= a;
      yb *= b;
      if (n > 3 && std::fabs(x4a) + std::fabs(y4b) + std::fabs(xa) + std::fabs(yb) <
                       1e-18 * (std::fabs(d) + std::fabs(dd) + 1e-300))
        break;
    }
    return {d, dd};
  }
  const double s = std::sqrt(alpha);
  const double datan = std::atan(s * x) - std::atan(s * y);
  const double p = x * datan / s;
  const double lq = std::log1p(b) - std::log1p(a);
  const double q = lq / (2.0 * alpha);
  const double dp_ds = x * ((x / (1.0 + a) - y / (1.0 + b)) / s - datan / (s * s));
  const double dp = dp_ds / (2.0 * s);
  const double dq = ((b / (1.0 + b) - a / (1.0 + a)) - lq) / (2.0 * alpha * alpha);
  return {p + q, dp + dq};
}

double real_divergence(double x, double y, double alpha) {
  if (near(alpha, 0.0)) return 0.5 * (x - y) * (x - y);
  return real_terms(x, y, alpha).d;
}

double real_divergence_dalpha(double x, double y, double alpha) {
  if (near(alpha, 0.0)) {
    return -std::pow(x, 4) / 12.0 + x * y * y * y / 3.0 - std::pow(y, 4) / 4.0;
  }
  return real_terms(x, y, alpha).dd;
}

// ---- Tweedie: v(x) = x^(2 - alpha) --------------------------------------
//
// For x, y > 0 write d = y^alpha g(r) with r = x/y, L = log r. Around alpha=0
//   g = (L - (r - 1) + L f1(alpha L)) / (alpha - 1)
// and around alpha = 1 (delta = alpha - 1)
//   g = (r L - (r - 1) + r L f1(delta L)) / alpha.
// Both are exact; picking the one whose denominator stays away from zero
// removes the cancellation at the Itakura-Saito and Poisson members.

struct TweedieTerms {
  double g;
  double dg;
};

TweedieTerms tweedie_g(double lx, double ly, double alpha) {
  const double lr = lx - ly;
  const double r = std::exp(lr);
  if (alpha < 0.5) {
    const double z = alpha * lr;
    const double g = (lr - (r - 1.0) + lr * f1(z)) / (alpha - 1.0);
    const double dg = (lr * lr * f2(z) - g) / (alpha - 1.0);
    return {g, dg};
  }
  const double delta = alpha - 1.0;
  const double z = delta * lr;
  const double g = (r * lr - (r - 1.0) + r * lr * f1(z)) / alpha;
  const double dg = (r * lr * lr * f2(z) - g) / alpha;
  return {g, dg};
}

double tweedie_divergence(double x, double y, double alpha) {
  if (x == 0.0) return near(alpha, 1.0) ? y : std::pow(y, alpha) / alpha;
  if (near(alpha, 0.0)) {
    const double q = x / y;
    return q - std::log(q) - 1.0;
  }
  if (near(alpha, 1.0)) return x * (std::log(x) - std::log(y)) + (y - x);
  if (near(alpha, 2.0)) return 0.5 * (x - y) * (x - y);
  const double ly = std::log(y);
  const TweedieTerms t = tweedie_g(std::log(x), ly, alpha);
  return std::exp(alpha * ly) * t.g;
}

double tweedie_divergence_dalpha(double x, double y, double alpha) {
  const double ly = std::log(y);
  if (x == 0.0) {
    const double ya = std::exp(alpha * ly);
    return ya * (ly / alpha - 1.0 / (alpha * alpha));
  }
  const TweedieTerms t = tweedie_g(std::log(x), ly, alpha);
  return std::exp(alpha * ly) * (ly * t.g + t.dg);
}

}  // namespace

// ---- names ----------------------------------------------------------------

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::NonNegativeDiscrete: return "NonNegativeDiscrete";
    case AttributeKind::PositiveDiscrete: return "PositiveDiscrete";
    case AttributeKind::RealContinuous: return "RealContinuous";
    case AttributeKind::NonNegativeContinuous: return "NonNegativeContinuous";
    case AttributeKind::PositiveContinuous: return "PositiveContinuous";
    case AttributeKind::UnitInterval: return "UnitInterval";
  }
  return "?";
}

std::string_view to_string(FamilyClass cls) {
  switch (cls) {
    case FamilyClass::MorrisCount: return "MorrisCount";
    case FamilyClass::MorrisReal: return "MorrisReal";
    case FamilyClass::Tweedie: return "Tweedie";
  }
  return "?";
}

AttributeKind attribute_kind_from_string(std::string_view s) {
  for (auto k : {AttributeKind::NonNegativeDiscrete, AttributeKind::PositiveDiscrete,
                 AttributeKind::RealContinuous, AttributeKind::NonNegativeContinuous,
                 AttributeKind::PositiveContinuous, AttributeKind::UnitInterval})
    if (to_string(k) == s) return k;
  throw ParseError("unknown attribute kind '" + std::string(s) + "'");
}

FamilyClass family_class_from_string(std::string_view s) {
  for (auto c : {FamilyClass::MorrisCount, FamilyClass::MorrisReal, FamilyClass::Tweedie})
    if (to_string(c) == s) return c;
  throw ParseError("unknown family class '" + std::string(s) + "'");
}

// ---- FamilySpec -----------------------------------------------------------

FamilySpec FamilySpec::for_kind(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::NonNegativeDiscrete:
    case AttributeKind::PositiveDiscrete:
      return FamilySpec(FamilyClass::MorrisCount, kind, 0.0, 1e3);
    case AttributeKind::RealContinuous:
      return FamilySpec(FamilyClass::MorrisReal, kind, 0.0, 1e3);
    case AttributeKind::NonNegativeContinuous:
      return FamilySpec(FamilyClass::Tweedie, kind, 1e-3, 1.0);
    case AttributeKind::PositiveContinuous:
      return FamilySpec(FamilyClass::Tweedie, kind, -20.0, 2.0);
    case AttributeKind::UnitInterval:
      break;
  }
  throw DomainError("UnitInterval columns must be logit-transformed before family selection");
}

bool FamilySpec::alpha_in_domain(double alpha) const noexcept {
  if (!std::isfinite(alpha)) return false;
  switch (class_) {
    case FamilyClass::MorrisCount:
    case FamilyClass::MorrisReal:
      return alpha >= 0.0;
    case FamilyClass::Tweedie:
      if (support_ == AttributeKind::NonNegativeContinuous) return alpha > 0.0 && alpha <= 1.0;
      return alpha <= 2.0;
  }
  return false;
}

bool FamilySpec::in_support(double x, double alpha) const noexcept {
  if (!std::isfinite(x)) return false;
  switch (class_) {
    case FamilyClass::MorrisCount:
      return x >= 0.0;
    case FamilyClass::MorrisReal:
      return true;
    case FamilyClass::Tweedie:
      if (x > 0.0) return true;
      return x == 0.0 && alpha > 0.0 && alpha <= 1.0;
  }
  return false;
}

bool FamilySpec::in_mean_domain(double y) const noexcept {
  if (!std::isfinite(y)) return false;
  return class_ == FamilyClass::MorrisReal || y > 0.0;
}

double FamilySpec::mean_lower_bound() const noexcept {
  return class_ == FamilyClass::MorrisReal ? -kInf : 0.0;
}

double FamilySpec::default_alpha() const noexcept {
  if (class_ == FamilyClass::Tweedie && support_ == AttributeKind::NonNegativeContinuous) return 0.5;
  return 0.0;
}

// ---- divergences ----------------------------------------------------------

double divergence(double x, double y, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  check_support(x, alpha, family);
  check_mean(y, family);
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: return count_divergence(x, y, alpha);
    case FamilyClass::MorrisReal: return real_divergence(x, y, alpha);
    case FamilyClass::Tweedie: return tweedie_divergence(x, y, alpha);
  }
  return 0.0;
}

double divergence_dalpha(double x, double y, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  check_support(x, alpha, family);
  check_mean(y, family);
  if (x == y) return 0.0;
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: return count_divergence_dalpha(x, y, alpha);
    case FamilyClass::MorrisReal: return real_divergence_dalpha(x, y, alpha);
    case FamilyClass::Tweedie: return tweedie_divergence_dalpha(x, y, alpha);
  }
  return 0.0;
}

double variance_function(double x, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  check_mean(x, family);
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: return x * (1.0 + alpha * x);
    case FamilyClass::MorrisReal: return 1.0 + alpha * x * x;
    case FamilyClass::Tweedie: return std::pow(x, 2.0 - alpha);
  }
  return 0.0;
}

double variance_dalpha(double x, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  check_mean(x, family);
  switch (family.family_class()) {
    case FamilyClass::MorrisCount:
    case FamilyClass::MorrisReal: return x * x;
    case FamilyClass::Tweedie: return -std::log(x) * std::pow(x, 2.0 - alpha);
  }
  return 0.0;
}

// ---- mean-value mapping ---------------------------------------------------

double mean_value_map(double theta, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  if (!std::isfinite(theta)) domain_fail("theta must be finite", theta);
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: {
      const double et = std::exp(theta);
      if (alpha * et >= 1.0) domain_fail("theta outside the natural parameter domain", theta);
      return et / (1.0 - alpha * et);
    }
    case FamilyClass::MorrisReal: {
      if (near(alpha, 0.0)) return theta;
      const double s = std::sqrt(alpha);
      if (std::fabs(s * theta) >= std::numbers::pi / 2.0)
        domain_fail("theta outside the natural parameter domain", theta);
      return std::tan(s * theta) / s;
    }
    case FamilyClass::Tweedie: {
      if (near(alpha, 1.0)) return std::exp(theta);
      const double delta = alpha - 1.0;
      if (1.0 + delta * theta <= 0.0) domain_fail("theta outside the natural parameter domain", theta);
      return std::exp(std::log1p(delta * theta) / delta);
    }
  }
  return 0.0;
}

double inverse_mean_value_map(double mu, double alpha, const FamilySpec& family) {
  check_alpha(alpha, family);
  check_mean(mu, family);
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: return std::log(mu) - std::log1p(alpha * mu);
    case FamilyClass::MorrisReal: {
      if (near(alpha, 0.0)) return mu;
      const double s = std::sqrt(alpha);
      return std::atan(s * mu) / s;
    }
    case FamilyClass::Tweedie: {
      const double lm = std::log(mu);
      if (near(alpha, 1.0)) return lm;
      // (mu^delta - 1) / delta = lm * expm1(z)/z with z = delta * lm
      const double z = (alpha - 1.0) * lm;
      return lm * (1.0 + f1(z));
    }
  }
  return 0.0;
}

// ---- saddle-point densities -----------------------------------------------

bool uses_lattice_form(double x, const FamilySpec& family) noexcept {
  return family.discrete() ||
         (family.support() == AttributeKind::NonNegativeContinuous && x == 0.0);
}

double log_normalizer(double x, double kappa, double alpha, const FamilySpec& family) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) domain_fail("kappa must be positive", kappa);
  check_alpha(alpha, family);
  check_support(x, alpha, family);
  if (uses_lattice_form(x, family)) {
    const double arg = kappa * (x + family.saddle_constant());
    const double v = variance_function(arg, alpha, family);
    return 0.5 * (std::log(kappa) - kLog2Pi - std::log(v));
  }
  if (!family.in_mean_domain(x)) domain_fail("x on the boundary of the support", x);
  const double v = variance_function(x, alpha, family);
  return -0.5 * (kLog2Pi + std::log(kappa) + std::log(v));
}

double log_normalizer_dalpha(double x, double kappa, double alpha, const FamilySpec& family) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) domain_fail("kappa must be positive", kappa);
  check_alpha(alpha, family);
  check_support(x, alpha, family);
  double arg = x;
  if (uses_lattice_form(x, family)) {
    arg = kappa * (x + family.saddle_constant());
  } else if (!family.in_mean_domain(x)) {
    domain_fail("x on the boundary of the support", x);
  }
  // d/dalpha log v(arg | alpha), in closed form per class
  double dlogv = 0.0;
  switch (family.family_class()) {
    case FamilyClass::MorrisCount: dlogv = arg / (1.0 + alpha * arg); break;
    case FamilyClass::MorrisReal: dlogv = arg * arg / (1.0 + alpha * arg * arg); break;
    case FamilyClass::Tweedie: dlogv = -std::log(arg); break;
  }
  return -0.5 * dlogv;
}

double scaled_divergence(double x, double mu, double kappa, double alpha,
                         const FamilySpec& family) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) domain_fail("kappa must be positive", kappa);
  if (uses_lattice_form(x, family)) return divergence(kappa * x, kappa * mu, alpha, family) / kappa;
  return divergence(x, mu, alpha, family) / kappa;
}

double scaled_divergence_dalpha(double x, double mu, double kappa, double alpha,
                                const FamilySpec& family) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) domain_fail("kappa must be positive", kappa);
  if (uses_lattice_form(x, family))
    return divergence_dalpha(kappa * x, kappa * mu, alpha, family) / kappa;
  return divergence_dalpha(x, mu, alpha, family) / kappa;
}

double log_density(double x, double mu, double kappa, double alpha, const FamilySpec& family) {
  return log_normalizer(x, kappa, alpha, family) - scaled_divergence(x, mu, kappa, alpha, family);
}

double log_density_dalpha(double x, double mu, double kappa, double alpha,
                          const FamilySpec& family) {
  return log_normalizer_dalpha(x, kappa, alpha, family) -
         scaled_divergence_dalpha(x, mu, kappa, alpha, family);
}

}  // namespace adaclust
