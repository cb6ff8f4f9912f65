#pragma once

// Parametrized classes of steep exponential dispersion models.
//
// Three classes are supported, each indexed by a topology hyper-parameter
// alpha:
//   MorrisCount  unit variance x(1 + alpha x), counts; alpha = 0 is Poisson,
//                alpha = 1 the (geometric) negative binomial.
//   MorrisReal   unit variance 1 + alpha x^2, real line; alpha = 0 is Gaussian,
//                alpha = 1 the generalized hyperbolic secant.
//   Tweedie      unit variance x^(2 - alpha), non-negative/positive reals;
//                alpha = 2 Gaussian, 1 Poisson, 0 gamma, -1 inverse Gaussian.
//
// Densities use the saddle-point approximation and are returned in the log
// domain. All functions are pure and thread-safe.

#include <string_view>

namespace adaclust {

enum class AttributeKind {
  NonNegativeDiscrete,
  PositiveDiscrete,
  RealContinuous,
  NonNegativeContinuous,
  PositiveContinuous,
  // Pseudo-kind: values in (0, 1) are logit-transformed to RealContinuous
  // before they reach the density code.
  UnitInterval,
};

enum class FamilyClass { MorrisCount, MorrisReal, Tweedie };

std::string_view to_string(AttributeKind kind);
std::string_view to_string(FamilyClass cls);
AttributeKind attribute_kind_from_string(std::string_view s);
FamilyClass family_class_from_string(std::string_view s);

inline constexpr double kBranchTolerance = 1e-12;
inline constexpr double kDefaultSaddleConstant = 1.0 / 3.0;

class FamilySpec {
 public:
  // Table mapping from data type to parametrized class. UnitInterval is
  // rejected; transform the column first.
  static FamilySpec for_kind(AttributeKind kind);

  FamilyClass family_class() const noexcept { return class_; }
  AttributeKind support() const noexcept { return support_; }
  bool discrete() const noexcept {
    return support_ == AttributeKind::NonNegativeDiscrete ||
           support_ == AttributeKind::PositiveDiscrete;
  }

  // Constant c of the discrete saddle-point form: 1/3 when the support
  // contains zero, otherwise 0.
  double saddle_constant() const noexcept {
    return (support_ == AttributeKind::NonNegativeDiscrete ||
            support_ == AttributeKind::NonNegativeContinuous)
               ? kDefaultSaddleConstant
               : 0.0;
  }

  // Finite working box used by the optimizers.
  double alpha_lo() const noexcept { return alpha_lo_; }
  double alpha_hi() const noexcept { return alpha_hi_; }

  // Theoretical hyper-parameter domain (open/closed ends respected).
  bool alpha_in_domain(double alpha) const noexcept;
  // x in the convex support for this alpha.
  bool in_support(double x, double alpha) const noexcept;
  // y in the interior of the convex support (the mean domain).
  bool in_mean_domain(double y) const noexcept;
  // Smallest admissible mean value; -inf for the real line.
  double mean_lower_bound() const noexcept;

  // Default starting topology for fits.
  double default_alpha() const noexcept;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;

 private:
  FamilySpec(FamilyClass cls, AttributeKind support, double lo, double hi)
      : class_(cls), support_(support), alpha_lo_(lo), alpha_hi_(hi) {}

  FamilyClass class_;
  AttributeKind support_;
  double alpha_lo_;
  double alpha_hi_;
};

// Unit Bregman divergence d(x, y | alpha) >= 0.
double divergence(double x, double y, double alpha, const FamilySpec& family);
// Partial derivative of divergence() with respect to alpha.
double divergence_dalpha(double x, double y, double alpha, const FamilySpec& family);

// Unit variance function v(x | alpha) > 0.
double variance_function(double x, double alpha, const FamilySpec& family);
double variance_dalpha(double x, double alpha, const FamilySpec& family);

// Mean-value mapping theta -> mu and its inverse.
double mean_value_map(double theta, double alpha, const FamilySpec& family);
double inverse_mean_value_map(double mu, double alpha, const FamilySpec& family);

// The saddle-point log density splits into a part that does not depend on the
// mean (the normalizer) and a scaled divergence:
//   log p(x | mu, kappa, alpha) = log_normalizer(x) - scaled_divergence(x, mu).
// Discrete supports, and the point mass at zero of the non-negative
// continuous class, use the lattice form with arguments kappa*x, kappa*mu and
// variance at kappa*(x + c).
bool uses_lattice_form(double x, const FamilySpec& family) noexcept;

double log_normalizer(double x, double kappa, double alpha, const FamilySpec& family);
double log_normalizer_dalpha(double x, double kappa, double alpha, const FamilySpec& family);
double scaled_divergence(double x, double mu, double kappa, double alpha,
                         const FamilySpec& family);
double scaled_divergence_dalpha(double x, double mu, double kappa, double alpha,
                                const FamilySpec& family);

double log_density(double x, double mu, double kappa, double alpha, const FamilySpec& family);
double log_density_dalpha(double x, double mu, double kappa, double alpha,
                          const FamilySpec& family);

}  // namespace adaclust
