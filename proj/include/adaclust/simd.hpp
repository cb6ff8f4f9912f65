#pragma once

// Dense reduction kernels used in the hot loops (k-means distances, M-step
// accumulations, inertia). Each kernel has a scalar reference implementation
// and an AVX2 variant; the active table is picked once at startup from CPUID
// and can be pinned with ADACLUST_SIMD=scalar|avx2 or force_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace adaclust::simd {

enum class Isa { Scalar, Avx2 };

struct Kernels {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * (x[i] - c)^2
  double (*weighted_squared_deviation)(const double* w, const double* x, double c,
                                       std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();
// Null when the binary was built without AVX2 support.
const Kernels* avx2_kernels();

bool avx2_supported();
Isa active_isa();
// Pins the dispatch table. Throws ConfigError when the ISA is unavailable.
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

const Kernels& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline double weighted_squared_deviation(std::span<const double> w, std::span<const double> x,
                                         double c) {
  return active().weighted_squared_deviation(w.data(), x.data(), c, w.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace adaclust::simd
