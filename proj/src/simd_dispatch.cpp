#include <atomic>
#include <cstdlib>
#include <string>

#include "adaclust/error.hpp"
#include "adaclust/simd.hpp"

namespace adaclust::simd {
namespace {

Isa detect() {
  if (const char* env = std::getenv("ADACLUST_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && avx2_supported() && avx2_kernels() != nullptr) return Isa::Avx2;
  }
  return (avx2_supported() && avx2_kernels() != nullptr) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && (!avx2_supported() || avx2_kernels() == nullptr))
    throw ConfigError("AVX2 kernels requested but not supported on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const Kernels& active() {
  return active_isa() == Isa::Avx2 ? *avx2_kernels() : scalar_kernels();
}

}  // namespace adaclust::simd
