#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mobgen/numerics/simd.hpp"

namespace mobgen::simd {

#ifndef MOBGEN_HAVE_AVX2
namespace avx2 {
const KernelTable* table() noexcept { return nullptr; }
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  Isa best = isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
  if (const char* env = std::getenv("MOBGEN_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return best;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernels_for(detect())};
  return table;
}

std::atomic<Isa>& active_tag() {
  static std::atomic<Isa> tag{detect()};
  return tag;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return avx2::table() != nullptr && cpu_has_avx2_fma();
  }
  return false;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD target not supported: " + std::string(isa_name(isa)));
  }
  return isa == Isa::kAvx2 ? *avx2::table() : scalar::table();
}

const KernelTable& kernels() noexcept { return *active_table().load(std::memory_order_acquire); }

Isa active_isa() noexcept {
  (void)active_table();
  return active_tag().load(std::memory_order_acquire);
}

void set_active_isa(Isa isa) {
  const KernelTable& table = kernels_for(isa);
  active_table().store(&table, std::memory_order_release);
  active_tag().store(isa, std::memory_order_release);
}

}  // namespace mobgen::simd
