#pragma once

// Data-parallel inner loops used by the tensor ops. Every kernel has a
// scalar reference implementation; an AVX2/FMA variant is compiled into a
// separate translation unit and selected at runtime when the CPU supports it.
//
// All matrices are row-major and contiguous.

#include <cstddef>
#include <string_view>

namespace mobgen::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  // C[m x n] = A[m x k] * B[k x n]   (or C += ... when accumulate is true)
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               const double* b, double* c, bool accumulate);
  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

// The table currently in use. Initialized on first call from CPU detection,
// overridable with MOBGEN_SIMD=scalar|avx2 in the environment.
const KernelTable& kernels() noexcept;
const KernelTable& kernels_for(Isa isa);
Isa active_isa() noexcept;
// Throws std::invalid_argument if the ISA is not supported on this CPU/build.
void set_active_isa(Isa isa);

namespace scalar {
const KernelTable& table() noexcept;
}  // namespace scalar

namespace avx2 {
// nullptr when the build has no AVX2 translation unit.
const KernelTable* table() noexcept;
}  // namespace avx2

}  // namespace mobgen::simd
