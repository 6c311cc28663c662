#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mobgen::numerics {

/// Seeded generator with platform-independent uniform and normal draws.
///
/// std::*_distribution output is implementation-defined, so the draws here
/// are derived directly from the 64-bit engine output; corpora and model
/// initializations are then identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from this seed and a name ("init", "shuffle", ...).
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal (Box-Muller, second variate cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::vector<double> normal_vector(std::size_t n);
  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

}  // namespace mobgen::numerics
