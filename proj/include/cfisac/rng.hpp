#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace cfisac {

/// Independent purposes that each get their own random sub-stream.
enum class Stream : std::uint64_t {
  kLayout = 1,
  kUsers = 2,
  kShadowing = 3,
  kStatistics = 4,
  kOperatingChannel = 5,
  kSymbols = 6,
  kClutter = 7,
  kVerification = 8,
};

/// Mixes (master, index, stream) into a 64-bit seed with splitmix64 finalizers.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream stream);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// Deterministic generator. Uniform and Gaussian draws are computed here from
/// raw 64-bit words so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cfisac
