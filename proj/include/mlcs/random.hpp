#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>

namespace mlcs {

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(const Seed&, const Seed&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive mix of a seed with integer keys. Used for stream separation
/// and for per-repetition seeds in sweeps.
Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> keys);

/// Counter-based generator: every draw is a pure function of (key, counter),
/// so parallel consumers get schedule-independent streams.
class CounterRng {
 public:
  explicit CounterRng(Seed seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in (0, 1].
  double uniform(std::uint64_t counter) const;
  /// Uniform integer in [0, bound).
  std::uint64_t bounded(std::uint64_t counter, std::uint64_t bound) const;
  /// Two independent standard normals (Box-Muller on two uniforms).
  std::pair<double, double> normal_pair(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

// Stream identifiers so different consumers of one seed never overlap.
namespace streams {
inline constexpr std::uint64_t noise = 0x6e6f697365ULL;
inline constexpr std::uint64_t mask = 0x6d61736bULL;
inline constexpr std::uint64_t scene = 0x7363656e65ULL;
inline constexpr std::uint64_t power_iteration = 0x706f776572ULL;
}  // namespace streams

}  // namespace mlcs
