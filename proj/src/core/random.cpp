#include "mlcs/random.hpp"

#include <cmath>
#include <numbers>

namespace mlcs {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(base.value);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return Seed{h};
}

CounterRng::CounterRng(Seed seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed.value) ^ stream)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  // Two rounds so that adjacent counters decorrelate fully.
  return splitmix64(splitmix64(key_ ^ counter) + counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t CounterRng::bounded(std::uint64_t counter, std::uint64_t bound) const {
  const unsigned __int128 wide = static_cast<unsigned __int128>(bits(counter)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace mlcs
