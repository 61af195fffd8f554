#include "nac/rng.hpp"

namespace nac {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
  return mix64(mix64(seed + kGolden) ^ (label * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(derive_seed(seed, stream)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int CounterRng::sample(std::span<const double> masses) {
  const double u = uniform();
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] <= 0.0) continue;
    cum += masses[i];
    last_positive = static_cast<int>(i);
    if (u < cum) return last_positive;
  }
  return last_positive;
}

}  // namespace nac
