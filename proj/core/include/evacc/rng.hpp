#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evacc {

/// Random stream used everywhere in the library. Streams are derived from a
/// root seed by name so that independent consumers (environment, weight
/// init, action sampling, evaluation) never perturb each other.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : engine_(mix(seed)), seed_(seed) {}

  /// Derive an independent child stream keyed by `name` and `index`.
  Rng substream(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return Rng(mix(seed_ ^ mix(h + index)));
  }

  std::uint64_t seed() const { return seed_; }
  Engine& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  Engine engine_;
  std::uint64_t seed_;
};

}  // namespace evacc
