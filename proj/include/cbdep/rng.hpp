#ifndef CBDEP_RNG_HPP_
#define CBDEP_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace cbdep {

// splitmix64 finalizer; used for seed derivation and stable tie-break keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Stable per-task seed: identical on every platform and independent of
// execution order, so simulation records depend only on the configuration.
inline std::uint64_t stable_task_seed(std::uint64_t master_seed, std::string_view descriptor,
                                      std::uint64_t n, std::uint64_t replication) {
  std::uint64_t h = splitmix64(master_seed ^ fnv1a64(descriptor));
  h = splitmix64(h + 0x100000001B3ULL * n);
  h = splitmix64(h + 0x9E3779B97F4A7C15ULL * (replication + 1));
  return h;
}

// mt19937_64 with a portable double conversion. The engine is fully
// specified by the standard; std::uniform_real_distribution is not, so
// uniforms are built from raw 53-bit draws instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on the open interval (0,1); never returns 0 or 1 exactly.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cbdep

#endif  // CBDEP_RNG_HPP_
