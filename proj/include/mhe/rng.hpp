#ifndef MHE_RNG_HPP
#define MHE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace mhe {

// splitmix64 finalizer, used to spread correlated seeds apart.
inline std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic child-seed derivation. The same (root, stream, index) triple
// yields the same child seed regardless of thread layout, which is what makes
// parallel runs bit-identical to serial ones.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = mix_bits(z);
  z += 0x9e3779b97f4a7c15ull * (index + 1);
  return mix_bits(z);
}

// mt19937_64 wrapper with fixed float conversions so draws do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix_bits(seed + 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double uniform_sym(double bound) { return uniform(-bound, bound); }

  // Standard normal via Box-Muller. No cached spare: every draw consumes two
  // uniforms, keeping streams aligned across call patterns.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mhe

#endif  // MHE_RNG_HPP
