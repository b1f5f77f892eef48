#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "zspad/hashing.hpp"

namespace zspad {

// Deterministic random source. Gaussian draws use Box-Muller on the raw
// engine output instead of std::normal_distribution so that generated
// bytes do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n), n >= 1.
  int uniform_int(int n) {
    const uint64_t bound = uint64_t(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return int(v % bound);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = size_t(uniform_int(int(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return splitmix64(fnv1a64(tag, kFnvBasis ^ splitmix64(base)));
}

inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x51ed2701));
}

}  // namespace zspad
