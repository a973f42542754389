#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace quinelab {

// mt19937_64 is specified bit-exactly by the standard; the distributions
// are not, so the few we need are written out here to keep traces
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, n), rejection sampling. n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [0, 1) with 53 bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool coin(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Seed for the i-th independent stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
  std::uint64_t z = master ^ (0x9e3779b97f4a7c15ULL * (i + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace quinelab
