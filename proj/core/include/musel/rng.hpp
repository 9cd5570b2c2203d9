#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace musel {

// splitmix64 step; used for seed mixing only.
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic, cross-platform RNG. The engine is std::mt19937_64 (its
// output sequence is fixed by the standard) and all distributions are
// implemented here rather than via std:: distributions, whose sequences
// are implementation-defined.
//
// Stream splitting: spawn(i) derives an independent child stream as
// splitmix64(seed ^ splitmix64(i+1)); replicate r of a run with master
// seed s always uses Rng(s).spawn(r), on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  Rng spawn(std::uint64_t stream) const {
    std::uint64_t a = stream + 1;
    std::uint64_t mixed = seed_ ^ splitmix64(a);
    return Rng(splitmix64(mixed));
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Marsaglia polar method
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // uniform on {0, ..., n-1}, unbiased via rejection
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // k distinct values from {0, ..., n-1}, in draw order (partial Fisher-Yates)
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
      out[i] = pool[i];
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace musel
