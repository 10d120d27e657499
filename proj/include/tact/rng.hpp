#ifndef TACT_RNG_HPP_
#define TACT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace tact {

// All randomness flows from one root seed through named substreams. Seeds are
// mixed with splitmix64 so adjacent (tag, index) pairs land far apart.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t root, std::string_view tag,
                               std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(root ^ splitmix64(h) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

// mt19937_64 engine with hand-rolled uniform/normal transforms. The standard
// distribution objects are implementation-defined, which would break the
// byte-identical serialization guarantees across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n), Lemire's multiply-shift rejection.
  int uniform_int(int n) {
    auto un = static_cast<std::uint64_t>(n);
    std::uint64_t x = gen_();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * un;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < un) {
      std::uint64_t t = (0 - un) % un;
      while (lo < t) {
        x = gen_();
        m = static_cast<unsigned __int128>(x) * un;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<int>(m >> 64);
  }

  // Box-Muller with one cached variate.
  double normal(double mean = 0.0, double sigma = 1.0) {
    if (have_cached_) {
      have_cached_ = false;
      return mean + sigma * cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return mean + sigma * r * std::cos(theta);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = uniform_int(i + 1);
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Inverse-CDF draw from a categorical given an externally supplied uniform.
// Shared uniforms let counterfactual branches reuse one decision-noise stream.
inline int categorical_from_u(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace tact

#endif  // TACT_RNG_HPP_
