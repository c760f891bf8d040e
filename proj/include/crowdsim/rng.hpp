#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace crowdsim::rng {

// Counter-style 64-bit generator (splitmix64). Small enough to embed one
// per agent, and its output is identical on every platform, which the
// byte-identical replay contract depends on. std::mt19937_64 would also be
// portable, but the std distributions on top of it are not.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_ = 0x2545f4914f6cdd1dULL;
};

// One-shot avalanche of a 64-bit value; used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-agent stream seed: spawning order cannot perturb an agent's draws.
inline std::uint64_t agent_stream_seed(std::uint64_t run_seed,
                                       std::uint64_t agent_id) {
  return mix64(run_seed ^ mix64(agent_id + 0x9e3779b97f4a7c15ULL));
}

// Uniform double in [0, 1) from the top 53 bits. Portable, unlike
// std::uniform_real_distribution.
template <class Urbg>
double uniform_double(Urbg& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n must be > 0.
template <class Urbg>
std::uint64_t uniform_below(Urbg& g, std::uint64_t n) {
  const std::uint64_t limit = SplitMix64::max() - SplitMix64::max() % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

// Fisher–Yates with the portable integer draw above.
template <class T, class Urbg>
void shuffle(std::vector<T>& v, Urbg& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace crowdsim::rng
