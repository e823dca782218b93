#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace rodfluid {

/// SplitMix64 finalizer. Used to derive independent replica streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replica `replica` in stream `stream` under master seed `master`.
///
/// Splitting rule: seed = mix64(mix64(master ^ mix64(stream)) ^ mix64(~replica)).
/// A replica's stream depends only on (master, stream, replica), never on
/// the thread that runs it, so ensembles are reproducible under any schedule.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t stream,
                                     std::uint64_t replica) noexcept {
  return mix64(mix64(master ^ mix64(stream)) ^ mix64(~replica));
}

/// Random source. The engine is mt19937_64 (bit-exact across standard
/// libraries); the variates below are computed here rather than through
/// <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 5489u) : engine_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate (rate > 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n), n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rodfluid
