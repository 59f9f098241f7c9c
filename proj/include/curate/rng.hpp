// Copyright the curate authors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.
#ifndef CURATE_RNG_HPP
#define CURATE_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace curate {

// splitmix64; used to derive independent substream seeds from a master seed
// so that runs/steps get decorrelated generators regardless of draw counts.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

// Seeded generator with the handful of distributions the project needs.
// All draws go through one engine so that a fixed seed fixes the whole
// sequence of results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::mt19937_64& engine() { return engine_; }

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("Rng::below needs a positive bound");
    }
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  bool bernoulli(double p) {
    return std::bernoulli_distribution(p)(engine_);
  }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
  }

  double beta(double alpha, double beta_param) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta_param, 1.0);
    double x = ga(engine_);
    double y = gb(engine_);
    return x / (x + y);
  }

  // Number of "good" items in a size-`draws` sample without replacement from
  // an urn of `good` + `bad` items.
  std::int64_t hypergeometric(std::int64_t good, std::int64_t bad,
                              std::int64_t draws) {
    std::int64_t got = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
      std::int64_t total = good + bad;
      if (total <= 0) break;
      if (below(static_cast<std::uint64_t>(total)) <
          static_cast<std::uint64_t>(good)) {
        ++got;
        --good;
      } else {
        --bad;
      }
    }
    return got;
  }

  // Index draw from unnormalised nonnegative weights.
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  // Partial Fisher-Yates: first `k` entries of a random permutation of
  // [0, n). Used for sampling without replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace curate

#endif  // CURATE_RNG_HPP
