#pragma once

#include <cstdint>
#include <random>

namespace lsnet {

/// Named random streams. Each stream is seeded independently from the master
/// seed so that, for example, replicate adjacency draws never perturb the
/// model parameters.
enum class Stream : std::uint64_t {
  degree = 1,
  latent = 2,
  covariate = 3,
  adjacency = 4,
  init = 5,
  kmeans = 6,
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// mt19937_64 with hand-written variate transforms. The standard library's
/// distributions are implementation-defined, these are not.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}
  Rng(std::uint64_t seed, Stream stream)
      : engine_(derive_seed(seed, static_cast<std::uint64_t>(stream))) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Standard normal conditioned on [lo, hi], by rejection.
  double truncated_normal(double lo, double hi);
  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lsnet
