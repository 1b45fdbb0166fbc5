#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rmcst {

/// Mersenne-twister stream keyed by a master seed and a stream path, so every
/// replication (or bootstrap resample) draws from its own reproducible
/// sequence regardless of scheduling order.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  /// Inverse transform -log(V) / rate.
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rmcst
