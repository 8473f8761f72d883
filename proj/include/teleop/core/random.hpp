#pragma once

#include <cstdint>
#include <random>

namespace teleop {

/// Seeded generator shared by the simulators. Same seed, same call
/// sequence, same draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double gaussian(double stddev) {
    if (stddev == 0.0) return 0.0;
    return normal_(engine_) * stddev;
  }
  double uniform() { return uniform_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace teleop
