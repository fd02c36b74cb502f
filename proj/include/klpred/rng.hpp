#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

namespace klpred {

// Deterministic substream derivation: every Monte Carlo estimate is seeded by
// hash(master, index, tag), so a sweep's per-point results do not depend on
// execution order or thread count.
std::uint64_t splitmix64_next(std::uint64_t& state);
std::uint64_t hash64(std::string_view s);
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index,
                             std::string_view tag);

// mt19937_64 with an explicit Box-Muller transform so the normal stream is
// fixed by this code alone, not by the standard library's distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vec(int p) {
    Eigen::VectorXd z(p);
    for (int i = 0; i < p; ++i) z[i] = normal();
    return z;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace klpred
