#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace salab {

// Generator for one replication. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; Gaussian and uniform transforms below are
// implemented here (not via <random> distributions) so draws are identical
// across standard libraries.
class Rng {
 public:
  Rng() : Rng(0, 0) {}

  // Streams are keyed by (base_seed, stream) only, so replicate r sees the
  // same draws no matter which thread or in which order it runs.
  Rng(std::uint64_t base_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed),
                      static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x5a17u};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe for log().
  double uniform_open0() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  // Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename Derived>
  void fill_normal(Eigen::MatrixBase<Derived>& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out.derived().coeffRef(i) = normal();
  }

  // Index i with probability cdf[i] - cdf[i-1]; cdf must end at 1.
  std::size_t categorical(std::span<const double> cdf) {
    const double u = uniform();
    for (std::size_t i = 0; i + 1 < cdf.size(); ++i) {
      if (u < cdf[i]) return i;
    }
    return cdf.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace salab
