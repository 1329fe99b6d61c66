#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "salab/norms.hpp"
#include "salab/operators.hpp"
#include "salab/random.hpp"
#include "salab/schedule.hpp"

namespace salab {

// y_k = y_{k-1} + (x_k - y_{k-1}) / (k + 1); returns x_0 when k = 0.
template <typename DerivedY, typename DerivedX>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> update_average(
    const Eigen::MatrixBase<DerivedY>& y_prev, const Eigen::MatrixBase<DerivedX>& x_k, std::int64_t k) {
  if (k == 0) return x_k;
  using S = typename DerivedX::Scalar;
  return y_prev + (x_k - y_prev) / static_cast<S>(k + 1);
}

struct Trajectory {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> err_x;  // ||x_k - x*||^2
  std::vector<double> err_y;  // ||y_k - x*||^2
  std::string norm_id;
  Eigen::VectorXd x_final;
  Eigen::VectorXd y_final;
};

struct SaConfig {
  StepSchedule schedule{1.0, 2.0, 0.0};
  Eigen::VectorXd x0;
  std::int64_t horizon = 0;
  std::vector<std::int64_t> checkpoints;
  NormSpec norm;
};

// Floor of r^j for j = 0, 1, ..., deduplicated, up to and including horizon.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon, double r);

// x_{k+1} = (1 - a_k) x_k + a_k F(x_k, w_{k+1}) from x_0, with running averages.
// Throws NonFiniteIterate on the first NaN or infinite coordinate.
Trajectory run_sa(const StochasticOperator& op, const SaConfig& cfg, Rng& rng);
Trajectory run_sa(const StochasticOperator& op, const SaConfig& cfg, std::uint64_t seed);

}  // namespace salab
