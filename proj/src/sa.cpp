#include "salab/sa.hpp"

#include <algorithm>
#include <cmath>

namespace salab {

std::vector<std::int64_t> geometric_checkpoints(std::int64_t horizon, double r) {
  if (!(r > 1)) throw InvalidArgument("geometric checkpoints need a ratio above 1");
  std::vector<std::int64_t> out;
  for (double v = 1.0; v <= static_cast<double>(horizon) + 0.5; v *= r) {
    const auto k = static_cast<std::int64_t>(std::floor(v));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

Trajectory run_sa(const StochasticOperator& op, const SaConfig& cfg, Rng& rng) {
  const Eigen::Index d = op.dim();
  if (cfg.x0.size() != d) throw InvalidArgument("run_sa: x0 has the wrong dimension");
  auto checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  if (!checkpoints.empty() && (checkpoints.front() < 0 || checkpoints.back() > cfg.horizon))
    throw InvalidArgument("run_sa: checkpoints must lie in [0, horizon]");

  const Eigen::VectorXd x_star = op.fixed_point();
  Trajectory tr;
  tr.checkpoints = checkpoints;
  tr.norm_id = cfg.norm.id();
  tr.err_x.reserve(checkpoints.size());
  tr.err_y.reserve(checkpoints.size());

  Eigen::VectorXd x = cfg.x0;
  Eigen::VectorXd y = cfg.x0;
  Eigen::VectorXd fx(d);
  std::size_t next = 0;
  auto record = [&](std::int64_t k) {
    while (next < checkpoints.size() && checkpoints[next] == k) {
      tr.err_x.push_back(squared_norm(cfg.norm, x - x_star));
      tr.err_y.push_back(squared_norm(cfg.norm, y - x_star));
      ++next;
    }
  };
  record(0);
  for (std::int64_t k = 0; k < cfg.horizon; ++k) {
    const double a = cfg.schedule.step(k);
    op.sample(x, rng, fx);
    x = (1.0 - a) * x + a * fx;
    if (!x.allFinite()) throw NonFiniteIterate("iterate left the finite range at k = " + std::to_string(k + 1));
    y += (x - y) / static_cast<double>(k + 2);
    record(k + 1);
  }
  tr.x_final = x;
  tr.y_final = y;
  return tr;
}

Trajectory run_sa(const StochasticOperator& op, const SaConfig& cfg, std::uint64_t seed) {
  Rng rng(seed, 0);
  return run_sa(op, cfg, rng);
}

}  // namespace salab
