#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "salab/bounds.hpp"
#include "salab/operators.hpp"
#include "salab/random.hpp"

namespace salab {

// Finite MDP. P has one row per (s, a) pair at index s * n_actions + a.
class TabularMdp {
 public:
  TabularMdp(int n_states, int n_actions, Matrix P, Matrix R, double gamma, double R_max);

  int n_states() const { return S_; }
  int n_actions() const { return A_; }
  double gamma() const { return gamma_; }
  double R_max() const { return R_max_; }
  const Matrix& P() const { return P_; }
  const Matrix& R() const { return R_; }  // S x A
  Eigen::Index row(int s, int a) const { return static_cast<Eigen::Index>(s) * A_ + a; }

 private:
  int S_;
  int A_;
  Matrix P_;
  Matrix R_;
  double gamma_;
  double R_max_;
};

// pi(a|s) as an S x A row-stochastic table.
using Policy = Matrix;
void validate_policy(const TabularMdp& mdp, const Policy& pi);

Matrix policy_transition(const TabularMdp& mdp, const Policy& pi);
Vector policy_reward(const TabularMdp& mdp, const Policy& pi);

// Balance equations with normalization, solved directly.
Vector stationary_distribution(const Matrix& P);
// Cesaro-averaged power iteration; a cross-check for the direct solve.
Vector stationary_by_power(const Matrix& P, int iterations);

Vector exact_value(const TabularMdp& mdp, const Policy& pi);

struct QStarResult {
  Vector Q;            // index s * |A| + a
  double gap = 0.0;    // min over s of best minus second-best action value
  double residual = 0.0;
  int iterations = 0;
  std::vector<int> greedy;
};
// Value iteration to residual <= tol (1-gamma) / (2 gamma), then an exact
// evaluation of the greedy policy. Throws GreedyNotUnique when gap <= gap_tol.
QStarResult exact_qstar(const TabularMdp& mdp, double tol = 1e-12, std::optional<double> gap_tol = 0.0);
Vector bellman_optimality(const TabularMdp& mdp, const Vector& Q);

struct TdOperatorReport {
  Matrix A_pi;
  Vector b_pi;
  Matrix B_pi;
  Matrix C_pi;
  Vector nu_pi;
  Vector mu_pi;
  Vector V_pi;
  double mu_min = 0.0;
  double gamma = 0.0;
  int n = 1;
  double p = 2.0;
  double gamma_c = 0.0;
  double fixed_point_residual = 0.0;

  double gamma_c_at(double p) const;
};
TdOperatorReport td_operator_report(const TabularMdp& mdp, const Policy& pi, int n, double p);

double p_schedule(std::int64_t k, double gamma, double n, double mu_min, double n_states);
double q_p_min(double gamma, double rho_b, int n_states, int n_actions);
double q_contraction_factor(double gamma, double rho_b, int n_states, int n_actions, double p);

// Cumulative distribution tables for fast categorical draws.
struct SamplingTables {
  std::vector<std::vector<double>> policy;      // per state
  std::vector<std::vector<double>> transition;  // per (s, a) row
  std::vector<double> start;
  SamplingTables(const TabularMdp& mdp, const Policy& pi, const Vector& start_dist);
};

// TD(n) with i.i.d. start states S0 ~ mu^pi.
class TdSampler : public StochasticOperator {
 public:
  TdSampler(std::shared_ptr<const TabularMdp> mdp, Policy pi, int n);

  struct Draw {
    int s0 = 0;
    int sn = 0;
    double discounted_reward = 0.0;
  };
  Draw draw(Rng& rng) const;

  Eigen::Index dim() const override { return mdp_->n_states(); }
  void sample(const Vector& x, Rng& rng, Vector& out) const override;
  Vector mean(const Vector& x) const override { return report_.A_pi * x + report_.b_pi; }
  Vector fixed_point() const override { return report_.V_pi; }
  std::optional<Matrix> jacobian_at_fixed_point(Rng& rng) const override;
  AssumptionReport assumptions() const override;
  std::string name() const override { return "td"; }
  using StochasticOperator::sample;

  const TdOperatorReport& report() const { return report_; }
  const TabularMdp& mdp() const { return *mdp_; }
  int n() const { return n_; }

 private:
  std::shared_ptr<const TabularMdp> mdp_;
  Policy pi_;
  int n_;
  double gamma_n_;
  TdOperatorReport report_;
  SamplingTables tables_;
};

// Asynchronous Q-learning with (S, A, S') ~ mu^{pi_b} x pi_b x P.
class QSampler : public StochasticOperator {
 public:
  QSampler(std::shared_ptr<const TabularMdp> mdp, Policy pi_b);

  struct Draw {
    int s = 0;
    int a = 0;
    int s_next = 0;
  };
  Draw draw(Rng& rng) const;

  Eigen::Index dim() const override { return static_cast<Eigen::Index>(mdp_->n_states()) * mdp_->n_actions(); }
  void sample(const Vector& x, Rng& rng, Vector& out) const override;
  Vector mean(const Vector& x) const override;
  Vector fixed_point() const override { return qstar_.Q; }
  std::optional<Matrix> jacobian_at_fixed_point(Rng& rng) const override;
  AssumptionReport assumptions() const override;
  std::string name() const override { return "q_learning"; }
  using StochasticOperator::sample;

  double rho_b() const { return rho_b_; }
  const Vector& visit_probabilities() const { return visit_; }
  const QStarResult& qstar() const { return qstar_; }
  const TabularMdp& mdp() const { return *mdp_; }

 private:
  std::shared_ptr<const TabularMdp> mdp_;
  Policy pi_b_;
  Vector mu_b_;
  Vector visit_;  // mu(s) pi_b(a|s)
  double rho_b_;
  QStarResult qstar_;
  SamplingTables tables_;
};

struct LfaConfig {
  Matrix Phi;  // |S| x d
  Policy pi;
  Policy pi_b;
  int n = 1;
  double zeta = 1.0;
};

struct OffPolicyReport {
  Matrix A_bar;
  Vector b_bar;
  Vector v_pi;
  Vector mu_b;
  double projected_residual = 0.0;
};
OffPolicyReport offpolicy_report(const TabularMdp& mdp, const LfaConfig& cfg);

// Off-policy TD(n) with linear features; F(v, w) = v + (1/zeta) direction(v, w).
class OffPolicyTdSampler : public StochasticOperator {
 public:
  OffPolicyTdSampler(std::shared_ptr<const TabularMdp> mdp, LfaConfig cfg);

  struct Draw {
    std::vector<int> states;   // n + 1 entries
    std::vector<int> actions;  // n entries
    std::vector<double> ratios;  // cumulative products, n entries
  };
  Draw draw(Rng& rng) const;
  Vector direction(const Vector& v, const Draw& w) const;

  Eigen::Index dim() const override { return cfg_.Phi.cols(); }
  void sample(const Vector& x, Rng& rng, Vector& out) const override;
  Vector mean(const Vector& x) const override;
  Vector fixed_point() const override { return report_.v_pi; }
  AssumptionReport assumptions() const override;
  std::string name() const override { return "offpolicy_td_lfa"; }
  using StochasticOperator::sample;

  const OffPolicyReport& report() const { return report_; }
  const LfaConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const TabularMdp> mdp_;
  LfaConfig cfg_;
  OffPolicyReport report_;
  SamplingTables tables_;
};

struct HurwitzResult {
  bool hurwitz = false;
  double abscissa = 0.0;
};
HurwitzResult hurwitz_check(const Matrix& A_bar);

struct LyapunovNorm {
  Matrix W;
  double zeta_star = 1.0;
  double induced_ratio = 0.0;  // exact ||I + A/zeta*||_W
  double sampled_ratio = 0.0;  // max over sampled pairs
  int pairs = 0;
};
// Solves A^T W + W A = -I and doubles zeta from 1 until I + A/zeta is a
// W-norm contraction (exact induced norm), then confirms on sampled pairs.
LyapunovNorm lyapunov_contraction_norm(const Matrix& A_bar, int pairs = 1000, std::uint64_t seed = 11);
double weighted_two_norm(const Matrix& W, const Vector& x);

// Random MDP: Dirichlet(1) transition rows, uniform rewards in [0, R_max].
TabularMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed, double R_max = 1.0);
Policy random_policy(int n_states, int n_actions, std::uint64_t seed);
Policy uniform_policy(int n_states, int n_actions);

void write_mdp(std::ostream& os, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& is);
TabularMdp load_mdp(const std::string& path);

// Plug-in bound for averaged TD(n) in the sup-norm: the combined bound in the
// nu^pi-weighted p-norm at p = p_schedule(k), converted to the sup-norm.
struct RlPluginBound {
  double p = 2.0;
  double gamma_c = 0.0;
  BoundParams params;
  AdditiveNoiseConfig envelope;
  double conversion = 1.0;
  double combined = 0.0;  // in the p-norm
  double bound = 0.0;     // in the sup-norm
  double leading = 0.0;   // closed-form leading term
};
RlPluginBound td_plugin_bound(const TdSampler& td, const StepSchedule& s, const Vector& V0, double delta,
                                std::int64_t k);
RlPluginBound q_plugin_bound(const QSampler& q, const StepSchedule& s, const Vector& Q0, double delta,
                               std::int64_t k);

}  // namespace salab
