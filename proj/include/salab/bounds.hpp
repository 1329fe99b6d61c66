#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "salab/schedule.hpp"

namespace salab {

// Which power of u_c2 multiplies the d*sigma_bar^2 term of eps_tilde. The
// averaged-iterate bound carries u^4; its contractive specialization carries u^2.
enum class UExponent { four = 4, two = 2 };

struct BoundParams {
  double nu = 1.0;
  double M = 1.0;
  double N = 0.0;
  double R = std::numeric_limits<double>::infinity();
  double sigma_bar_sq = 1.0;
  double sigma_hat_sq = 0.0;
  double u_c2 = 1.0;
  double d = 1.0;
  StepSchedule schedule{1.0, 2.0, 0.0};
  UExponent u_exponent = UExponent::four;

  void validate() const;
};

// f(delta, k): high-probability envelope with ||x_i - x*||^2 <= alpha_i f for i <= k.
class TailEnvelope {
 public:
  enum class Kind { additive_contractive, multiplicative, user_supplied };

  TailEnvelope(Kind kind, std::function<double(double, std::int64_t)> fn)
      : kind_(kind), fn_(std::move(fn)) {}

  static TailEnvelope constant(double value) {
    return {Kind::user_supplied, [value](double, std::int64_t) { return value; }};
  }

  double operator()(double delta, std::int64_t k) const { return fn_(delta, k); }
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
  std::function<double(double, std::int64_t)> fn_;
};

std::int64_t k0(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double g_factor(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double epsilon_tilde(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double epsilon_bar(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double main_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double crude_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);
double combined_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);

// The five summands of eps_tilde, leading term first.
std::vector<double> epsilon_tilde_terms(const BoundParams& p, const TailEnvelope& f, double delta,
                                        std::int64_t k);

struct LeadingTerms {
  double small_delta = 0.0;   // 24 u^4 s^2 log(1/delta) / (nu^2 (k+1))
  double log_two = 0.0;       // same with log(2/delta)
  double with_dimension = 0.0;  // log(2/delta) form plus the 3 u^e d s^2 term
};
LeadingTerms leading_terms(const BoundParams& p, double delta, std::int64_t k);

struct BoundRow {
  std::int64_t k = 0;
  double delta = 0.0;
  double eps_tilde = 0.0;
  double eps_bar = 0.0;
  double main = 0.0;
  double crude = 0.0;
  double combined = 0.0;
  double f_value = 0.0;  // f(delta/2, k), the value inside eps_tilde
  std::int64_t k0 = 0;
};
BoundRow evaluate_bounds(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k);

// Additive-noise contractive envelope.
struct AdditiveNoiseConfig {
  double sigma_sq = 1.0;
  double gamma_c = 0.5;
  double mu = 1.0;
  double c_d = 1.0;
  double x0_err_sq = 0.0;
  double L = 1.0;
  double u_cM = 1.0;
  double l_cM = 1.0;
  double u_Mc_dual = 1.0;
  double l_cs = 1.0;
  double u_cs = 1.0;
  double a_scale = 2.0;

  // Constants when the smoothing norm equals the contraction norm.
  static AdditiveNoiseConfig same_smoothing_norm(double sigma_sq, double gamma_c, double mu, double c_d,
                                                 double x0_err_sq, double L);
};

struct AdditiveConstants {
  double gamma_tilde = 0.0;
  double D_bar = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0;
  double d1 = 0.0;
  std::int64_t d1_argmax = 0;
  std::int64_t d1_scan_end = 0;
  double h_threshold = 0.0;
  bool threshold_met = true;
};

AdditiveConstants additive_constants(const AdditiveNoiseConfig& cfg, const StepSchedule& s);
double f_additive(const AdditiveNoiseConfig& cfg, const StepSchedule& s, double delta, std::int64_t k);
TailEnvelope additive_envelope(const AdditiveNoiseConfig& cfg, const StepSchedule& s);

// Multiplicative-noise envelope; only u0 and beta4 enter the value.
struct MultiplicativeConfig {
  double beta1 = 1.0, beta2 = 1.0, beta3 = 1.0, beta4 = 1.0;
  double u0 = 0.0;
};

double f_multiplicative(const MultiplicativeConfig& cfg, const StepSchedule& s, double delta, std::int64_t k);
TailEnvelope multiplicative_envelope(const MultiplicativeConfig& cfg, const StepSchedule& s);
// exp(2 xi / h - beta2 alpha / h^xi) <= 1, the "h large enough" proxy at i = 0.
bool multiplicative_h_ok(const MultiplicativeConfig& cfg, const StepSchedule& s);

struct TdConstants {
  double R_max = 1.0;
  double gamma = 0.9;
  double n = 1.0;  // may be +inf
  double mu_min = 0.5;
  double n_states = 2.0;
};
double leading_td_bound(const TdConstants& c, double delta, std::int64_t k);

struct QConstants {
  double R_max = 1.0;
  double gamma = 0.9;
  double rho_b = 0.1;
  double n_states = 2.0;
  double n_actions = 2.0;
};
double leading_q_bound(const QConstants& c, double delta, std::int64_t k);
// 4 (24 log(2/delta) + 3|S||A|) R^2 / ((1-gamma)^4 rho_b^2 (k+1)).
double leading_q_bound_proof_form(const QConstants& c, double delta, std::int64_t k);

// c (log(1/delta) + 1)/(k+1) + c_high k^{-5/4} delta^{-1/2}; c is not given in closed form.
double offpolicy_bound_shape(double c, double c_high, double delta, std::int64_t k);

}  // namespace salab
