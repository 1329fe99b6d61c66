#include "salab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "salab/errors.hpp"

namespace salab {

void BoundParams::validate() const {
  if (!(nu > 0)) throw InvalidArgument("bound params: nu must be positive");
  if (!(M >= 0)) throw InvalidArgument("bound params: M must be non-negative");
  if (!(N >= 0)) throw InvalidArgument("bound params: N must be non-negative");
  if (!(R > 0)) throw InvalidArgument("bound params: R must be positive");
  if (!(sigma_bar_sq > 0)) throw InvalidArgument("bound params: sigma_bar^2 must be positive");
  if (!(sigma_hat_sq >= 0)) throw InvalidArgument("bound params: sigma_hat^2 must be non-negative");
  if (!(u_c2 > 0)) throw InvalidArgument("bound params: u_c2 must be positive");
  if (!(d >= 1)) throw InvalidArgument("bound params: d must be at least 1");
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0 && delta < 1)) throw InvalidArgument("delta must lie in (0, 1)");
}

double upow(const BoundParams& p, int e) { return std::pow(p.u_c2, e); }

}  // namespace

std::int64_t k0(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  check_delta(delta);
  if (std::isinf(p.R)) return 0;
  const auto& s = p.schedule;
  const double af = s.alpha() * f(delta / 2, k);
  const double R2 = p.R * p.R;
  if (s.xi() == 0.0) return af <= R2 ? 0 : k + 1;
  const double v = std::pow(af / R2, 1.0 / s.xi()) - s.h();
  if (!(v < static_cast<double>(k + 1))) return k + 1;  // also catches overflow
  const double c = std::max(0.0, std::ceil(v));
  return std::min<std::int64_t>(static_cast<std::int64_t>(c), k + 1);
}

double g_factor(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  check_delta(delta);
  const auto& s = p.schedule;
  const double xi = s.xi();
  const double second = s.alpha() * (1 + p.M) * p.sigma_hat_sq * std::pow(s.h(), 1 - xi) * f(delta / 2, k) /
                        ((1 - xi) * std::pow(k + 1.0, xi));
  return 24 * upow(p, 4) * std::max(p.sigma_bar_sq, second);
}

std::vector<double> epsilon_tilde_terms(const BoundParams& p, const TailEnvelope& f, double delta,
                                        std::int64_t k) {
  check_delta(delta);
  const auto& s = p.schedule;
  const double a = s.alpha(), h = s.h(), xi = s.xi();
  const double kp = k + 1.0;
  const double nu2 = p.nu * p.nu;
  const double fv = f(delta / 2, k);
  const double u4 = upow(p, 4);

  std::vector<double> t(5);
  t[0] = g_factor(p, f, delta, k) / (nu2 * kp) * std::log(2 / delta);
  t[1] = 3 * upow(p, static_cast<int>(p.u_exponent)) * p.d * p.sigma_bar_sq / (nu2 * kp);
  t[2] = 9 * std::pow(h, xi) * (1 + p.M) * fv / (2 * a * std::pow(kp, 2 - xi)) *
         (3 + xi * xi / ((1 - xi / 2) * (1 - xi / 2)));
  t[3] = 3 * std::pow(h, 2 - 2 * xi) * a * a * p.N * p.N * fv * fv * (1 + p.M) /
         (2 * nu2 * std::pow(kp, 2 * xi) * (1 - xi) * (1 - xi));
  t[4] = 3 * std::pow(h, 1 - xi) * u4 * a * p.d * (1 + p.M) * p.sigma_hat_sq * fv /
         (std::pow(kp, 1 + xi) * (1 - xi));
  return t;
}

double epsilon_tilde(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  const auto t = epsilon_tilde_terms(p, f, delta, k);
  return t[0] + t[1] + t[2] + t[3] + t[4];
}

double epsilon_bar(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  const std::int64_t kz = k0(p, f, delta, k);
  if (kz == 0) return 0.0;
  const auto& s = p.schedule;
  const double h = s.h(), xi = s.xi();
  const double e = 1 - xi / 2;
  const double bracket = std::pow(kz - 1 + h, e) - std::pow(h - 1, e);
  return s.alpha() * f(delta, kz - 1) * bracket * bracket / (e * e * (k + 1.0) * (k + 1.0));
}

double main_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  const double r = std::sqrt(epsilon_tilde(p, f, delta, k)) + std::sqrt(epsilon_bar(p, f, delta, k));
  return r * r;
}

double crude_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  check_delta(delta);
  const auto& s = p.schedule;
  const double xi = s.xi();
  const double e = 1 - xi / 2;
  return s.alpha() * std::pow(s.h(), 2 - xi) / (e * e) * f(delta, k + 1) / std::pow(k + 1.0, xi);
}

double combined_bound(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  return std::min(main_bound(p, f, delta, k), crude_bound(p, f, delta, k));
}

LeadingTerms leading_terms(const BoundParams& p, double delta, std::int64_t k) {
  check_delta(delta);
  const double base = 24 * upow(p, 4) * p.sigma_bar_sq / (p.nu * p.nu * (k + 1.0));
  LeadingTerms t;
  t.small_delta = base * std::log(1 / delta);
  t.log_two = base * std::log(2 / delta);
  t.with_dimension = t.log_two + 3 * upow(p, static_cast<int>(p.u_exponent)) * p.d * p.sigma_bar_sq /
                                     (p.nu * p.nu * (k + 1.0));
  return t;
}

BoundRow evaluate_bounds(const BoundParams& p, const TailEnvelope& f, double delta, std::int64_t k) {
  BoundRow r;
  r.k = k;
  r.delta = delta;
  r.eps_tilde = epsilon_tilde(p, f, delta, k);
  r.eps_bar = epsilon_bar(p, f, delta, k);
  const double s = std::sqrt(r.eps_tilde) + std::sqrt(r.eps_bar);
  r.main = s * s;
  r.crude = crude_bound(p, f, delta, k);
  r.combined = std::min(r.main, r.crude);
  r.f_value = f(delta / 2, k);
  r.k0 = k0(p, f, delta, k);
  return r;
}

AdditiveNoiseConfig AdditiveNoiseConfig::same_smoothing_norm(double sigma_sq, double gamma_c, double mu,
                                                             double c_d, double x0_err_sq, double L) {
  AdditiveNoiseConfig c;
  c.sigma_sq = sigma_sq;
  c.gamma_c = gamma_c;
  c.mu = mu;
  c.c_d = c_d;
  c.x0_err_sq = x0_err_sq;
  c.L = L;
  c.u_cs = c.l_cs = 1.0;
  c.u_cM = c.l_cM = std::sqrt(1 + mu);
  // ||grad M(x)||_{c*} = ||x||_M / sqrt(1 + mu) when the two norms coincide.
  c.u_Mc_dual = 1 / std::sqrt(1 + mu);
  return c;
}

AdditiveConstants additive_constants(const AdditiveNoiseConfig& cfg, const StepSchedule& s) {
  AdditiveConstants k;
  const double a = s.alpha(), h = s.h(), xi = s.xi();
  const double mu = cfg.mu;
  k.gamma_tilde = cfg.gamma_c * std::sqrt(1 + mu * cfg.u_cs * cfg.u_cs) / std::sqrt(1 + mu * cfg.l_cs * cfg.l_cs);
  if (!(k.gamma_tilde < 1)) throw NotContractive("smoothed contraction factor is not below 1");
  const double one_m = 1 - k.gamma_tilde;
  k.D_bar = 2 * one_m;
  const double s2 = cfg.sigma_sq;
  const double uM2 = cfg.u_cM * cfg.u_cM;
  const double uMd2 = cfg.u_Mc_dual * cfg.u_Mc_dual;
  const double lcs2 = cfg.l_cs * cfg.l_cs;
  k.c1 = 16 * s2 * uMd2 * uM2 * a / one_m;
  k.c2 = uM2 / (cfg.l_cM * cfg.l_cM);
  k.c3 = 32 * std::numbers::e * cfg.c_d * s2 * cfg.L * uM2 * a * a / ((one_m * a - 1) * mu * lcs2);
  k.c4 = 16 * s2 * cfg.c_d * cfg.L * uM2 * a * a / (mu * lcs2);
  k.c5 = 16 * std::numbers::e * uM2 * cfg.c_d * s2 * cfg.L * a / (mu * lcs2 * one_m);
  k.c6 = 32 * uM2 * s2 * uMd2 * a / one_m;

  k.h_threshold = xi == 0 ? 0.0 : std::pow(2 * xi / (one_m * a), 1 / (1 - xi));
  k.threshold_met = h >= k.h_threshold;

  // d1 = sup_i c2 x0 (i+h)^xi / a * exp(-D a ((i+h)^{1-xi} - h^{1-xi}) / (2(1-xi))).
  // The log-summand has derivative xi/t - (1-gt) a t^{-xi}; once negative it
  // stays negative, so the scan stops when that holds and the summand is
  // below 1e-3 of the running max.
  if (cfg.x0_err_sq == 0.0) return k;
  const double pre = k.c2 * cfg.x0_err_sq / a;
  const double h1 = std::pow(h, 1 - xi);
  auto log_term = [&](double t) {
    return std::log(pre) + xi * std::log(t) - k.D_bar * a * (std::pow(t, 1 - xi) - h1) / (2 * (1 - xi));
  };
  double best = -INFINITY;
  const std::int64_t cap = 2'000'000'000;
  std::int64_t i = 0;
  for (; i < cap; ++i) {
    const double t = i + h;
    const double lv = log_term(t);
    if (lv > best) {
      best = lv;
      k.d1_argmax = i;
    }
    const double slope = xi / t - one_m * a * std::pow(t, -xi);
    if (slope < 0 && lv < best + std::log(1e-3)) break;
  }
  if (i == cap) throw Error("d1 scan did not certify its supremum");
  k.d1_scan_end = i;
  k.d1 = std::exp(best);
  return k;
}

double f_additive(const AdditiveNoiseConfig& cfg, const StepSchedule& s, double delta, std::int64_t k) {
  check_delta(delta);
  const auto c = additive_constants(cfg, s);
  const double a = s.alpha();
  return c.c1 * std::log(1 / delta) / a + c.d1 + (c.c5 + c.c6 * std::log(k + 1.0)) / a;
}

TailEnvelope additive_envelope(const AdditiveNoiseConfig& cfg, const StepSchedule& s) {
  const auto c = additive_constants(cfg, s);
  const double a = s.alpha();
  return {TailEnvelope::Kind::additive_contractive, [c, a](double delta, std::int64_t k) {
            check_delta(delta);
            return c.c1 * std::log(1 / delta) / a + c.d1 + (c.c5 + c.c6 * std::log(k + 1.0)) / a;
          }};
}

double f_multiplicative(const MultiplicativeConfig& cfg, const StepSchedule& s, double delta, std::int64_t k) {
  if (!(delta > 0 && delta <= 1)) throw InvalidArgument("delta must lie in (0, 1]");
  const double a0 = s.step(0);
  return std::sqrt((cfg.u0 / (a0 * a0) + 4 * cfg.beta4 * s.partial_sum(k)) / delta);
}

TailEnvelope multiplicative_envelope(const MultiplicativeConfig& cfg, const StepSchedule& s) {
  return {TailEnvelope::Kind::multiplicative,
          [cfg, s](double delta, std::int64_t k) { return f_multiplicative(cfg, s, delta, k); }};
}

bool multiplicative_h_ok(const MultiplicativeConfig& cfg, const StepSchedule& s) {
  const double h = s.h();
  return std::exp(2 * s.xi() / h - cfg.beta2 * s.alpha() / std::pow(h, s.xi())) <= 1.0;
}

double leading_td_bound(const TdConstants& c, double delta, std::int64_t k) {
  check_delta(delta);
  const double gn = std::pow(c.gamma, c.n);
  const double den = (1 - c.gamma) * (1 - gn) * c.mu_min;
  return c.R_max * c.R_max / (den * den) * (24 * std::log(2 / delta) + 3 * c.n_states) / (k + 1.0);
}

double leading_q_bound(const QConstants& c, double delta, std::int64_t k) {
  check_delta(delta);
  const double g = (1 - c.gamma) * (1 - c.gamma);
  return 12 * c.R_max * c.R_max / (g * g * c.rho_b * c.rho_b) *
         (8 * std::log(2 / delta) + c.n_states * c.n_actions) / (k + 1.0);
}

double leading_q_bound_proof_form(const QConstants& c, double delta, std::int64_t k) {
  check_delta(delta);
  const double g = (1 - c.gamma) * (1 - c.gamma);
  return 4 * (24 * std::log(2 / delta) + 3 * c.n_states * c.n_actions) * c.R_max * c.R_max /
         (g * g * c.rho_b * c.rho_b * (k + 1.0));
}

double offpolicy_bound_shape(double c, double c_high, double delta, std::int64_t k) {
  check_delta(delta);
  return c * (std::log(1 / delta) + 1) / (k + 1.0) + c_high * std::pow(k + 1.0, -1.25) / std::sqrt(delta);
}

}  // namespace salab
