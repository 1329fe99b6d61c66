#include <doctest.h>

#include <cmath>
#include <limits>

#include "golden.hpp"
#include "salab/bounds.hpp"
#include "salab/errors.hpp"

using namespace salab;

namespace {

const double inf = std::numeric_limits<double>::infinity();

BoundParams base_params() {
  BoundParams p;
  p.schedule = StepSchedule(1, 2, 0.5);
  p.nu = 1;
  p.M = 1;
  p.N = 1;
  p.sigma_bar_sq = 1;
  p.sigma_hat_sq = 1;
  p.u_c2 = 1;
  p.d = 2;
  p.R = inf;
  return p;
}

AdditiveNoiseConfig unit_additive() {
  AdditiveNoiseConfig c;
  c.sigma_sq = 1;
  c.gamma_c = 0.5;
  c.mu = 0.1;
  c.c_d = 4;
  c.x0_err_sq = 1;
  c.L = 1;
  return c;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("k0 examples") {
    auto p = base_params();
    const auto f4 = TailEnvelope::constant(4);
    CHECK(k0(p, f4, 0.1, 100) == 0);
    p.R = 1;
    CHECK(k0(p, f4, 0.1, 100) == 14);
    CHECK(k0(p, TailEnvelope::constant(1e6), 0.1, 100) == 101);
    // Smallest i with alpha_i f <= R^2.
    std::int64_t first = 0;
    while (p.schedule.step(first) * 4 > 1) ++first;
    CHECK(first == 14);
  }

  TEST_CASE("k0 with a constant schedule") {
    auto p = base_params();
    p.schedule = StepSchedule(1, 2, 0);
    p.R = 2;
    CHECK(k0(p, TailEnvelope::constant(3), 0.1, 50) == 0);
    CHECK(k0(p, TailEnvelope::constant(5), 0.1, 50) == 51);
  }

  TEST_CASE("g factor") {
    auto p = base_params();
    p.sigma_hat_sq = 0;
    CHECK(g_factor(p, TailEnvelope::constant(7), 0.1, 10) == 24.0);
    p.u_c2 = 1.5;
    CHECK(g_factor(p, TailEnvelope::constant(7), 0.1, 10) == doctest::Approx(24 * std::pow(1.5, 4)));
    p = base_params();
    p.sigma_hat_sq = 2;
    const double want = 24 * std::max(1.0, (1 * 2 * 2 * std::sqrt(2.0) * 100) / (0.5 * 2));
    CHECK(g_factor(p, TailEnvelope::constant(100), 0.1, 3) == doctest::Approx(want).epsilon(1e-14));
  }

  TEST_CASE("zero curvature and noise-free Jacobian remove two terms") {
    auto p = base_params();
    p.N = 0;
    p.sigma_hat_sq = 0;
    const auto t = epsilon_tilde_terms(p, TailEnvelope::constant(10), 0.1, 99);
    CHECK(t[3] == 0.0);
    CHECK(t[4] == 0.0);
  }

  TEST_CASE("leading terms") {
    auto p = base_params();
    p.sigma_bar_sq = 2;
    const auto l = leading_terms(p, 0.05, 999);
    CHECK(l.log_two == doctest::Approx(24 * 2 * std::log(40.0) / 1000).epsilon(1e-14));
    CHECK(l.with_dimension == doctest::Approx((24 * 2 * std::log(40.0) + 3 * 2 * 2) / 1000).epsilon(1e-14));
    CHECK(l.small_delta == doctest::Approx(24 * 2 * std::log(20.0) / 1000).epsilon(1e-14));
  }

  TEST_CASE("main, crude and combined identities") {
    auto p = base_params();
    const auto f = TailEnvelope::constant(10);
    CHECK(epsilon_bar(p, f, 0.1, 99) == 0.0);
    CHECK(main_bound(p, f, 0.1, 99) == epsilon_tilde(p, f, 0.1, 99));
    for (std::int64_t k : {1, 10, 100, 10000})
      for (double d : {0.2, 0.05, 0.001}) {
        const double c = combined_bound(p, f, d, k);
        CHECK(c == std::min(main_bound(p, f, d, k), crude_bound(p, f, d, k)));
      }
    p.schedule = StepSchedule(1, 2, 0);
    CHECK(crude_bound(p, TailEnvelope::constant(1), 0.1, 0) == doctest::Approx(4.0).epsilon(1e-15));
  }

  TEST_CASE("crude bound decays as k^-xi") {
    auto p = base_params();
    const auto f = TailEnvelope::constant(3);
    const double r = crude_bound(p, f, 0.1, 100000 - 1) / crude_bound(p, f, 0.1, 1000 - 1);
    CHECK(r == doctest::Approx(std::pow(10.0, -2 * 0.5)).epsilon(1e-12));
  }

  TEST_CASE("epsilon_bar at k0 = k + 1 has the crude numerator shape") {
    auto p = base_params();
    p.R = 1e-3;
    const auto f = TailEnvelope::constant(10);
    const std::int64_t k = 40;
    CHECK(k0(p, f, 0.1, k) == k + 1);
    const double e = 0.75;
    const double want = std::pow(std::pow(k + 2.0, e) - 1.0, 2) * 10 / (e * e * 41.0 * 41.0);
    CHECK(epsilon_bar(p, f, 0.1, k) == doctest::Approx(want).epsilon(1e-14));
  }

  TEST_CASE("main bound crosses below the crude bound") {
    auto p = base_params();
    p.N = 0;
    p.sigma_hat_sq = 0;
    const auto f = TailEnvelope::constant(10);
    bool main_wins_late = false, crude_wins_early = false;
    for (std::int64_t k = 1; k <= 100000000; k *= 10) {
      const double m = main_bound(p, f, 0.1, k), c = crude_bound(p, f, 0.1, k);
      if (k <= 10 && c < m) crude_wins_early = true;
      if (k >= 10000000 && m < c) main_wins_late = true;
    }
    CHECK(crude_wins_early);
    CHECK(main_wins_late);
  }

  TEST_CASE("every bound is non-increasing in delta") {
    auto p = base_params();
    p.R = 3;
    const auto env = additive_envelope(unit_additive(), StepSchedule(6, 16, 0.5));
    p.schedule = StepSchedule(6, 16, 0.5);
    for (std::int64_t k : {10, 1000, 100000}) {
      double prev_main = inf, prev_crude = inf, prev_comb = inf;
      for (double d : {0.01, 0.05, 0.1, 0.3, 0.6, 0.9}) {
        const double m = main_bound(p, env, d, k), c = crude_bound(p, env, d, k), b = combined_bound(p, env, d, k);
        CHECK(m <= prev_main);
        CHECK(c <= prev_crude);
        CHECK(b <= prev_comb);
        prev_main = m;
        prev_crude = c;
        prev_comb = b;
      }
    }
  }

  TEST_CASE("rate of the higher-order part of eps_tilde") {
    // Constant f; higher-order part = terms 3 to 5.
    auto slope = [](BoundParams p) {
      const auto f = TailEnvelope::constant(10);
      std::vector<double> lx, ly;
      for (double k = 1e8; k <= 1e12 * 1.01; k *= 10) {
        const auto t = epsilon_tilde_terms(p, f, 0.1, static_cast<std::int64_t>(k));
        lx.push_back(std::log(k));
        ly.push_back(std::log(t[2] + t[3] + t[4]));
      }
      return (ly.back() - ly.front()) / (lx.back() - lx.front());
    };
    for (double xi : {0.3}) {
      auto p = base_params();
      p.schedule = StepSchedule(1, 2, xi);
      p.N = 0;
      p.sigma_hat_sq = 0;
      CHECK(slope(p) == doctest::Approx(-(2 - xi)).epsilon(0.05 / (2 - xi)));
      p.sigma_hat_sq = 1;
      CHECK(std::abs(slope(p) + std::min(1 + xi, 2 - xi)) <= 0.05);
      p.N = 1;
      CHECK(std::abs(slope(p) + std::min(2 * xi, 2 - xi)) <= 0.05);
    }
  }

  TEST_CASE("golden values") {
    const auto g = read_golden("bounds.txt");
    auto p = base_params();
    const auto f10 = TailEnvelope::constant(10);
    CHECK(rel_err(g_factor(p, f10, 0.1, 99), g.at("A.g")) <= 1e-12);
    CHECK(rel_err(epsilon_tilde(p, f10, 0.1, 99), g.at("A.eps_tilde")) <= 1e-12);
    CHECK(rel_err(crude_bound(p, f10, 0.1, 99), g.at("A.crude")) <= 1e-12);
    CHECK(rel_err(combined_bound(p, f10, 0.1, 99), g.at("A.combined")) <= 1e-12);
    p.R = 2;
    CHECK(k0(p, f10, 0.1, 99) == static_cast<std::int64_t>(g.at("B.k0")));
    CHECK(rel_err(epsilon_bar(p, f10, 0.1, 99), g.at("B.eps_bar")) <= 1e-12);
    CHECK(rel_err(main_bound(p, f10, 0.1, 99), g.at("B.main")) <= 1e-12);
    p.R = inf;
    p.u_c2 = 1.5;
    CHECK(rel_err(epsilon_tilde(p, f10, 0.1, 99), g.at("C.eps_tilde_u4")) <= 1e-12);
    p.u_exponent = UExponent::two;
    CHECK(rel_err(epsilon_tilde(p, f10, 0.1, 99), g.at("C.eps_tilde_u2")) <= 1e-12);

    const StepSchedule s6(6, 16, 0.5);
    CHECK(rel_err(f_additive(unit_additive(), s6, 0.1, 1000), g.at("additive.f")) <= 1e-12);
    CHECK(rel_err(additive_constants(unit_additive(), s6).d1, g.at("additive.d1")) <= 1e-12);
    const auto same = AdditiveNoiseConfig::same_smoothing_norm(1, 0.5, 0.1, 4, 1, 1);
    CHECK(rel_err(f_additive(same, s6, 0.1, 1000), g.at("additive_same_norm.f")) <= 1e-12);
  }

  TEST_CASE("additive envelope properties") {
    const StepSchedule s(6, 16, 0.5);
    auto c = unit_additive();
    CHECK(f_additive(c, s, 0.05, 1000) >= f_additive(c, s, 0.1, 1000));
    CHECK(f_additive(c, s, 0.1, 2000) >= f_additive(c, s, 0.1, 1000));
    c.x0_err_sq = 0;
    CHECK(additive_constants(c, s).d1 == 0.0);
    const auto k = additive_constants(unit_additive(), s);
    CHECK(k.threshold_met);
    CHECK(k.gamma_tilde == 0.5);
    CHECK(k.D_bar == 1.0);
  }

  TEST_CASE("additive d1 scan certifies an interior maximum") {
    // Below the threshold on h the summand rises before it decays.
    const StepSchedule s(0.5, 2, 0.5);
    const auto k = additive_constants(unit_additive(), s);
    CHECK_FALSE(k.threshold_met);
    CHECK(k.d1_argmax > 0);
    CHECK(k.d1_argmax < k.d1_scan_end);
    // Dense check beyond the scan end.
    const double pre = k.c2 / 0.5;
    double dense = 0;
    for (std::int64_t i = 0; i < 20 * (k.d1_scan_end + 10); ++i) {
      const double t = i + 2.0;
      dense = std::max(dense, pre * std::sqrt(t) * std::exp(-k.D_bar * 0.5 * (std::sqrt(t) - std::sqrt(2.0)) / 1.0));
    }
    CHECK(rel_err(k.d1, dense) <= 1e-12);
  }

  TEST_CASE("Moreau constants when the smoothing norm is the contraction norm") {
    const auto c = AdditiveNoiseConfig::same_smoothing_norm(1, 0.5, 0.3, 4, 1, 1);
    CHECK(c.u_cM == doctest::Approx(std::sqrt(1.3)));
    CHECK(c.l_cM == doctest::Approx(std::sqrt(1.3)));
    CHECK(additive_constants(c, StepSchedule(6, 16, 0.5)).gamma_tilde == 0.5);
  }

  TEST_CASE("not contractive after smoothing") {
    auto c = unit_additive();
    c.gamma_c = 0.9;
    c.u_cs = 2;
    CHECK_THROWS_AS(additive_constants(c, StepSchedule(6, 16, 0.5)), NotContractive);
  }

  TEST_CASE("multiplicative envelope") {
    const auto g = read_golden("bounds.txt");
    MultiplicativeConfig c;
    c.u0 = 1;
    c.beta4 = 1;
    const StepSchedule s(1, 2, 0.5);
    CHECK(rel_err(f_multiplicative(c, s, 0.25, 2), g.at("mult.f_small")) <= 1e-12);
    const double a0 = 1 / std::sqrt(2.0);
    const double want = std::sqrt((1 / (a0 * a0) + 4 * (1 / std::sqrt(2.0) + 1 / std::sqrt(3.0) + 0.5)) / 0.25);
    CHECK(rel_err(f_multiplicative(c, s, 0.25, 2), want) <= 1e-14);
    CHECK(f_multiplicative(c, s, 0.25 / 4, 30) / f_multiplicative(c, s, 0.25, 30) == doctest::Approx(2.0));
    MultiplicativeConfig z;
    z.u0 = 0;
    z.beta4 = 0;
    CHECK(f_multiplicative(z, s, 1.0, 10) == 0.0);
    MultiplicativeConfig l;
    l.u0 = 3;
    l.beta4 = 0.5;
    CHECK(rel_err(f_multiplicative(l, StepSchedule(2, 4, 0.75), 0.05, 50), g.at("mult.f_large")) <= 1e-12);
  }

  TEST_CASE("RL leading terms") {
    TdConstants td{1, 0.5, 1, 0.5, 2};
    CHECK(leading_td_bound(td, 2 / std::exp(2.0), 99) == doctest::Approx(34.56).epsilon(1e-12));
    TdConstants td2 = td;
    td2.R_max = 2;
    CHECK(leading_td_bound(td2, 0.1, 99) == doctest::Approx(4 * leading_td_bound(td, 0.1, 99)));
    TdConstants tinf = td;
    tinf.n = inf;
    TdConstants tbig = td;
    tbig.n = 200;
    CHECK(leading_td_bound(tinf, 0.1, 99) == doctest::Approx(leading_td_bound(tbig, 0.1, 99)).epsilon(1e-15));

    QConstants q{1, 0.5, 0.25, 2, 2};
    CHECK(leading_q_bound(q, 2 / std::exp(1.0), 95) == doctest::Approx(384).epsilon(1e-12));
    CHECK(leading_q_bound(q, 0.07, 500) == doctest::Approx(leading_q_bound_proof_form(q, 0.07, 500)).epsilon(1e-14));
    QConstants qh = q;
    qh.rho_b = 0.125;
    CHECK(leading_q_bound(qh, 0.1, 10) == doctest::Approx(4 * leading_q_bound(q, 0.1, 10)));
  }

  TEST_CASE("off-policy bound shape") {
    CHECK(offpolicy_bound_shape(2, 0, 1 / std::exp(1.0), 9) == doctest::Approx(0.4));
    CHECK(offpolicy_bound_shape(0, 1, 0.25, 15) == doctest::Approx(2 * std::pow(16.0, -1.25)));
  }

  TEST_CASE("tail envelopes are monotone on a grid") {
    const StepSchedule s(6, 16, 0.5);
    const auto a = additive_envelope(unit_additive(), s);
    MultiplicativeConfig mc;
    mc.u0 = 2;
    const auto m = multiplicative_envelope(mc, s);
    for (const auto* f : {&a, &m})
      for (std::int64_t k : {1, 10, 1000})
        for (double d : {0.01, 0.1, 0.5}) {
          CHECK((*f)(d, k) >= (*f)(d * 1.5, k));
          CHECK((*f)(d, k) <= (*f)(d, k * 2));
        }
  }
}
