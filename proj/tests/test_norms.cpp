#include <doctest.h>

#include <cmath>

#include "salab/errors.hpp"
#include "salab/norms.hpp"
#include "salab/random.hpp"

using namespace salab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(v.size());
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

Eigen::VectorXd random_weights(Rng& rng, int d) {
  Eigen::VectorXd w(d);
  for (int i = 0; i < d; ++i) w[i] = 0.2 + 3 * rng.uniform();
  return w;
}

}  // namespace

TEST_SUITE("norms") {
  TEST_CASE("norm examples") {
    CHECK(norm(NormSpec::weighted_p(2, vec({1, 1})), vec({3, 4})) == doctest::Approx(5).epsilon(1e-15));
    CHECK(norm(NormSpec::max_norm(), vec({-2, 1.5})) == 2.0);
    CHECK(norm(NormSpec::weighted_p(2, vec({4, 1})), vec({1, 2})) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
    CHECK(norm(NormSpec::euclidean(), vec({3, 4})) == 5.0);
  }

  TEST_CASE("large p does not overflow") {
    const auto s = NormSpec::weighted_p(400);
    const auto x = vec({1e3, 2e3, -5e2});
    const double n = norm(s, x);
    CHECK(std::isfinite(n));
    CHECK(n == doctest::Approx(2e3).epsilon(1e-2));
  }

  TEST_CASE("dual norm examples") {
    CHECK(dual_norm(NormSpec::euclidean(), vec({3, 4})) == 5.0);
    CHECK(dual_norm(NormSpec::max_norm(), vec({1, -1, 2})) == 4.0);
    CHECK(dual_norm(NormSpec::weighted_p(2, vec({4, 1})), vec({2, 1})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  }

  TEST_CASE("Hoelder inequality on random pairs") {
    Rng rng(1, 0);
    for (const auto& s : {NormSpec::euclidean(), NormSpec::max_norm(), NormSpec::weighted_p(3, random_weights(rng, 6)),
                          NormSpec::weighted_p(8, random_weights(rng, 6))}) {
      for (int i = 0; i < 10000; ++i) {
        Eigen::VectorXd x(6), u(6);
        rng.fill_normal(x);
        rng.fill_normal(u);
        CHECK(x.dot(u) <= norm(s, x) * dual_norm(s, u) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("norm is homogeneous and satisfies the triangle inequality") {
    Rng rng(2, 0);
    const auto s = NormSpec::weighted_p(5, random_weights(rng, 4));
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd x(4), y(4);
      rng.fill_normal(x);
      rng.fill_normal(y);
      CHECK(norm(s, -2.5 * x) == doctest::Approx(2.5 * norm(s, x)).epsilon(1e-13));
      CHECK(norm(s, x + y) <= (norm(s, x) + norm(s, y)) * (1 + 1e-13));
    }
  }

  TEST_CASE("equivalence constants") {
    auto e = equivalence_constants(NormSpec::weighted_p(2), NormSpec::euclidean(), 7);
    CHECK(e.lower == doctest::Approx(1.0));
    CHECK(e.upper == doctest::Approx(1.0));
    e = equivalence_constants(NormSpec::weighted_p(4), NormSpec::euclidean(), 16);
    CHECK(e.upper == doctest::Approx(1.0));
    CHECK(e.lower == doctest::Approx(0.5).epsilon(1e-14));
    e = equivalence_constants(NormSpec::max_norm(), NormSpec::euclidean(), 9);
    CHECK(e.upper == doctest::Approx(1.0));
    CHECK(e.lower == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }

  TEST_CASE("equivalence constants sandwich a sphere search") {
    Rng rng(3, 0);
    const auto a = NormSpec::weighted_p(4);
    const auto probe = probe_equivalence(a, NormSpec::euclidean(), 16, rng);
    const auto e = equivalence_constants(a, NormSpec::euclidean(), 16);
    CHECK(probe.lower >= e.lower - 1e-12);
    CHECK(probe.upper <= e.upper + 1e-12);
    CHECK(probe.lower == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(probe.upper == doctest::Approx(1.0).epsilon(1e-3));

    const auto w = NormSpec::weighted_p(3, random_weights(rng, 5));
    const auto ew = equivalence_constants(w, NormSpec::euclidean(), 5);
    for (int i = 0; i < 2000; ++i) {
      Eigen::VectorXd x(5);
      rng.fill_normal(x);
      const double r = norm(w, x) / x.norm();
      CHECK(r >= ew.lower * (1 - 1e-12));
      CHECK(r <= ew.upper * (1 + 1e-12));
    }
  }

  TEST_CASE("smoothness constants") {
    CHECK(smoothness_constant(NormSpec::euclidean()) == 1.0);
    CHECK(smoothness_constant(NormSpec::weighted_p(8)) == 7.0);
    CHECK(smoothness_constant(NormSpec::weighted_p(3, vec({1, 2, 5}))) == 2.0);
    CHECK_THROWS_AS(smoothness_constant(NormSpec::max_norm()), UnsupportedNorm);
  }

  TEST_CASE("gradient Lipschitz ratio for p = 3 with weights (1, 2, 5)") {
    Rng rng(4, 0);
    const auto s = NormSpec::weighted_p(3, vec({1, 2, 5}));
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      Eigen::VectorXd x(3), y(3);
      rng.fill_normal(x);
      rng.fill_normal(y);
      worst = std::max(worst, gradient_lipschitz_ratio(s, x, y));
    }
    CHECK(worst <= 2.0 * (1 + 1e-8));
    CHECK(worst > 1.0);
  }

  TEST_CASE("closed-form gradient matches finite differences") {
    Rng rng(5, 0);
    const auto s = NormSpec::weighted_p(4, random_weights(rng, 5));
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd x(5);
      rng.fill_normal(x);
      const Eigen::VectorXd g = sq_norm_gradient(s, x);
      for (int i = 0; i < 5; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (squared_norm(s, xp) - squared_norm(s, xm)) / (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
    CHECK_THROWS_AS(half_sq_norm_gradient(NormSpec::max_norm(), vec({1, 2})), UnsupportedNorm);
  }

  TEST_CASE("invalid norm specs") {
    CHECK_THROWS_AS(NormSpec::weighted_p(1.5), InvalidArgument);
    CHECK_THROWS_AS(NormSpec::weighted_p(2, vec({1, 0})), InvalidArgument);
  }

  TEST_CASE("nu examples") {
    CHECK(estimate_nu(Eigen::MatrixXd::Zero(3, 3), NormSpec::euclidean()).value == doctest::Approx(1.0));
    CHECK(estimate_nu(0.3 * Eigen::MatrixXd::Identity(3, 3), NormSpec::euclidean()).value ==
          doctest::Approx(0.7).epsilon(1e-14));
    CHECK_THROWS_AS(estimate_nu(Eigen::MatrixXd::Identity(2, 2), NormSpec::euclidean()), SingularJacobian);
  }

  TEST_CASE("nu of a contraction is at least one minus its norm") {
    Rng rng(6, 0);
    for (int t = 0; t < 100; ++t) {
      Eigen::MatrixXd A(5, 5);
      rng.fill_normal(A);
      A *= 0.9 / Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
      const auto nu = estimate_nu(A, NormSpec::euclidean());
      CHECK(nu.certified);
      CHECK(nu.value >= 0.1 - 1e-15);
    }
  }

  TEST_CASE("max-norm nu is exact and p-norm nu is an upper estimate") {
    Rng rng(7, 0);
    Eigen::MatrixXd A(3, 3);
    rng.fill_normal(A);
    A *= 0.5 / Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()[0];
    const auto mx = estimate_nu(A, NormSpec::max_norm());
    CHECK(mx.certified);
    const Eigen::MatrixXd B = A - Eigen::MatrixXd::Identity(3, 3);
    for (int i = 0; i < 5000; ++i) {
      Eigen::VectorXd z(3);
      rng.fill_normal(z);
      CHECK((B * z).cwiseAbs().maxCoeff() / z.cwiseAbs().maxCoeff() >= mx.value * (1 - 1e-12));
    }
    const auto p4 = estimate_nu(A, NormSpec::weighted_p(4));
    CHECK_FALSE(p4.certified);
    CHECK(p4.restarts > 0);
    const auto s = NormSpec::weighted_p(4);
    double best = 1e300;
    for (int i = 0; i < 20000; ++i) {
      Eigen::VectorXd z(3);
      rng.fill_normal(z);
      best = std::min(best, norm(s, B * z) / norm(s, z));
    }
    CHECK(p4.value <= best + 1e-9);
  }
}
