#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "salab/errors.hpp"

namespace salab {

class Rng;

struct NormSpec {
  enum class Kind { euclidean, max, weighted_p };

  Kind kind = Kind::euclidean;
  double p = 2.0;
  // Empty means unit weights.
  Eigen::VectorXd weights;

  static NormSpec euclidean() { return {}; }
  static NormSpec max_norm() {
    NormSpec s;
    s.kind = Kind::max;
    s.p = std::numeric_limits<double>::infinity();
    return s;
  }
  static NormSpec weighted_p(double p, Eigen::VectorXd w = {}) {
    if (!(p >= 2)) throw InvalidArgument("weighted p-norm needs p >= 2");
    if (w.size() > 0 && !(w.array() > 0).all()) throw InvalidArgument("norm weights must be positive");
    NormSpec s;
    s.kind = Kind::weighted_p;
    s.p = p;
    s.weights = std::move(w);
    return s;
  }

  double weight(Eigen::Index i) const { return weights.size() ? weights[i] : 1.0; }
  bool unweighted() const { return weights.size() == 0; }
  std::string id() const;
};

// Dual exponent and dual weights w# = w^{-1/(p-1)}.
inline double dual_exponent(double p) { return p / (p - 1.0); }

template <typename Derived>
double norm(const NormSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  switch (spec.kind) {
    case NormSpec::Kind::euclidean:
      return x.norm();
    case NormSpec::Kind::max:
      return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    case NormSpec::Kind::weighted_p: {
      // Scaled by the largest entry so large p neither overflows nor underflows.
      const double m = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
      if (m == 0.0 || !std::isfinite(m)) return m;
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        s += spec.weight(i) * std::pow(std::abs(x[i]) / m, spec.p);
      return m * std::pow(s, 1.0 / spec.p);
    }
  }
  return 0.0;
}

template <typename Derived>
double squared_norm(const NormSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  const double n = norm(spec, x);
  return n * n;
}

template <typename Derived>
double dual_norm(const NormSpec& spec, const Eigen::MatrixBase<Derived>& u) {
  switch (spec.kind) {
    case NormSpec::Kind::euclidean:
      return u.norm();
    case NormSpec::Kind::max:
      return u.cwiseAbs().sum();
    case NormSpec::Kind::weighted_p: {
      const double q = dual_exponent(spec.p);
      const double m = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
      if (m == 0.0 || !std::isfinite(m)) return m;
      double s = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double wd = std::pow(spec.weight(i), -1.0 / (spec.p - 1.0));
        s += wd * std::pow(std::abs(u[i]) / m, q);
      }
      return m * std::pow(s, 1.0 / q);
    }
  }
  return 0.0;
}

// Gradient of x -> ||x||^2 / 2, i.e. sign(x_i) w_i |x_i|^{p-1} ||x||^{2-p}.
template <typename Derived>
Eigen::VectorXd half_sq_norm_gradient(const NormSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  switch (spec.kind) {
    case NormSpec::Kind::euclidean:
      g = x;
      break;
    case NormSpec::Kind::max:
      throw UnsupportedNorm("max-norm squared is not differentiable");
    case NormSpec::Kind::weighted_p: {
      const double n = norm(spec, x);
      if (n == 0.0) break;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = std::abs(x[i]) / n;
        const double s = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
        g[i] = s * spec.weight(i) * std::pow(r, spec.p - 1.0) * n;
      }
      break;
    }
  }
  return g;
}

template <typename Derived>
Eigen::VectorXd sq_norm_gradient(const NormSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  return 2.0 * half_sq_norm_gradient(spec, x);
}

// Ratio ||grad f(x) - grad f(y)||_* / ||x - y|| for f = ||.||^2 / 2.
template <typename DerivedX, typename DerivedY>
double gradient_lipschitz_ratio(const NormSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                                const Eigen::MatrixBase<DerivedY>& y) {
  const double den = norm(spec, x - y);
  if (den == 0.0) return 0.0;
  return dual_norm(spec, half_sq_norm_gradient(spec, x) - half_sq_norm_gradient(spec, y)) / den;
}

// ||a+b||^2 - ||a||^2 - <grad ||a||^2, b> - (M/2)||b||^2; non-positive when the
// M-smoothness inequality holds at (a, b).
template <typename DerivedA, typename DerivedB>
double smoothness_gap(const NormSpec& spec, double M, const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b) {
  return squared_norm(spec, a + b) - squared_norm(spec, a) - sq_norm_gradient(spec, a).dot(b) -
         0.5 * M * squared_norm(spec, b);
}

// Smoothness constant of ||.||^2 used as M by the bound calculator: p - 1.
double smoothness_constant(const NormSpec& spec);

struct EquivalenceConstants {
  double lower = 1.0;  // l_ab with l_ab ||x||_b <= ||x||_a
  double upper = 1.0;  // u_ab with ||x||_a <= u_ab ||x||_b
  bool tight = true;   // false when weights make the closed form conservative
};

// Closed-form constants; exact for unweighted pairs, valid but possibly loose
// once weights enter (scaled by extreme weights).
EquivalenceConstants equivalence_constants(const NormSpec& a, const NormSpec& b, Eigen::Index d);

// Extremes of ||x||_a / ||x||_b over random directions plus local refinement;
// an inner approximation of [lower, upper].
EquivalenceConstants probe_equivalence(const NormSpec& a, const NormSpec& b, Eigen::Index d,
                                       Rng& rng, int samples = 4000);

struct NuEstimate {
  double value = 0.0;
  int restarts = 0;
  double tolerance = 1e-9;
  bool certified = false;  // exact for euclidean and max norms
};

// Smallest gain of (A - I) under the norm.
NuEstimate estimate_nu(const Eigen::MatrixXd& A, const NormSpec& spec, int restarts = 32,
                       std::uint64_t seed = 7);

}  // namespace salab
