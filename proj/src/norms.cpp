#include "salab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "salab/random.hpp"

namespace salab {

std::string NormSpec::id() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::euclidean:
      return "euclidean";
    case Kind::max:
      return "max";
    case Kind::weighted_p:
      os.precision(17);
      os << (unweighted() ? "p" : "weighted_p") << ":" << p;
      return os.str();
  }
  return "unknown";
}

double smoothness_constant(const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::euclidean:
      return 1.0;
    case NormSpec::Kind::weighted_p:
      return spec.p - 1.0;
    case NormSpec::Kind::max:
      break;
  }
  throw UnsupportedNorm("max-norm squared is not smooth; use a large-p weighted norm instead");
}

namespace {

double exponent_of(const NormSpec& s) { return s.kind == NormSpec::Kind::max ? INFINITY : s.p; }

double inv_pow(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// Range of w^{1/p} over coordinates.
std::pair<double, double> weight_factor(const NormSpec& s) {
  if (s.kind != NormSpec::Kind::weighted_p || s.unweighted()) return {1.0, 1.0};
  const double e = 1.0 / s.p;
  return {std::pow(s.weights.minCoeff(), e), std::pow(s.weights.maxCoeff(), e)};
}

}  // namespace

EquivalenceConstants equivalence_constants(const NormSpec& a, const NormSpec& b, Eigen::Index d) {
  const double pa = exponent_of(a);
  const double pb = exponent_of(b);
  const double gap = std::pow(static_cast<double>(d), std::abs(inv_pow(pa) - inv_pow(pb)));
  EquivalenceConstants c;
  if (pa >= pb) {
    c.upper = 1.0;
    c.lower = 1.0 / gap;
  } else {
    c.upper = gap;
    c.lower = 1.0;
  }
  const auto [wa_lo, wa_hi] = weight_factor(a);
  const auto [wb_lo, wb_hi] = weight_factor(b);
  c.upper *= wa_hi / wb_lo;
  c.lower *= wa_lo / wb_hi;
  c.tight = (wa_lo == wa_hi) && (wb_lo == wb_hi);
  return c;
}

EquivalenceConstants probe_equivalence(const NormSpec& a, const NormSpec& b, Eigen::Index d,
                                       Rng& rng, int samples) {
  EquivalenceConstants c{INFINITY, 0.0, false};
  Eigen::VectorXd x(d);
  auto ratio = [&](const Eigen::VectorXd& v) { return norm(a, v) / norm(b, v); };
  auto consider = [&](const Eigen::VectorXd& v) {
    const double r = ratio(v);
    c.lower = std::min(c.lower, r);
    c.upper = std::max(c.upper, r);
  };
  for (int s = 0; s < samples; ++s) {
    rng.fill_normal(x);
    // Sparse directions hit the extremes for p-norm pairs.
    if (s % 3 == 1) {
      const auto keep = static_cast<Eigen::Index>(rng.uniform() * d);
      for (Eigen::Index i = 0; i < d; ++i)
        if (i != keep) x[i] = 0.0;
    } else if (s % 3 == 2) {
      x = x.cwiseSign();
    }
    if (x.isZero()) continue;
    consider(x);
  }
  for (Eigen::Index i = 0; i < d; ++i) consider(Eigen::VectorXd::Unit(d, i));
  consider(Eigen::VectorXd::Ones(d));
  return c;
}

namespace {

double gain(const Eigen::MatrixXd& B, const NormSpec& spec, const Eigen::VectorXd& z) {
  return norm(spec, B * z) / norm(spec, z);
}

// Pattern search on the ratio, from a start point, down to step tol.
double descend(const Eigen::MatrixXd& B, const NormSpec& spec, Eigen::VectorXd z, double tol) {
  double best = gain(B, spec, z);
  double step = 0.5 * norm(spec, z);
  const Eigen::Index d = z.size();
  int sweeps = 0;
  while (step > tol && ++sweeps < 200000) {
    bool moved = false;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd t = z;
        t[i] += sgn * step;
        if (t.isZero()) continue;
        const double g = gain(B, spec, t);
        if (g < best) {
          best = g;
          z = t / norm(spec, t);
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace

NuEstimate estimate_nu(const Eigen::MatrixXd& A, const NormSpec& spec, int restarts,
                       std::uint64_t seed) {
  const Eigen::Index d = A.rows();
  const Eigen::MatrixXd B = A - Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
  if (!(smin > 1e-12 * std::max(1.0, smax)))
    throw SingularJacobian("J - I is numerically singular");

  NuEstimate est;
  switch (spec.kind) {
    case NormSpec::Kind::euclidean:
      est.value = smin;
      est.certified = true;
      return est;
    case NormSpec::Kind::max: {
      // min ||Bz||_inf / ||z||_inf = 1 / ||B^{-1}||_{inf -> inf}.
      const Eigen::MatrixXd inv = B.inverse();
      est.value = 1.0 / inv.cwiseAbs().rowwise().sum().maxCoeff();
      est.certified = true;
      return est;
    }
    case NormSpec::Kind::weighted_p:
      break;
  }
  Rng rng(seed, 0);
  Eigen::VectorXd z = svd.matrixV().col(d - 1);
  double best = descend(B, spec, z, est.tolerance);
  for (int r = 0; r < restarts; ++r) {
    rng.fill_normal(z);
    best = std::min(best, descend(B, spec, z / norm(spec, z), est.tolerance));
  }
  est.value = best;
  est.restarts = restarts + 1;
  return est;
}

}  // namespace salab
