#include "salab/operators.hpp"

#include <cmath>
#include <limits>

#include "salab/errors.hpp"
#include "salab/norms.hpp"

namespace salab {

LinearAdditiveOperator::LinearAdditiveOperator(Matrix A, Vector b, const Matrix& noise_cov)
    : A_(std::move(A)), b_(std::move(b)), cov_(noise_cov) {
  const Eigen::Index d = A_.rows();
  if (A_.cols() != d || b_.size() != d || cov_.rows() != d || cov_.cols() != d)
    throw InvalidArgument("linear_additive: dimension mismatch");
  const Matrix I_A = Matrix::Identity(d, d) - A_;
  Eigen::FullPivLU<Matrix> lu(I_A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularSystem("linear_additive: I - A is singular");
  x_star_ = lu.solve(b_);

  // Symmetric square root so semidefinite covariances are fine too.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov_ + cov_.transpose()));
  const Vector ev = es.eigenvalues().cwiseMax(0.0);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, ev.maxCoeff()))
    throw InvalidArgument("linear_additive: noise covariance is not positive semidefinite");
  noise_root_ = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  noiseless_ = ev.maxCoeff() == 0.0;
}

void LinearAdditiveOperator::sample(const Vector& x, Rng& rng, Vector& out) const {
  out.noalias() = A_ * x;
  out += b_;
  if (noiseless_) return;
  Vector z(dim());
  rng.fill_normal(z);
  out.noalias() += noise_root_ * z;
}

AssumptionReport LinearAdditiveOperator::assumptions() const {
  AssumptionReport r;
  r.nu = estimate_nu(A_, NormSpec::euclidean()).value;
  r.M = 1.0;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  // <w, v> ~ N(0, v^T C v) <= lambda_max(C) ||v||^2.
  r.sigma_bar_sq = Eigen::SelfAdjointEigenSolver<Matrix>(cov_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  r.sigma_hat_sq = 0.0;
  r.gamma_c = Eigen::JacobiSVD<Matrix>(A_).singularValues()[0];
  return r;
}

PairGaussianOperator::PairGaussianOperator(Eigen::Index d, double sigma_bar) : d_(d), sigma_bar_(sigma_bar) {
  if (d <= 0 || d % 2 != 0) throw OddDimension("pair_gaussian needs an even dimension");
  if (!(sigma_bar > 0)) throw InvalidArgument("pair_gaussian: sigma_bar must be positive");
}

void PairGaussianOperator::sample(const Vector&, Rng& rng, Vector& out) const {
  const double s = sigma_bar_ / std::sqrt(static_cast<double>(d_));
  const double z1 = s * rng.normal();
  const double z2 = s * rng.normal();
  // Index 0 is coordinate 1 (odd).
  for (Eigen::Index j = 0; j < d_; ++j) out[j] = (j % 2 == 0) ? z1 : z2;
}

AssumptionReport PairGaussianOperator::assumptions() const {
  AssumptionReport r;
  r.nu = 1.0;
  r.M = 1.0;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  r.sigma_bar_sq = sigma_bar_ * sigma_bar_;
  r.sigma_hat_sq = 0.0;
  r.gamma_c = 0.0;
  return r;
}

AssumptionReport MultiplicativeGaussianOperator::assumptions() const {
  AssumptionReport r;
  r.nu = 1.0;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  r.sigma_bar_sq = 0.0;  // F(x*, w) = x* exactly
  r.sigma_hat_sq = 1.0;  // J_w = w ~ N(0, 1)
  return r;
}

TwoPointMultiplicativeOperator::TwoPointMultiplicativeOperator(double a, int N)
    : a_(a), N_(N), p_high_(1.0 / (N + 1.0)) {
  if (!(a > 0 && a < 1)) throw InvalidArgument("two_point: a must lie in (0, 1)");
  if (N < 1) throw InvalidArgument("two_point: N must be at least 1");
}

AssumptionReport TwoPointMultiplicativeOperator::assumptions() const {
  AssumptionReport r;
  r.nu = 1.0 - a_;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  r.sigma_bar_sq = 0.0;
  r.gamma_c = a_;
  return r;
}

std::shared_ptr<LinearAdditiveOperator> make_linear_additive(Matrix A, Vector b, const Matrix& noise_cov) {
  return std::make_shared<LinearAdditiveOperator>(std::move(A), std::move(b), noise_cov);
}

std::shared_ptr<PairGaussianOperator> make_pair_gaussian_example(Eigen::Index d, double sigma_bar) {
  return std::make_shared<PairGaussianOperator>(d, sigma_bar);
}

std::shared_ptr<MultiplicativeGaussianOperator> make_multiplicative_gaussian() {
  return std::make_shared<MultiplicativeGaussianOperator>();
}

std::shared_ptr<TwoPointMultiplicativeOperator> make_two_point_multiplicative(double a, int N) {
  return std::make_shared<TwoPointMultiplicativeOperator>(a, N);
}

std::shared_ptr<LinearAdditiveOperator> make_random_contractive(Eigen::Index d, double gamma_c,
                                                                double noise_scale,
                                                                std::uint64_t seed) {
  if (!(gamma_c > 0 && gamma_c < 1)) throw InvalidArgument("random_contractive: gamma_c must lie in (0, 1)");
  Rng rng(seed, 0);
  Matrix A(d, d);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  A *= gamma_c / Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
  Vector b(d);
  rng.fill_normal(b);
  const Matrix cov = noise_scale * noise_scale * Matrix::Identity(d, d);
  return make_linear_additive(std::move(A), std::move(b), cov);
}

}  // namespace salab
