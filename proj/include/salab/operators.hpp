#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "salab/random.hpp"

namespace salab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Constants an operator knows about itself. Empty entries need user input.
struct AssumptionReport {
  std::optional<double> nu;
  std::optional<double> M;
  std::optional<double> N;
  std::optional<double> R;  // +inf for globally smooth maps
  std::optional<double> sigma_bar_sq;
  std::optional<double> sigma_hat_sq;
  std::optional<double> gamma_c;
  std::string norm_id = "euclidean";
};

// A sampled map F(x, w) with mean F_bar(x) = E F(x, w).
class StochasticOperator {
 public:
  virtual ~StochasticOperator() = default;

  virtual Eigen::Index dim() const = 0;
  // out <- F(x, w) for a fresh draw w from rng.
  virtual void sample(const Vector& x, Rng& rng, Vector& out) const = 0;
  virtual Vector mean(const Vector& x) const = 0;
  virtual Vector fixed_point() const = 0;
  // One realization of J_{F_w}(x*, w), if the operator exposes it.
  virtual std::optional<Matrix> jacobian_at_fixed_point(Rng&) const { return std::nullopt; }
  virtual AssumptionReport assumptions() const { return {}; }
  virtual std::string name() const = 0;

  Vector sample(const Vector& x, Rng& rng) const {
    Vector out(dim());
    sample(x, rng, out);
    return out;
  }
};

using OperatorPtr = std::shared_ptr<const StochasticOperator>;

// F(x, w) = A x + b + w, w ~ N(0, noise_cov).
class LinearAdditiveOperator : public StochasticOperator {
 public:
  LinearAdditiveOperator(Matrix A, Vector b, const Matrix& noise_cov);

  Eigen::Index dim() const override { return A_.rows(); }
  void sample(const Vector& x, Rng& rng, Vector& out) const override;
  Vector mean(const Vector& x) const override { return A_ * x + b_; }
  Vector fixed_point() const override { return x_star_; }
  std::optional<Matrix> jacobian_at_fixed_point(Rng&) const override { return A_; }
  AssumptionReport assumptions() const override;
  std::string name() const override { return "linear_additive"; }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const Matrix& noise_cov() const { return cov_; }
  using StochasticOperator::sample;

 private:
  Matrix A_;
  Vector b_;
  Matrix cov_;
  Matrix noise_root_;  // noise_root * noise_root^T = cov
  Vector x_star_;
  bool noiseless_ = false;
};

// F(x, w) = w with w_j = z_1 on odd j, z_2 on even j (1-based), z ~ N(0, sigma^2/d I).
class PairGaussianOperator : public StochasticOperator {
 public:
  PairGaussianOperator(Eigen::Index d, double sigma_bar);

  Eigen::Index dim() const override { return d_; }
  void sample(const Vector& x, Rng& rng, Vector& out) const override;
  Vector mean(const Vector& x) const override { return Vector::Zero(x.size()); }
  Vector fixed_point() const override { return Vector::Zero(d_); }
  std::optional<Matrix> jacobian_at_fixed_point(Rng&) const override { return Matrix::Zero(d_, d_); }
  AssumptionReport assumptions() const override;
  std::string name() const override { return "pair_gaussian"; }
  double sigma_bar() const { return sigma_bar_; }
  using StochasticOperator::sample;

 private:
  Eigen::Index d_;
  double sigma_bar_;
};

// Scalar F(x, w) = w x with a caller-chosen law for w.
class MultiplicativeScalarOperator : public StochasticOperator {
 public:
  Eigen::Index dim() const override { return 1; }
  void sample(const Vector& x, Rng& rng, Vector& out) const override { out[0] = draw(rng) * x[0]; }
  Vector mean(const Vector& x) const override { return mean_factor() * x; }
  Vector fixed_point() const override { return Vector::Zero(1); }
  std::optional<Matrix> jacobian_at_fixed_point(Rng& rng) const override {
    return Matrix::Constant(1, 1, draw(rng));
  }
  using StochasticOperator::sample;

  virtual double draw(Rng& rng) const = 0;
  virtual double mean_factor() const = 0;
};

// w ~ N(0, 1).
class MultiplicativeGaussianOperator : public MultiplicativeScalarOperator {
 public:
  double draw(Rng& rng) const override { return rng.normal(); }
  double mean_factor() const override { return 0.0; }
  std::string name() const override { return "multiplicative_gaussian"; }
  AssumptionReport assumptions() const override;
};

// P(w = a + N) = 1/(N+1), P(w = a - 1) = N/(N+1); E w = a.
class TwoPointMultiplicativeOperator : public MultiplicativeScalarOperator {
 public:
  TwoPointMultiplicativeOperator(double a, int N);
  double draw(Rng& rng) const override { return rng.uniform() < p_high_ ? a_ + N_ : a_ - 1.0; }
  double mean_factor() const override { return a_; }
  std::string name() const override { return "two_point_multiplicative"; }
  AssumptionReport assumptions() const override;
  double a() const { return a_; }
  int N() const { return N_; }
  double p_high() const { return p_high_; }

 private:
  double a_;
  int N_;
  double p_high_;
};

std::shared_ptr<LinearAdditiveOperator> make_linear_additive(Matrix A, Vector b, const Matrix& noise_cov);
std::shared_ptr<PairGaussianOperator> make_pair_gaussian_example(Eigen::Index d, double sigma_bar);
std::shared_ptr<MultiplicativeGaussianOperator> make_multiplicative_gaussian();
std::shared_ptr<TwoPointMultiplicativeOperator> make_two_point_multiplicative(double a, int N);

// Random A rescaled to spectral norm gamma_c, random offset, isotropic Gaussian
// noise with standard deviation noise_scale per coordinate.
std::shared_ptr<LinearAdditiveOperator> make_random_contractive(Eigen::Index d, double gamma_c,
                                                                double noise_scale,
                                                                std::uint64_t seed);

}  // namespace salab
