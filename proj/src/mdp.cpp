#include "salab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "salab/errors.hpp"
#include "salab/norms.hpp"

namespace salab {

namespace {

constexpr double kStochTol = 1e-12;

Vector flat_rewards(const TabularMdp& mdp) {
  Vector r(static_cast<Eigen::Index>(mdp.n_states()) * mdp.n_actions());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) r[mdp.row(s, a)] = mdp.R()(s, a);
  return r;
}

Vector state_max(const TabularMdp& mdp, const Vector& Q) {
  Vector v(mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s) v[s] = Q.segment(mdp.row(s, 0), mdp.n_actions()).maxCoeff();
  return v;
}

std::vector<double> cumulative(const Eigen::Ref<const Vector>& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    c[i] = acc;
  }
  if (!c.empty()) c.back() = 1.0;
  return c;
}

double spectral_norm(const Matrix& M) { return Eigen::JacobiSVD<Matrix>(M).singularValues()[0]; }

}  // namespace

TabularMdp::TabularMdp(int n_states, int n_actions, Matrix P, Matrix R, double gamma, double R_max)
    : S_(n_states), A_(n_actions), P_(std::move(P)), R_(std::move(R)), gamma_(gamma), R_max_(R_max) {
  if (S_ < 1 || A_ < 1) throw MalformedMdp("MDP needs at least one state and one action");
  if (P_.rows() != static_cast<Eigen::Index>(S_) * A_ || P_.cols() != S_)
    throw MalformedMdp("transition table has the wrong shape");
  if (R_.rows() != S_ || R_.cols() != A_) throw MalformedMdp("reward table has the wrong shape");
  if (!(gamma_ >= 0 && gamma_ < 1)) throw MalformedMdp("gamma must lie in [0, 1)");
  if (!(R_max_ >= 0)) throw MalformedMdp("R_max must be non-negative");
  for (Eigen::Index r = 0; r < P_.rows(); ++r) {
    if ((P_.row(r).array() < 0).any())
      throw MalformedMdp("transition row " + std::to_string(r) + " has a negative entry");
    if (std::abs(P_.row(r).sum() - 1.0) > kStochTol)
      throw MalformedMdp("transition row " + std::to_string(r) + " does not sum to 1");
  }
  if ((R_.array() < 0).any() || (R_.array() > R_max_).any())
    throw MalformedMdp("rewards must lie in [0, R_max]");
}

void validate_policy(const TabularMdp& mdp, const Policy& pi) {
  if (pi.rows() != mdp.n_states() || pi.cols() != mdp.n_actions())
    throw InvalidArgument("policy has the wrong shape");
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    if ((pi.row(s).array() < 0).any() || std::abs(pi.row(s).sum() - 1.0) > kStochTol)
      throw InvalidArgument("policy row " + std::to_string(s) + " is not a distribution");
  }
}

Matrix policy_transition(const TabularMdp& mdp, const Policy& pi) {
  validate_policy(mdp, pi);
  Matrix Pp = Matrix::Zero(mdp.n_states(), mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) Pp.row(s) += pi(s, a) * mdp.P().row(mdp.row(s, a));
  return Pp;
}

Vector policy_reward(const TabularMdp& mdp, const Policy& pi) {
  validate_policy(mdp, pi);
  return (mdp.R().cwiseProduct(pi)).rowwise().sum();
}

Vector stationary_distribution(const Matrix& P) {
  const Eigen::Index n = P.rows();
  const Matrix Mt = P.transpose() - Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(Mt);
  lu.setThreshold(1e-10);
  if (lu.rank() != n - 1) throw ReducibleChain("eigenvalue-1 left eigenspace is not one-dimensional");
  Matrix sys = Mt;
  sys.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Vector mu = sys.fullPivLu().solve(rhs);
  mu = mu.cwiseMax(0.0);
  mu /= mu.sum();
  return mu;
}

Vector stationary_by_power(const Matrix& P, int iterations) {
  const Eigen::Index n = P.rows();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(n, 1.0 / n);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  for (int i = 0; i < iterations; ++i) {
    acc += x;
    x = x * P;
  }
  return (acc / iterations).transpose();
}

Vector exact_value(const TabularMdp& mdp, const Policy& pi) {
  const Matrix Pp = policy_transition(mdp, pi);
  const Vector r = policy_reward(mdp, pi);
  const Eigen::Index n = mdp.n_states();
  return (Matrix::Identity(n, n) - mdp.gamma() * Pp).fullPivLu().solve(r);
}

Vector bellman_optimality(const TabularMdp& mdp, const Vector& Q) {
  return flat_rewards(mdp) + mdp.gamma() * (mdp.P() * state_max(mdp, Q));
}

namespace {

std::vector<int> greedy_actions(const TabularMdp& mdp, const Vector& Q) {
  std::vector<int> g(mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s) {
    Eigen::Index best = 0;
    Q.segment(mdp.row(s, 0), mdp.n_actions()).maxCoeff(&best);
    g[s] = static_cast<int>(best);
  }
  return g;
}

}  // namespace

QStarResult exact_qstar(const TabularMdp& mdp, double tol, std::optional<double> gap_tol) {
  const double g = mdp.gamma();
  QStarResult res;
  Vector Q = flat_rewards(mdp);
  if (g > 0) {
    const double stop = tol * (1 - g) / (2 * g);
    for (int it = 0; it < 10'000'000; ++it) {
      Vector next = bellman_optimality(mdp, Q);
      const double diff = (next - Q).cwiseAbs().maxCoeff();
      Q = std::move(next);
      res.iterations = it + 1;
      if (diff <= stop) break;
    }
    // Polish: evaluate the greedy policy exactly and keep it if it is self-consistent.
    const auto greedy = greedy_actions(mdp, Q);
    const int S = mdp.n_states();
    Matrix Pg(S, S);
    Vector rg(S);
    for (int s = 0; s < S; ++s) {
      Pg.row(s) = mdp.P().row(mdp.row(s, greedy[s]));
      rg[s] = mdp.R()(s, greedy[s]);
    }
    const Vector V = (Matrix::Identity(S, S) - g * Pg).fullPivLu().solve(rg);
    const Vector Qp = flat_rewards(mdp) + g * (mdp.P() * V);
    if (greedy_actions(mdp, Qp) == greedy &&
        (bellman_optimality(mdp, Qp) - Qp).cwiseAbs().maxCoeff() <= (bellman_optimality(mdp, Q) - Q).cwiseAbs().maxCoeff())
      Q = Qp;
  }
  res.Q = Q;
  res.greedy = greedy_actions(mdp, Q);
  res.residual = (bellman_optimality(mdp, Q) - Q).cwiseAbs().maxCoeff();
  res.gap = std::numeric_limits<double>::infinity();
  if (mdp.n_actions() >= 2) {
    for (int s = 0; s < mdp.n_states(); ++s) {
      Vector q = Q.segment(mdp.row(s, 0), mdp.n_actions());
      std::sort(q.data(), q.data() + q.size(), std::greater<>());
      res.gap = std::min(res.gap, q[0] - q[1]);
    }
  }
  if (gap_tol && res.gap <= *gap_tol)
    throw GreedyNotUnique("greedy action of Q* is not unique (gap " + std::to_string(res.gap) + ")");
  return res;
}

double TdOperatorReport::gamma_c_at(double pp) const {
  return std::pow(1 - (1 - std::pow(gamma, n)) * mu_min, 1 - 1 / pp);
}

TdOperatorReport td_operator_report(const TabularMdp& mdp, const Policy& pi, int n, double p) {
  if (n < 1) throw InvalidArgument("TD lookahead n must be at least 1");
  if (!(p >= 2)) throw InvalidArgument("TD report needs p >= 2");
  const Eigen::Index S = mdp.n_states();
  const Matrix Pp = policy_transition(mdp, pi);
  const Vector r = policy_reward(mdp, pi);
  const double g = mdp.gamma();
  const double gn = std::pow(g, n);

  TdOperatorReport rep;
  rep.gamma = g;
  rep.n = n;
  rep.p = p;
  rep.mu_pi = stationary_distribution(Pp);
  rep.mu_min = rep.mu_pi.minCoeff();
  const Matrix I = Matrix::Identity(S, S);
  Matrix Pn = I;
  Vector acc = Vector::Zero(S);
  double gi = 1.0;
  for (int i = 0; i < n; ++i) {
    acc += gi * (Pn * r);
    Pn = Pn * Pp;
    gi *= g;
  }
  const auto Mdiag = rep.mu_pi.asDiagonal();
  rep.A_pi = I - Mdiag * (I - gn * Pn);
  rep.b_pi = Mdiag * acc;
  rep.B_pi = ((1 - gn) / static_cast<double>(S)) * rep.mu_pi * Eigen::RowVectorXd::Ones(S);
  rep.C_pi = rep.A_pi + rep.B_pi;
  rep.nu_pi = stationary_distribution(rep.C_pi);
  rep.gamma_c = rep.gamma_c_at(p);
  rep.V_pi = exact_value(mdp, pi);
  rep.fixed_point_residual = (rep.A_pi * rep.V_pi + rep.b_pi - rep.V_pi).cwiseAbs().maxCoeff();
  return rep;
}

double p_schedule(std::int64_t k, double gamma, double n, double mu_min, double n_states) {
  const double x = (1 - std::pow(gamma, n)) * mu_min;
  const double p = (-4 * std::log(1 - x) / x) * std::log(n_states / x) * std::pow(k + 1.0, 0.25);
  return std::max(2.0, p);
}

double q_p_min(double gamma, double rho_b, int n_states, int n_actions) {
  return std::log(static_cast<double>(n_states) * n_actions) / std::log(1 / (1 - (1 - gamma) * rho_b));
}

double q_contraction_factor(double gamma, double rho_b, int n_states, int n_actions, double p) {
  const double pmin = q_p_min(gamma, rho_b, n_states, n_actions);
  if (p <= pmin)
    throw NotContractive("p = " + std::to_string(p) + " does not exceed p_min = " + std::to_string(pmin));
  return std::pow(static_cast<double>(n_states) * n_actions, 1 / p) * (1 - (1 - gamma) * rho_b);
}

SamplingTables::SamplingTables(const TabularMdp& mdp, const Policy& pi, const Vector& start_dist) {
  for (int s = 0; s < mdp.n_states(); ++s) policy.push_back(cumulative(pi.row(s).transpose()));
  for (Eigen::Index r = 0; r < mdp.P().rows(); ++r) transition.push_back(cumulative(mdp.P().row(r).transpose()));
  start = cumulative(start_dist);
}

TdSampler::TdSampler(std::shared_ptr<const TabularMdp> mdp, Policy pi, int n)
    : mdp_(std::move(mdp)),
      pi_(std::move(pi)),
      n_(n),
      gamma_n_(std::pow(mdp_->gamma(), n)),
      report_(td_operator_report(*mdp_, pi_, n, 2.0)),
      tables_(*mdp_, pi_, report_.mu_pi) {}

TdSampler::Draw TdSampler::draw(Rng& rng) const {
  Draw w;
  int s = static_cast<int>(rng.categorical(tables_.start));
  w.s0 = s;
  double disc = 1.0;
  for (int i = 0; i < n_; ++i) {
    const int a = static_cast<int>(rng.categorical(tables_.policy[s]));
    w.discounted_reward += disc * mdp_->R()(s, a);
    disc *= mdp_->gamma();
    s = static_cast<int>(rng.categorical(tables_.transition[mdp_->row(s, a)]));
  }
  w.sn = s;
  return w;
}

void TdSampler::sample(const Vector& x, Rng& rng, Vector& out) const {
  const Draw w = draw(rng);
  out = x;
  out[w.s0] += gamma_n_ * x[w.sn] - x[w.s0] + w.discounted_reward;
}

std::optional<Matrix> TdSampler::jacobian_at_fixed_point(Rng& rng) const {
  const Draw w = draw(rng);
  Matrix J = Matrix::Identity(dim(), dim());
  J(w.s0, w.s0) -= 1.0;
  J(w.s0, w.sn) += gamma_n_;
  return J;
}

AssumptionReport TdSampler::assumptions() const {
  AssumptionReport r;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  r.gamma_c = report_.gamma_c;
  r.M = 1.0;
  r.norm_id = NormSpec::weighted_p(2.0, report_.nu_pi).id();
  return r;
}

QSampler::QSampler(std::shared_ptr<const TabularMdp> mdp, Policy pi_b)
    : mdp_(std::move(mdp)),
      pi_b_(std::move(pi_b)),
      mu_b_(stationary_distribution(policy_transition(*mdp_, pi_b_))),
      qstar_(exact_qstar(*mdp_, 1e-12, std::nullopt)),
      tables_(*mdp_, pi_b_, mu_b_) {
  visit_.resize(dim());
  for (int s = 0; s < mdp_->n_states(); ++s)
    for (int a = 0; a < mdp_->n_actions(); ++a) visit_[mdp_->row(s, a)] = mu_b_[s] * pi_b_(s, a);
  rho_b_ = visit_.minCoeff();
}

QSampler::Draw QSampler::draw(Rng& rng) const {
  Draw w;
  w.s = static_cast<int>(rng.categorical(tables_.start));
  w.a = static_cast<int>(rng.categorical(tables_.policy[w.s]));
  w.s_next = static_cast<int>(rng.categorical(tables_.transition[mdp_->row(w.s, w.a)]));
  return w;
}

void QSampler::sample(const Vector& x, Rng& rng, Vector& out) const {
  const Draw w = draw(rng);
  out = x;
  const Eigen::Index j = mdp_->row(w.s, w.a);
  const double best = x.segment(mdp_->row(w.s_next, 0), mdp_->n_actions()).maxCoeff();
  out[j] += mdp_->R()(w.s, w.a) + mdp_->gamma() * best - x[j];
}

Vector QSampler::mean(const Vector& x) const {
  return x + visit_.cwiseProduct(bellman_optimality(*mdp_, x) - x);
}

std::optional<Matrix> QSampler::jacobian_at_fixed_point(Rng& rng) const {
  const Draw w = draw(rng);
  Matrix J = Matrix::Identity(dim(), dim());
  const Eigen::Index j = mdp_->row(w.s, w.a);
  J(j, j) -= 1.0;
  J(j, mdp_->row(w.s_next, qstar_.greedy[w.s_next])) += mdp_->gamma();
  return J;
}

AssumptionReport QSampler::assumptions() const {
  AssumptionReport r;
  r.N = 0.0;
  r.R = qstar_.gap / (2 * (1 + mdp_->gamma()));
  r.gamma_c = 1 - (1 - mdp_->gamma()) * rho_b_;
  r.sigma_bar_sq = 4 * mdp_->R_max() * mdp_->R_max() / ((1 - mdp_->gamma()) * (1 - mdp_->gamma()));
  r.norm_id = "max";
  return r;
}

OffPolicyReport offpolicy_report(const TabularMdp& mdp, const LfaConfig& cfg) {
  const Eigen::Index S = mdp.n_states();
  const Matrix& Phi = cfg.Phi;
  OffPolicyReport rep;
  rep.mu_b = stationary_distribution(policy_transition(mdp, cfg.pi_b));
  const Matrix G = mdp.gamma() * policy_transition(mdp, cfg.pi);
  const Vector r = policy_reward(mdp, cfg.pi);
  Matrix Gl = Matrix::Identity(S, S);
  Vector acc = Vector::Zero(S);
  for (int l = 0; l < cfg.n; ++l) {
    acc += Gl * r;
    Gl = Gl * G;
  }
  const auto K = rep.mu_b.asDiagonal();
  rep.A_bar = Phi.transpose() * K * (Gl - Matrix::Identity(S, S)) * Phi;
  rep.b_bar = Phi.transpose() * K * acc;
  Eigen::FullPivLU<Matrix> lu(rep.A_bar);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularSystem("off-policy A_bar is singular");
  rep.v_pi = lu.solve(-rep.b_bar);
  const Vector target = acc + Gl * (Phi * rep.v_pi);
  const Matrix gram = Phi.transpose() * K * Phi;
  const Vector proj = Phi * gram.ldlt().solve(Phi.transpose() * K * target);
  rep.projected_residual = (Phi * rep.v_pi - proj).cwiseAbs().maxCoeff();
  return rep;
}

namespace {

const LfaConfig& checked(const TabularMdp& mdp, const LfaConfig& cfg) {
  validate_policy(mdp, cfg.pi);
  validate_policy(mdp, cfg.pi_b);
  if (cfg.Phi.rows() != mdp.n_states()) throw InvalidArgument("feature matrix needs one row per state");
  Eigen::ColPivHouseholderQR<Matrix> qr(cfg.Phi);
  qr.setThreshold(1e-10);
  if (qr.rank() != cfg.Phi.cols()) throw InvalidArgument("feature matrix is not full column rank");
  if (cfg.n < 1) throw InvalidArgument("lookahead n must be at least 1");
  if (!(cfg.zeta > 0)) throw InvalidArgument("zeta must be positive");
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a)
      if (cfg.pi(s, a) > 0 && !(cfg.pi_b(s, a) > 0))
        throw UnsupportedBehavior("behavior policy has no mass where the target policy acts");
  return cfg;
}

}  // namespace

OffPolicyTdSampler::OffPolicyTdSampler(std::shared_ptr<const TabularMdp> mdp, LfaConfig cfg)
    : mdp_(std::move(mdp)),
      cfg_(checked(*mdp_, cfg)),
      report_(offpolicy_report(*mdp_, cfg_)),
      tables_(*mdp_, cfg_.pi_b, report_.mu_b) {}

OffPolicyTdSampler::Draw OffPolicyTdSampler::draw(Rng& rng) const {
  Draw w;
  w.states.reserve(cfg_.n + 1);
  w.actions.reserve(cfg_.n);
  w.ratios.reserve(cfg_.n);
  int s = static_cast<int>(rng.categorical(tables_.start));
  w.states.push_back(s);
  double rho = 1.0;
  for (int l = 0; l < cfg_.n; ++l) {
    const int a = static_cast<int>(rng.categorical(tables_.policy[s]));
    rho *= cfg_.pi(s, a) / cfg_.pi_b(s, a);
    w.actions.push_back(a);
    w.ratios.push_back(rho);
    s = static_cast<int>(rng.categorical(tables_.transition[mdp_->row(s, a)]));
    w.states.push_back(s);
  }
  return w;
}

Vector OffPolicyTdSampler::direction(const Vector& v, const Draw& w) const {
  const Vector fv = cfg_.Phi * v;
  const double g = mdp_->gamma();
  double total = 0.0;
  double gl = 1.0;
  for (int l = 0; l < cfg_.n; ++l) {
    const int s = w.states[l];
    const double td = mdp_->R()(s, w.actions[l]) + g * fv[w.states[l + 1]] - fv[s];
    total += gl * w.ratios[l] * td;
    gl *= g;
  }
  return cfg_.Phi.row(w.states[0]).transpose() * total;
}

void OffPolicyTdSampler::sample(const Vector& x, Rng& rng, Vector& out) const {
  const Draw w = draw(rng);
  out = x + direction(x, w) / cfg_.zeta;
}

Vector OffPolicyTdSampler::mean(const Vector& x) const {
  return x + (report_.A_bar * x + report_.b_bar) / cfg_.zeta;
}

AssumptionReport OffPolicyTdSampler::assumptions() const {
  AssumptionReport r;
  r.N = 0.0;
  r.R = std::numeric_limits<double>::infinity();
  return r;
}

HurwitzResult hurwitz_check(const Matrix& A_bar) {
  Eigen::EigenSolver<Matrix> es(A_bar, false);
  HurwitzResult h;
  h.abscissa = es.eigenvalues().real().maxCoeff();
  h.hurwitz = h.abscissa < 0;
  return h;
}

double weighted_two_norm(const Matrix& W, const Vector& x) { return std::sqrt(x.dot(W * x)); }

LyapunovNorm lyapunov_contraction_norm(const Matrix& A_bar, int pairs, std::uint64_t seed) {
  const auto h = hurwitz_check(A_bar);
  if (!h.hurwitz) throw NotHurwitz("A_bar has spectral abscissa " + std::to_string(h.abscissa));
  const Eigen::Index d = A_bar.rows();
  const Matrix I = Matrix::Identity(d, d);
  // vec(A^T W + W A) = (I kron A^T + A^T kron I) vec(W), column-major.
  Matrix K = Matrix::Zero(d * d, d * d);
  const Matrix At = A_bar.transpose();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      K.block(i * d, j * d, d, d) += I(i, j) * At;
      K.block(i * d, j * d, d, d) += At(i, j) * I;
    }
  const Vector rhs = -Eigen::Map<const Vector>(I.data(), d * d);
  const Vector w = K.fullPivLu().solve(rhs);
  LyapunovNorm out;
  out.W = Eigen::Map<const Matrix>(w.data(), d, d);
  out.W = 0.5 * (out.W + out.W.transpose());
  Eigen::LLT<Matrix> llt(out.W);
  if (llt.info() != Eigen::Success) throw NotHurwitz("Lyapunov solution is not positive definite");
  const Matrix Lt = llt.matrixL().transpose();
  const Matrix Lt_inv = Lt.inverse();

  double zeta = 1.0;
  for (int it = 0; it < 80; ++it, zeta *= 2) {
    const Matrix T = I + A_bar / zeta;
    const double induced = spectral_norm(Lt * T * Lt_inv);
    if (induced < 1.0) {
      out.zeta_star = zeta;
      out.induced_ratio = induced;
      break;
    }
  }
  if (out.induced_ratio == 0.0 && !(spectral_norm(Lt * (I + A_bar / out.zeta_star) * Lt_inv) < 1.0))
    throw Error("no contracting zeta found");

  Rng rng(seed, 0);
  const Matrix T = I + A_bar / out.zeta_star;
  Vector x1(d), x2(d);
  for (int i = 0; i < pairs; ++i) {
    rng.fill_normal(x1);
    rng.fill_normal(x2);
    const Vector diff = x1 - x2;
    const double r = weighted_two_norm(out.W, T * diff) / weighted_two_norm(out.W, diff);
    out.sampled_ratio = std::max(out.sampled_ratio, r);
  }
  out.pairs = pairs;
  return out;
}

TabularMdp random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed, double R_max) {
  Rng rng(seed, 0);
  Matrix P(static_cast<Eigen::Index>(n_states) * n_actions, n_states);
  for (Eigen::Index r = 0; r < P.rows(); ++r) {
    for (int c = 0; c < n_states; ++c) P(r, c) = -std::log(rng.uniform_open0());
    P.row(r) /= P.row(r).sum();
  }
  Matrix R(n_states, n_actions);
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = R_max * rng.uniform();
  return TabularMdp(n_states, n_actions, std::move(P), std::move(R), gamma, R_max);
}

Policy random_policy(int n_states, int n_actions, std::uint64_t seed) {
  Rng rng(seed, 1);
  Policy pi(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) pi(s, a) = -std::log(rng.uniform_open0());
    pi.row(s) /= pi.row(s).sum();
  }
  return pi;
}

Policy uniform_policy(int n_states, int n_actions) {
  return Policy::Constant(n_states, n_actions, 1.0 / n_actions);
}

void write_mdp(std::ostream& os, const TabularMdp& mdp) {
  os << "# tabular MDP: header |S| |A| gamma R_max, then P(.|s,a) rows, then R(s,.) rows\n";
  os << std::setprecision(17);
  os << mdp.n_states() << ' ' << mdp.n_actions() << ' ' << mdp.gamma() << ' ' << mdp.R_max() << '\n';
  for (Eigen::Index r = 0; r < mdp.P().rows(); ++r) {
    for (Eigen::Index c = 0; c < mdp.P().cols(); ++c) os << (c ? " " : "") << mdp.P()(r, c);
    os << '\n';
  }
  for (Eigen::Index s = 0; s < mdp.R().rows(); ++s) {
    for (Eigen::Index a = 0; a < mdp.R().cols(); ++a) os << (a ? " " : "") << mdp.R()(s, a);
    os << '\n';
  }
}

TabularMdp read_mdp(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> MalformedMdp {
    return MalformedMdp("line " + std::to_string(lineno) + ": " + what);
  };
  auto next_row = [&](std::size_t expect) {
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      std::vector<double> vals;
      double v;
      while (ss >> v) vals.push_back(v);
      if (!ss.eof()) throw fail("unparseable number");
      if (vals.empty()) continue;
      if (vals.size() != expect)
        throw fail("expected " + std::to_string(expect) + " values, found " + std::to_string(vals.size()));
      return vals;
    }
    ++lineno;
    throw fail("unexpected end of file");
  };
  const auto head = next_row(4);
  const int S = static_cast<int>(head[0]);
  const int A = static_cast<int>(head[1]);
  if (S < 1 || A < 1 || head[0] != S || head[1] != A) throw fail("|S| and |A| must be positive integers");
  const double gamma = head[2];
  const double R_max = head[3];
  if (!(gamma >= 0 && gamma < 1)) throw fail("gamma must lie in [0, 1)");
  Matrix P(static_cast<Eigen::Index>(S) * A, S);
  for (Eigen::Index r = 0; r < P.rows(); ++r) {
    const auto row = next_row(S);
    double sum = 0.0;
    for (int c = 0; c < S; ++c) {
      if (row[c] < 0) throw fail("negative transition probability");
      P(r, c) = row[c];
      sum += row[c];
    }
    if (std::abs(sum - 1.0) > kStochTol)
      throw fail("transition row for (s=" + std::to_string(r / A) + ", a=" + std::to_string(r % A) +
                 ") sums to " + std::to_string(sum));
  }
  Matrix R(S, A);
  for (int s = 0; s < S; ++s) {
    const auto row = next_row(A);
    for (int a = 0; a < A; ++a) {
      if (row[a] < 0 || row[a] > R_max) throw fail("reward outside [0, R_max]");
      R(s, a) = row[a];
    }
  }
  return TabularMdp(S, A, std::move(P), std::move(R), gamma, R_max);
}

TabularMdp load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedMdp("cannot open " + path);
  return read_mdp(in);
}

RlPluginBound td_plugin_bound(const TdSampler& td, const StepSchedule& s, const Vector& V0, double delta,
                                std::int64_t k) {
  const auto& rep = td.report();
  const auto& mdp = td.mdp();
  const double S = mdp.n_states();
  const double g = mdp.gamma();
  const double gn = std::pow(g, td.n());
  const double x = (1 - gn) * rep.mu_min;

  RlPluginBound out;
  out.p = p_schedule(k, g, td.n(), rep.mu_min, S);
  out.gamma_c = rep.gamma_c_at(out.p);
  const double p = out.p;
  const double vmax = mdp.R_max() / (1 - g);
  const NormSpec c = NormSpec::weighted_p(p, rep.nu_pi);

  // Sub-Gaussian constant of the Jacobian noise from the worst realization.
  double spread = 0.0;
  const Eigen::Index n = mdp.n_states();
  for (Eigen::Index s0 = 0; s0 < n; ++s0)
    for (Eigen::Index sn = 0; sn < n; ++sn) {
      Matrix J = Matrix::Identity(n, n);
      J(s0, s0) -= 1.0;
      J(s0, sn) += gn;
      spread = std::max(spread, spectral_norm(J - rep.A_pi));
    }
  const double B = spread * std::pow(S, 1 - 2 / p) * std::pow(rep.nu_pi.minCoeff(), -2 / p);

  auto& bp = out.params;
  bp.nu = 1 - out.gamma_c;
  bp.M = p - 1;
  bp.N = 0.0;
  bp.R = std::numeric_limits<double>::infinity();
  bp.sigma_bar_sq = mdp.R_max() * mdp.R_max() * std::pow(S, 2 / p) / ((1 - g) * (1 - g) * std::pow(x, 2 / p));
  bp.sigma_hat_sq = B * B;
  bp.u_c2 = 1.0;
  bp.d = S;
  bp.schedule = s;

  out.envelope = AdditiveNoiseConfig::same_smoothing_norm(4 * vmax * vmax, out.gamma_c, 1.0, S,
                                                           squared_norm(c, V0 - rep.V_pi), p - 1);
  const auto f = additive_envelope(out.envelope, s);
  out.combined = combined_bound(bp, f, delta, k);
  out.conversion = std::pow(S / x, 2 / p);
  out.bound = out.conversion * out.combined;
  out.leading = leading_td_bound({mdp.R_max(), g, static_cast<double>(td.n()), rep.mu_min, S}, delta, k);
  return out;
}

RlPluginBound q_plugin_bound(const QSampler& q, const StepSchedule& s, const Vector& Q0, double delta,
                               std::int64_t k) {
  const auto& mdp = q.mdp();
  const int S = mdp.n_states(), A = mdp.n_actions();
  const double d = static_cast<double>(S) * A;
  const double g = mdp.gamma();
  const double pmin = q_p_min(g, q.rho_b(), S, A);

  RlPluginBound out;
  double p = std::max(2.0, pmin * std::pow(k + 1.0, 0.25));
  if (p <= pmin) p = 2 * pmin;
  out.p = p;
  out.gamma_c = q_contraction_factor(g, q.rho_b(), S, A, p);
  const double vmax = mdp.R_max() / (1 - g);

  // Mean Jacobian at Q*: I + D (gamma P Pi_greedy - I).
  const auto dim = static_cast<Eigen::Index>(d);
  Matrix PG = Matrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (int sn = 0; sn < S; ++sn) PG(r, mdp.row(sn, q.qstar().greedy[sn])) += mdp.P()(r, sn);
  const Matrix I = Matrix::Identity(dim, dim);
  const Matrix Jbar = I + q.visit_probabilities().asDiagonal() * (g * PG - I);
  double spread = 0.0;
  for (int s0 = 0; s0 < S; ++s0)
    for (int a = 0; a < A; ++a)
      for (int sn = 0; sn < S; ++sn) {
        Matrix J = I;
        const Eigen::Index j = mdp.row(s0, a);
        J(j, j) -= 1.0;
        J(j, mdp.row(sn, q.qstar().greedy[sn])) += g;
        spread = std::max(spread, spectral_norm(J - Jbar));
      }
  const double B = spread * std::pow(d, 1 - 2 / p);

  auto& bp = out.params;
  bp.nu = 1 - out.gamma_c;
  bp.M = p - 1;
  bp.N = 0.0;
  bp.R = q.qstar().gap / (2 * (1 + g));
  bp.sigma_bar_sq = 4 * mdp.R_max() * mdp.R_max() / ((1 - g) * (1 - g));
  bp.sigma_hat_sq = B * B;
  bp.u_c2 = 1.0;
  bp.d = d;
  bp.schedule = s;

  const NormSpec c = NormSpec::weighted_p(p);
  out.envelope = AdditiveNoiseConfig::same_smoothing_norm(4 * vmax * vmax, out.gamma_c, 1.0, d,
                                                           squared_norm(c, Q0 - q.fixed_point()), p - 1);
  const auto f = additive_envelope(out.envelope, s);
  out.combined = combined_bound(bp, f, delta, k);
  out.conversion = 1.0;
  out.bound = out.combined;
  out.leading = leading_q_bound({mdp.R_max(), g, q.rho_b(), static_cast<double>(S), static_cast<double>(A)}, delta, k);
  return out;
}

}  // namespace salab
