#include "salab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "salab/errors.hpp"

namespace salab {

std::size_t ErrorEnsemble::index_of(std::int64_t k) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), k);
  if (it == checkpoints.end()) throw InvalidArgument("checkpoint " + std::to_string(k) + " was not recorded");
  return static_cast<std::size_t>(it - checkpoints.begin());
}

ErrorEnsemble run_ensemble(const StochasticOperator& op, const SaConfig& cfg, std::int64_t n_reps,
                           std::uint64_t base_seed, int threads) {
  if (n_reps < 1) throw InvalidArgument("ensemble needs at least one replication");
  threads = std::max(1, threads);

  struct Slot {
    bool diverged = false;
    std::vector<double> ex, ey;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n_reps));
  std::vector<std::exception_ptr> failures(threads);

  auto worker = [&](int t) {
    try {
      for (std::int64_t r = t; r < n_reps; r += threads) {
        Rng rng(base_seed, static_cast<std::uint64_t>(r));
        auto& slot = slots[static_cast<std::size_t>(r)];
        try {
          auto tr = run_sa(op, cfg, rng);
          slot.ex = std::move(tr.err_x);
          slot.ey = std::move(tr.err_y);
        } catch (const NonFiniteIterate&) {
          slot.diverged = true;
        }
      }
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  ErrorEnsemble ens;
  ens.checkpoints = cfg.checkpoints;
  std::sort(ens.checkpoints.begin(), ens.checkpoints.end());
  ens.n_reps = n_reps;
  ens.base_seed = base_seed;
  ens.norm_id = cfg.norm.id();
  const std::size_t nc = ens.checkpoints.size();
  ens.err_x.assign(nc, {});
  ens.err_y.assign(nc, {});
  for (std::int64_t r = 0; r < n_reps; ++r) {
    const auto& slot = slots[static_cast<std::size_t>(r)];
    if (slot.diverged) {
      ++ens.divergence_count;
      continue;
    }
    ens.replicates.push_back(r);
    for (std::size_t c = 0; c < nc; ++c) {
      ens.err_x[c].push_back(slot.ex[c]);
      ens.err_y[c].push_back(slot.ey[c]);
    }
  }
  return ens;
}

QuantileEstimate empirical_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q > 0 && q <= 1)) throw InvalidArgument("quantile level must lie in (0, 1]");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<std::int64_t>(samples.size());
  QuantileEstimate est;
  est.rank = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(n * q - 1e-9)), 1, n);
  est.value = samples[est.rank - 1];
  if (q >= 1) {
    est.ci_lo = est.ci_hi = est.value;
    return est;
  }
  const boost::math::binomial bin(static_cast<double>(n), q);
  const auto lo = static_cast<std::int64_t>(boost::math::quantile(bin, 0.005));
  const auto hi = static_cast<std::int64_t>(boost::math::quantile(bin, 0.995)) + 1;
  est.ci_lo = samples[std::clamp<std::int64_t>(lo, 1, n) - 1];
  est.ci_hi = samples[std::clamp<std::int64_t>(hi, 1, n) - 1];
  return est;
}

double median(std::vector<double> samples) { return empirical_quantile(std::move(samples), 0.5).value; }

double mean(const std::vector<double>& samples) {
  if (samples.empty()) throw InvalidArgument("mean of an empty sample");
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

double clopper_pearson_upper(std::int64_t successes, std::int64_t n, double level) {
  if (n < 1 || successes < 0 || successes > n) throw InvalidArgument("invalid binomial counts");
  if (successes == n) return 1.0;
  const boost::math::beta_distribution<> b(static_cast<double>(successes + 1), static_cast<double>(n - successes));
  return boost::math::quantile(b, level);
}

CoverageVerdict coverage_verdict(std::int64_t exceed_count, std::int64_t n, double delta, double slack) {
  CoverageVerdict v;
  v.delta = delta;
  v.exceed_count = exceed_count;
  v.n = n;
  v.slack = slack;
  v.binomial_upper_ci = clopper_pearson_upper(exceed_count, n);
  v.pass = v.binomial_upper_ci <= delta * slack;
  return v;
}

std::vector<CoverageVerdict> coverage_test(const ErrorEnsemble& ens, const BoundFn& bound, double delta,
                                           double slack) {
  std::vector<CoverageVerdict> out;
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    const std::int64_t k = ens.checkpoints[c];
    const double b = bound(k, delta);
    std::int64_t exceed = ens.divergence_count;
    for (double e : ens.err_y[c])
      if (e > b) ++exceed;
    auto v = coverage_verdict(exceed, ens.n_reps, delta, slack);
    v.k = k;
    v.bound = b;
    out.push_back(v);
  }
  return out;
}

double pair_gaussian_exact_quantile(double sigma_bar, std::int64_t k, double delta) {
  return sigma_bar * std::sqrt(static_cast<double>(k) * std::log(1 / delta)) / static_cast<double>(k + 1);
}

TightnessReport tightness_check(const ErrorEnsemble& ens, const BoundParams& params, double sigma_bar,
                                double delta, std::int64_t k) {
  TightnessReport rep;
  rep.k = k;
  rep.delta = delta;
  std::vector<double> norms = ens.y_at(k);
  for (double& v : norms) v = std::sqrt(v);
  rep.empirical = empirical_quantile(std::move(norms), 1 - delta);
  rep.exact = pair_gaussian_exact_quantile(sigma_bar, k, delta);
  rep.empirical_over_exact = rep.empirical.value / rep.exact;
  rep.leading = std::sqrt(leading_terms(params, delta, k).small_delta);
  rep.leading_over_exact = rep.leading / rep.exact;
  rep.factor_limit = 2 * std::sqrt(6.0);
  return rep;
}

double truncated_gaussian_product_mgf(double c, double r) {
  using Gauss = boost::math::quadrature::gauss<double, 8>;
  const double panel = 0.25;
  const int n = std::max(1, static_cast<int>(std::ceil(2 * r / panel)));
  const double width = 2 * r / n;
  const double norm = 1 / (2 * std::numbers::pi);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a1 = -r + i * width;
    for (int j = 0; j < n; ++j) {
      const double a2 = -r + j * width;
      total += Gauss::integrate(
          [&](double w1) {
            return Gauss::integrate(
                [&](double w2) { return std::exp(-0.5 * (w1 * w1 + w2 * w2) + c * w1 * w2); }, a2, a2 + width);
          },
          a1, a1 + width);
    }
  }
  return norm * total;
}

double mgf_critical_t(std::int64_t k, double x0, const StepSchedule& s) {
  return static_cast<double>(k + 1) / (x0 * s.step(0) * s.step(1));
}

MgfDivergenceReport truncated_mgf_divergence(double t, const std::vector<double>& radii, double x0,
                                             const StepSchedule& s, std::int64_t k) {
  if (radii.size() < 2) throw InvalidArgument("need at least two radii");
  MgfDivergenceReport rep;
  rep.t = t;
  rep.t_star = mgf_critical_t(k, x0, s);
  rep.radii = radii;
  const double c = t * x0 * s.step(0) * s.step(1) / static_cast<double>(k + 1);
  for (double r : radii) rep.integrals.push_back(truncated_gaussian_product_mgf(c, r));
  const auto n = rep.integrals.size();
  rep.growth = rep.integrals.back() / rep.integrals.front();
  rep.tail_ratio = rep.integrals[n - 1] / rep.integrals[n - 2];
  rep.convergent = rep.tail_ratio < 1.01;
  rep.divergent = rep.growth >= 10;
  rep.regime = s.constant() ? "constant-step" : "diminishing-step";
  return rep;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least squares needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    f.rss += e * e;
  }
  return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

TailDiagnostics tail_diagnostics(std::vector<double> samples) {
  TailDiagnostics d;
  d.hill_fractions = {0.01, 0.02, 0.05};
  std::sort(samples.begin(), samples.end(), std::greater<>());
  const std::size_t n = samples.size();
  const std::size_t m = n / 20;
  if (n < 100 || samples.front() == samples.back() || !(samples[m] > 0)) {
    d.degenerate = true;
    d.verdict = "DegenerateSample";
    return d;
  }
  for (double frac : d.hill_fractions) {
    const auto j = std::max<std::size_t>(1, static_cast<std::size_t>(frac * static_cast<double>(n)));
    double h = 0.0;
    for (std::size_t i = 0; i < j; ++i) h += std::log(samples[i] / samples[j]);
    h /= static_cast<double>(j);
    d.hill_index.push_back(h > 0 ? 1 / h : std::numeric_limits<double>::infinity());
  }
  for (std::size_t a = 0; a < d.hill_index.size(); ++a)
    for (std::size_t b = a + 1; b < d.hill_index.size(); ++b) {
      const double lo = std::min(d.hill_index[a], d.hill_index[b]);
      d.hill_spread = std::max(d.hill_spread, std::abs(d.hill_index[a] - d.hill_index[b]) / lo);
    }
  d.hill_stable = d.hill_spread < 0.25;

  // Top 5%: the i-th largest value has empirical survival i / n.
  d.tail_size = m;
  std::vector<double> xs, lxs, ls, lls;
  for (std::size_t i = 0; i < m; ++i) {
    const double surv = static_cast<double>(i + 1) / static_cast<double>(n);
    xs.push_back(samples[i]);
    lxs.push_back(std::log(samples[i]));
    ls.push_back(std::log(surv));
    lls.push_back(std::log(-std::log(surv)));
  }
  const auto e = least_squares(xs, ls);
  const auto p = least_squares(lxs, ls);
  const auto w = least_squares(lxs, lls);
  d.exp_slope = e.slope;
  d.exp_rss = e.rss;
  d.poly_slope = p.slope;
  d.poly_rss = p.rss;
  d.subweibull_shape = w.slope;
  d.subweibull_rss = w.rss;
  d.verdict = p.rss < e.rss ? "polynomial-tail-consistent" : "exponential-tail-consistent";
  return d;
}

void write_ensemble_csv(std::ostream& os, const ErrorEnsemble& ens) {
  os << std::setprecision(17);
  os << "checkpoint,replicate,err_x,err_y\n";
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c)
    for (std::size_t i = 0; i < ens.replicates.size(); ++i)
      os << ens.checkpoints[c] << ',' << ens.replicates[i] << ',' << ens.err_x[c][i] << ',' << ens.err_y[c][i]
         << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << std::setprecision(17);
  os << "checkpoint,delta,quantile,ci_lo,ci_hi,bound,exceed_count,verdict\n";
  for (const auto& r : rows)
    os << r.k << ',' << r.delta << ',' << r.quantile.value << ',' << r.quantile.ci_lo << ',' << r.quantile.ci_hi
       << ',' << r.bound << ',' << r.exceed_count << ',' << r.verdict << '\n';
}

}  // namespace salab
