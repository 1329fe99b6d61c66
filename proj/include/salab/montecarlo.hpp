#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "salab/bounds.hpp"
#include "salab/operators.hpp"
#include "salab/sa.hpp"

namespace salab {

// Squared errors across replications. Divergent replications are dropped from
// the sample arrays and counted in divergence_count.
struct ErrorEnsemble {
  std::vector<std::int64_t> checkpoints;
  std::vector<std::vector<double>> err_x;  // [checkpoint][surviving replicate]
  std::vector<std::vector<double>> err_y;
  std::vector<std::int64_t> replicates;    // ids of surviving replicates, ascending
  std::int64_t n_reps = 0;
  std::int64_t divergence_count = 0;
  std::uint64_t base_seed = 0;
  std::string norm_id;

  std::size_t index_of(std::int64_t k) const;
  const std::vector<double>& y_at(std::int64_t k) const { return err_y[index_of(k)]; }
  const std::vector<double>& x_at(std::int64_t k) const { return err_x[index_of(k)]; }
};

// Replicate r draws from Rng(base_seed, r). Results are merged by replicate
// index, so the output does not depend on the thread count.
ErrorEnsemble run_ensemble(const StochasticOperator& op, const SaConfig& cfg, std::int64_t n_reps,
                           std::uint64_t base_seed, int threads = 1);

struct QuantileEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t rank = 0;  // 1-based order statistic used
};
// Inverse empirical CDF: the ceil(n q)-th smallest sample. The 99% interval
// brackets the true quantile between two order statistics chosen from the
// Binomial(n, q) 0.5% and 99.5% quantiles.
QuantileEstimate empirical_quantile(std::vector<double> samples, double q);

double median(std::vector<double> samples);
double mean(const std::vector<double>& samples);

// One-sided upper Clopper-Pearson limit for a binomial proportion.
double clopper_pearson_upper(std::int64_t successes, std::int64_t n, double level = 0.99);

struct CoverageVerdict {
  std::int64_t k = 0;
  double delta = 0.0;
  double bound = 0.0;
  std::int64_t exceed_count = 0;
  std::int64_t n = 0;
  double binomial_upper_ci = 0.0;
  double slack = 1.0;
  bool pass = false;
};
CoverageVerdict coverage_verdict(std::int64_t exceed_count, std::int64_t n, double delta, double slack = 1.0);

using BoundFn = std::function<double(std::int64_t k, double delta)>;
// err_y > bound counts as an exceedance; so does every divergent replication.
std::vector<CoverageVerdict> coverage_test(const ErrorEnsemble& ens, const BoundFn& bound, double delta,
                                           double slack = 1.0);

// (1 - delta)-quantile of ||y_k||_2 for the pair-Gaussian example from x0 = 0
// with unit constant step: sigma sqrt(k log(1/delta)) / (k + 1).
double pair_gaussian_exact_quantile(double sigma_bar, std::int64_t k, double delta);

struct TightnessReport {
  std::int64_t k = 0;
  double delta = 0.0;
  QuantileEstimate empirical;   // of ||y_k||_2
  double exact = 0.0;
  double empirical_over_exact = 0.0;
  double leading = 0.0;         // square root of the leading squared-error term
  double leading_over_exact = 0.0;
  double factor_limit = 0.0;    // 2 sqrt(6)
};
TightnessReport tightness_check(const ErrorEnsemble& ens, const BoundParams& params, double sigma_bar,
                                double delta, std::int64_t k);

// E[exp(c w1 w2); |w1|, |w2| <= r] for w ~ N(0, I_2), by composite Gauss-Legendre.
double truncated_gaussian_product_mgf(double c, double r);
// t* = (k + 1) / (x0 alpha_0 alpha_1).
double mgf_critical_t(std::int64_t k, double x0, const StepSchedule& s);

struct MgfDivergenceReport {
  double t = 0.0;
  double t_star = 0.0;
  std::vector<double> radii;
  std::vector<double> integrals;
  double growth = 0.0;      // last / first
  double tail_ratio = 0.0;  // last / second to last
  bool convergent = false;  // tail_ratio < 1.01
  bool divergent = false;   // growth >= 10
  std::string regime;
};
// Multiplicative Gaussian example at k = 2:
// E[exp(t x0 alpha_0 alpha_1 w1 w2 / (k + 1)); |w| <= r] on each radius.
MgfDivergenceReport truncated_mgf_divergence(double t, const std::vector<double>& radii, double x0,
                                             const StepSchedule& s, std::int64_t k = 2);

struct TailDiagnostics {
  bool degenerate = false;
  std::vector<double> hill_fractions;
  std::vector<double> hill_index;
  double hill_spread = 0.0;  // max pairwise relative difference
  bool hill_stable = false;
  std::size_t tail_size = 0;
  double exp_slope = 0.0;    // log S against x
  double exp_rss = 0.0;
  double poly_slope = 0.0;   // log S against log x
  double poly_rss = 0.0;
  double subweibull_shape = 0.0;  // slope of log(-log S) against log x
  double subweibull_rss = 0.0;
  std::string verdict;  // "polynomial-tail-consistent", "exponential-tail-consistent" or "DegenerateSample"
};
TailDiagnostics tail_diagnostics(std::vector<double> samples);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_ensemble_csv(std::ostream& os, const ErrorEnsemble& ens);

struct SummaryRow {
  std::int64_t k = 0;
  double delta = 0.0;
  QuantileEstimate quantile;
  double bound = 0.0;
  std::int64_t exceed_count = 0;
  std::string verdict;
};
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace salab
