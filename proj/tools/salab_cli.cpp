// salab command-line front end. Every subcommand reads one spec file and
// writes CSV tables into --out. Exit codes: 0 success, 1 verdict failure,
// 2 spec or usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "salab/errors.hpp"
#include "salab/experiment.hpp"
#include "salab/mdp.hpp"
#include "salab/montecarlo.hpp"
#include "salab/norms.hpp"

namespace fs = std::filesystem;
using namespace salab;

namespace {

struct Options {
  std::string spec;
  std::string out = ".";
  std::int64_t reps = 0;
  std::int64_t seed = -1;
  int parallel = 0;
  std::string mdp;  // verify only
};

int default_threads() {
  if (const char* env = std::getenv("SALAB_PARALLEL")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

Experiment load(const Options& o) {
  auto ex = load_experiment(o.spec);
  if (o.reps > 0) ex.n_reps = o.reps;
  if (o.seed >= 0) ex.base_seed = static_cast<std::uint64_t>(o.seed);
  return ex;
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  std::ofstream os(fs::path(o.out) / name);
  if (!os) throw Error("cannot write " + (fs::path(o.out) / name).string());
  os << std::setprecision(17);
  return os;
}

ErrorEnsemble simulate(const Experiment& ex, const Options& o) {
  return run_ensemble(*ex.op, ex.sa, ex.n_reps, ex.base_seed, o.parallel > 0 ? o.parallel : default_threads());
}

int cmd_simulate(const Options& o) {
  const auto ex = load(o);
  const auto ens = simulate(ex, o);
  auto os = open_out(o, "ensemble.csv");
  write_ensemble_csv(os, ens);
  std::cout << "simulate: " << ex.op->name() << ", " << ens.n_reps << " replications, " << ens.divergence_count
            << " diverged\n";
  return 0;
}

int cmd_bound(const Options& o) {
  const auto ex = load(o);
  const auto f = ex.envelope();
  auto os = open_out(o, "bounds.csv");
  os << "k,delta,eps_tilde,eps_bar,main,crude,combined,f,k0\n";
  for (auto k : ex.ks)
    for (double delta : ex.deltas) {
      const auto r = evaluate_bounds(ex.params, f, delta, k);
      os << r.k << ',' << r.delta << ',' << r.eps_tilde << ',' << r.eps_bar << ',' << r.main << ',' << r.crude << ','
         << r.combined << ',' << r.f_value << ',' << r.k0 << '\n';
    }
  std::cout << "bound: " << ex.ks.size() * ex.deltas.size() << " rows\n";
  return 0;
}

std::vector<SummaryRow> coverage_rows(const Experiment& ex, const ErrorEnsemble& ens, bool& all_pass) {
  const auto bound = ex.bound_fn(&ens);
  std::vector<SummaryRow> rows;
  all_pass = true;
  for (double delta : ex.deltas) {
    for (const auto& v : coverage_test(ens, bound, delta, ex.slack)) {
      if (v.k == 0) continue;
      SummaryRow r;
      r.k = v.k;
      r.delta = delta;
      r.quantile = empirical_quantile(ens.y_at(v.k), 1 - delta);
      r.bound = v.bound;
      r.exceed_count = v.exceed_count;
      r.verdict = v.pass ? "pass" : "fail";
      all_pass = all_pass && v.pass;
      rows.push_back(r);
    }
  }
  return rows;
}

int cmd_coverage(const Options& o) {
  const auto ex = load(o);
  const auto ens = simulate(ex, o);
  bool ok = true;
  const auto rows = coverage_rows(ex, ens, ok);
  auto os = open_out(o, "summary.csv");
  write_summary_csv(os, rows);
  std::cout << "coverage: " << (ok ? "all verdicts pass" : "at least one verdict fails") << '\n';
  return ok ? 0 : 1;
}

int cmd_tightness(const Options& o) {
  const auto ex = load(o);
  if (ex.kind != "pair_gaussian") throw SpecError(0, "tightness needs operator kind = pair_gaussian");
  const auto ens = simulate(ex, o);
  const double sigma = std::sqrt(ex.params.sigma_bar_sq);
  auto os = open_out(o, "tightness.csv");
  os << "k,delta,quantile,ci_lo,ci_hi,exact,empirical_over_exact,leading,leading_over_exact,factor_limit\n";
  bool ok = true;
  for (auto k : ex.sa.checkpoints) {
    if (k == 0) continue;
    for (double delta : ex.deltas) {
      const auto t = tightness_check(ens, ex.params, sigma, delta, k);
      os << t.k << ',' << t.delta << ',' << t.empirical.value << ',' << t.empirical.ci_lo << ',' << t.empirical.ci_hi
         << ',' << t.exact << ',' << t.empirical_over_exact << ',' << t.leading << ',' << t.leading_over_exact << ','
         << t.factor_limit << '\n';
      ok = ok && t.exact >= t.empirical.ci_lo && t.exact <= t.empirical.ci_hi;
    }
  }
  std::cout << "tightness: exact quantile " << (ok ? "inside" : "outside") << " every 99% interval\n";
  return ok ? 0 : 1;
}

int cmd_tail(const Options& o) {
  const auto ex = load(o);
  const auto ens = simulate(ex, o);
  auto os = open_out(o, "tail.csv");
  os << "checkpoint,hill_1pct,hill_2pct,hill_5pct,hill_stable,exp_rss,poly_rss,subweibull_shape,subweibull_rss,"
        "verdict\n";
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    const auto d = tail_diagnostics(ens.err_y[c]);
    os << ens.checkpoints[c];
    if (d.degenerate) {
      os << ",,,,,,,,," << d.verdict << '\n';
      continue;
    }
    for (double h : d.hill_index) os << ',' << h;
    os << ',' << (d.hill_stable ? "true" : "false") << ',' << d.exp_rss << ',' << d.poly_rss << ','
       << d.subweibull_shape << ',' << d.subweibull_rss << ',' << d.verdict << '\n';
  }
  if (ex.kind == "multiplicative_gaussian") {
    auto ms = open_out(o, "mgf.csv");
    ms << "t,t_star,radius,integral\n";
    const double x0 = std::abs(ex.sa.x0[0]) > 0 ? std::abs(ex.sa.x0[0]) : 1.0;
    const double ts = mgf_critical_t(2, x0, ex.sa.schedule);
    for (double t : {0.5 * ts, 2 * ts}) {
      const auto r = truncated_mgf_divergence(t, {2, 3, 4, 5, 6, 8}, x0, ex.sa.schedule);
      for (std::size_t i = 0; i < r.radii.size(); ++i)
        ms << r.t << ',' << r.t_star << ',' << r.radii[i] << ',' << r.integrals[i] << '\n';
    }
  }
  std::cout << "tail: diagnostics for " << ens.checkpoints.size() << " checkpoints\n";
  return 0;
}

int rl_coverage(const Options& o, const char* expected_kind, const char* file,
                const std::vector<std::pair<std::string, double>>& checks) {
  auto ex = load(o);
  if (ex.kind != expected_kind) throw SpecError(0, std::string("this subcommand needs operator kind = ") + expected_kind);
  const auto ens = simulate(ex, o);
  bool ok = true;
  const auto rows = coverage_rows(ex, ens, ok);
  auto os = open_out(o, file);
  for (const auto& [name, value] : checks) os << "# " << name << " = " << value << '\n';
  write_summary_csv(os, rows);
  std::cout << expected_kind << ": " << (ok ? "all verdicts pass" : "at least one verdict fails") << '\n';
  return ok ? 0 : 1;
}

int cmd_rl_td(const Options& o) {
  const auto ex = load(o);
  if (ex.kind != "td") throw SpecError(0, "rl-td needs operator kind = td");
  const auto& td = dynamic_cast<const TdSampler&>(*ex.op);
  const auto& rep = td.report();
  const double row_sum = (rep.A_pi.rowwise().sum().array() - (1 - (1 - std::pow(rep.gamma, rep.n)) * rep.mu_pi.array()))
                             .abs()
                             .maxCoeff();
  return rl_coverage(o, "td", "rl_td.csv",
                     {{"mu_min", rep.mu_min},
                      {"A_pi_row_sum_error", row_sum},
                      {"nu_pi_min", rep.nu_pi.minCoeff()},
                      {"fixed_point_residual", rep.fixed_point_residual}});
}

int cmd_rl_q(const Options& o) {
  const auto ex = load(o);
  if (ex.kind != "q_learning") throw SpecError(0, "rl-q needs operator kind = q_learning");
  const auto& q = dynamic_cast<const QSampler&>(*ex.op);
  return rl_coverage(o, "q_learning", "rl_q.csv",
                     {{"rho_b", q.rho_b()}, {"gap", q.qstar().gap}, {"bellman_residual", q.qstar().residual}});
}

int cmd_rl_offpolicy(const Options& o) {
  const auto ex = load(o);
  if (ex.kind != "offpolicy_td") throw SpecError(0, "rl-offpolicy needs operator kind = offpolicy_td");
  const auto& op = dynamic_cast<const OffPolicyTdSampler&>(*ex.op);
  const auto h = hurwitz_check(op.report().A_bar);
  const auto lyap = lyapunov_contraction_norm(op.report().A_bar);
  const auto ens = simulate(ex, o);
  auto os = open_out(o, "rl_offpolicy.csv");
  os << "# spectral_abscissa = " << h.abscissa << '\n';
  os << "# zeta_star = " << lyap.zeta_star << '\n';
  os << "# zeta_used = " << op.config().zeta << '\n';
  os << "# projected_residual = " << op.report().projected_residual << '\n';
  os << "checkpoint,delta,quantile,ci_lo,ci_hi,median\n";
  std::vector<double> ks, qs;
  const double delta = ex.deltas.front();
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    const auto k = ens.checkpoints[c];
    if (k == 0) continue;
    const auto q = empirical_quantile(ens.err_y[c], 1 - delta);
    os << k << ',' << delta << ',' << q.value << ',' << q.ci_lo << ',' << q.ci_hi << ',' << median(ens.err_y[c]) << '\n';
    ks.push_back(static_cast<double>(k));
    qs.push_back(q.value);
  }
  const bool ok = h.hurwitz && op.report().projected_residual <= 1e-8;
  std::cout << "rl-offpolicy: hurwitz " << (h.hurwitz ? "yes" : "no") << ", zeta* " << lyap.zeta_star;
  if (ks.size() >= 2) std::cout << ", quantile log-log slope " << loglog_slope(ks, qs);
  std::cout << '\n';
  return ok ? 0 : 1;
}

struct Manifest {
  int failures = 0;
  void check(const std::string& anchor, const std::string& what, bool ok, const std::string& detail = {}) {
    std::cout << (ok ? "PASS " : "FAIL ") << '[' << anchor << "] " << what;
    if (!detail.empty()) std::cout << " (" << detail << ')';
    std::cout << '\n';
    if (!ok) ++failures;
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

int cmd_verify(const Options& o) {
  Manifest m;
  Rng rng(2024, 0);

  // Norms.
  {
    double worst = 0.0;
    for (double p : {2.0, 4.0, 8.0}) {
      const auto spec = NormSpec::weighted_p(p);
      for (int i = 0; i < 2000; ++i) {
        Vector x(5), y(5);
        rng.fill_normal(x);
        rng.fill_normal(y);
        worst = std::max(worst, gradient_lipschitz_ratio(spec, x, y) - (p - 1));
      }
    }
    m.check("grad_lipschitz", "gradient of half squared p-norm is (p-1)-Lipschitz", worst <= 1e-8, "excess " + fmt(worst));
  }
  {
    double worst = 0.0;
    for (const auto& spec : {NormSpec::euclidean(), NormSpec::max_norm(), NormSpec::weighted_p(4.0)}) {
      for (int i = 0; i < 500; ++i) {
        Vector x(6);
        rng.fill_normal(x);
        const auto e = equivalence_constants(spec, NormSpec::euclidean(), 6);
        const double r = norm(spec, x) / norm(NormSpec::euclidean(), x);
        worst = std::max(worst, std::max(e.lower - r, r - e.upper));
      }
    }
    m.check("norm_equivalence", "closed-form equivalence constants bracket sampled ratios", worst <= 1e-12);
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      Matrix A(4, 4);
      rng.fill_normal(A);
      A *= 0.9 / Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
      const double nu = estimate_nu(A, NormSpec::euclidean()).value;
      worst = std::max(worst, (1 - 0.9) - nu);
    }
    m.check("contraction_nu", "sigma_min(A - I) >= 1 - ||A|| for contractive A", worst <= 1e-12);
  }

  // MDP identities.
  {
    double row = 0.0, nu_gap = 1.0, resid = 0.0, balance = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto mdp = random_mdp(4, 2, 0.9, seed);
      const auto pi = random_policy(4, 2, seed);
      for (int n : {1, 3}) {
        const auto rep = td_operator_report(mdp, pi, n, 2.0);
        const double gn = std::pow(0.9, n);
        row = std::max(row, (rep.A_pi.rowwise().sum().array() - (1 - (1 - gn) * rep.mu_pi.array())).abs().maxCoeff());
        nu_gap = std::min(nu_gap, rep.nu_pi.minCoeff() - (1 - gn) * rep.mu_min / 4);
        resid = std::max(resid, rep.fixed_point_residual);
        const Matrix Pp = policy_transition(mdp, pi);
        balance = std::max(balance, (rep.mu_pi.transpose() * Pp - rep.mu_pi.transpose()).cwiseAbs().maxCoeff());
      }
    }
    m.check("stationary_balance", "mu^pi P^pi = mu^pi", balance <= 1e-12, fmt(balance));
    m.check("A_pi_sum", "row sums of A^pi equal 1 - (1 - gamma^n) mu(s)", row <= 1e-12, fmt(row));
    m.check("nu_pi_lower", "nu^pi(s) >= (1 - gamma^n) mu_min / |S|", nu_gap >= 0, fmt(nu_gap));
    m.check("td_fixed_point", "V^pi solves A^pi V + b^pi = V", resid <= 1e-10, fmt(resid));
  }
  {
    const auto mdp = random_mdp(4, 3, 0.8, 3);
    const auto q = exact_qstar(mdp, 1e-12, std::nullopt);
    m.check("qstar_residual", "Q* Bellman residual <= 1e-9", q.residual <= 1e-9, fmt(q.residual));
  }
  {
    const auto mdp = random_mdp(5, 2, 0.9, 7);
    LfaConfig cfg;
    cfg.pi = random_policy(5, 2, 7);
    cfg.pi_b = 0.8 * cfg.pi + 0.2 * uniform_policy(5, 2);
    cfg.Phi = Matrix::Identity(5, 5);
    cfg.n = 10;
    const auto rep = offpolicy_report(mdp, cfg);
    m.check("offpolicy_hurwitz", "off-policy A_bar is Hurwitz", hurwitz_check(rep.A_bar).hurwitz);
    m.check("projected_fixed_point", "projected n-step Bellman residual <= 1e-8", rep.projected_residual <= 1e-8,
            fmt(rep.projected_residual));
  }

  // Operators.
  {
    auto op = make_random_contractive(4, 0.5, 1.0, 5);
    const Vector xs = op->fixed_point();
    const double r = (op->mean(xs) - xs).cwiseAbs().maxCoeff();
    m.check("linear_fixed_point", "linear-additive x* solves A x + b = x", r <= 1e-12, fmt(r));
  }

  if (!o.mdp.empty()) {
    try {
      const auto mdp = load_mdp(o.mdp);
      m.check("mdp_file", "MDP file " + o.mdp + " is well formed", true);
    } catch (const MalformedMdp& e) {
      m.check("mdp_file", "MDP file " + o.mdp + " is well formed", false, e.what());
    }
  }
  std::cout << (m.failures == 0 ? "verify: all invariants pass\n" : "verify: " + std::to_string(m.failures) + " failures\n");
  return m.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salab: stochastic approximation with averaging, bounds and Monte Carlo checks"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool spec_required) {
    auto* opt = sub->add_option("--spec", o.spec, "experiment spec file");
    if (spec_required) opt->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--reps", o.reps, "override the number of replications");
    sub->add_option("--seed", o.seed, "override the base seed");
    sub->add_option("--parallel", o.parallel, "worker threads (output does not depend on it)");
  };

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Cmd cmds[] = {
      {"simulate", "run the ensemble and write ensemble.csv", cmd_simulate},
      {"bound", "tabulate the bound calculator over ks x deltas", cmd_bound},
      {"coverage", "test the selected bound against the ensemble", cmd_coverage},
      {"tightness", "compare pair-Gaussian quantiles with the exact value", cmd_tightness},
      {"tail", "tail diagnostics per checkpoint", cmd_tail},
      {"rl-td", "TD(n) identities and bound coverage", cmd_rl_td},
      {"rl-q", "Q-learning checks and bound coverage", cmd_rl_q},
      {"rl-offpolicy", "off-policy TD with linear features", cmd_rl_offpolicy},
  };
  int (*chosen)(const Options&) = nullptr;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, true);
    sub->callback([&chosen, fn = c.fn] { chosen = fn; });
  }
  auto* verify = app.add_subcommand("verify", "run the invariant suite and print a manifest");
  verify->add_option("--mdp", o.mdp, "also validate this MDP file");
  verify->callback([&chosen] { chosen = cmd_verify; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return chosen(o);
  } catch (const SpecError& e) {
    std::cerr << "spec error: " << (o.spec.empty() ? "" : o.spec + ": ") << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
