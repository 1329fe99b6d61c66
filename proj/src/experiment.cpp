#include "salab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "salab/errors.hpp"
#include "salab/norms.hpp"

namespace salab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, int line, const std::string& key) {
  std::istringstream ss(text);
  double v;
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (!(ss >> v) || !(ss >> std::ws).eof()) throw SpecError(line, key + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<double> parse_numbers(const std::string& text, int line, const std::string& key) {
  std::istringstream ss(text);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_number(tok, line, key));
  return out;
}

}  // namespace

SpecFile SpecFile::parse(std::istream& is) {
  SpecFile f;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SpecError(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw SpecError(lineno, "empty section name");
      if (f.section_lines_.count(section)) throw SpecError(lineno, "duplicate section [" + section + "]");
      f.section_lines_[section] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecError(lineno, "expected 'key = value'");
    if (section.empty()) throw SpecError(lineno, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw SpecError(lineno, "missing key");
    auto& sec = f.entries_[section];
    if (sec.count(key)) throw SpecError(lineno, "duplicate key '" + key + "'");
    sec[key] = Entry{value, lineno, false};
  }
  return f;
}

SpecFile SpecFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(0, "cannot open spec file " + path);
  return parse(in);
}

const SpecFile::Entry* SpecFile::find(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return nullptr;
  const auto e = s->second.find(key);
  if (e == s->second.end()) return nullptr;
  e->second.used = true;
  return &e->second;
}

bool SpecFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

int SpecFile::line_of(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  return e ? e->line : section_line(section);
}

int SpecFile::section_line(const std::string& section) const {
  const auto it = section_lines_.find(section);
  return it == section_lines_.end() ? 0 : it->second;
}

std::string SpecFile::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  const auto* e = find(section, key);
  return e ? e->value : fallback;
}

std::string SpecFile::text(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) throw SpecError(section_line(section), "missing required key [" + section + "] " + key);
  return e->value;
}

double SpecFile::number(const std::string& section, const std::string& key, double fallback) const {
  const auto* e = find(section, key);
  return e ? parse_number(e->value, e->line, key) : fallback;
}

double SpecFile::number(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) throw SpecError(section_line(section), "missing required key [" + section + "] " + key);
  return parse_number(e->value, e->line, key);
}

std::optional<double> SpecFile::maybe_number(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) return std::nullopt;
  return parse_number(e->value, e->line, key);
}

std::int64_t SpecFile::integer(const std::string& section, const std::string& key, std::int64_t fallback) const {
  const auto* e = find(section, key);
  if (!e) return fallback;
  const double v = parse_number(e->value, e->line, key);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw SpecError(e->line, key + ": expected an integer");
  return static_cast<std::int64_t>(v);
}

bool SpecFile::flag(const std::string& section, const std::string& key, bool fallback) const {
  const auto* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
  if (e->value == "false" || e->value == "no" || e->value == "0") return false;
  throw SpecError(e->line, key + ": expected true or false");
}

std::vector<double> SpecFile::numbers(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) throw SpecError(section_line(section), "missing required key [" + section + "] " + key);
  return parse_numbers(e->value, e->line, key);
}

Matrix SpecFile::matrix(const std::string& section, const std::string& key) const {
  const auto* e = find(section, key);
  if (!e) throw SpecError(section_line(section), "missing required key [" + section + "] " + key);
  std::vector<std::vector<double>> rows;
  std::istringstream ss(e->value);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_numbers(row, e->line, key));
  if (rows.empty() || rows.front().empty()) throw SpecError(e->line, key + ": empty matrix");
  Matrix M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw SpecError(e->line, key + ": ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  }
  return M;
}

void SpecFile::reject_unused() const {
  for (const auto& [section, keys] : entries_)
    for (const auto& [key, entry] : keys)
      if (!entry.used) throw SpecError(entry.line, "unknown key [" + section + "] " + key);
}

namespace {

std::uint64_t suffix_seed(const std::string& text, const std::string& prefix, int line) {
  try {
    return std::stoull(text.substr(prefix.size()));
  } catch (const std::exception&) {
    throw SpecError(line, "bad seed in '" + text + "'");
  }
}

Policy parse_policy(const SpecFile& f, const std::string& key, const TabularMdp& mdp, const Policy* target) {
  const std::string t = f.text("operator", key, "uniform");
  const int line = f.line_of("operator", key);
  const auto U = uniform_policy(mdp.n_states(), mdp.n_actions());
  if (t == "uniform") return U;
  if (t.rfind("random:", 0) == 0) return random_policy(mdp.n_states(), mdp.n_actions(), suffix_seed(t, "random:", line));
  if (t.rfind("mix:", 0) == 0) {
    if (!target) throw SpecError(line, "mix: behavior needs a target policy");
    const double eps = parse_number(t.substr(4), line, key);
    if (!(eps >= 0 && eps <= 1)) throw SpecError(line, "mix weight must lie in [0, 1]");
    return (1 - eps) * *target + eps * U;
  }
  throw SpecError(line, "unknown policy '" + t + "'");
}

std::shared_ptr<const TabularMdp> parse_mdp(const SpecFile& f, const std::string& base_dir) {
  if (f.has("operator", "mdp")) {
    auto path = std::filesystem::path(f.text("operator", "mdp"));
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    try {
      return std::make_shared<TabularMdp>(load_mdp(path.string()));
    } catch (const MalformedMdp& e) {
      throw SpecError(f.line_of("operator", "mdp"), std::string(e.what()) + " in " + path.string());
    }
  }
  const auto S = f.integer("operator", "states", 4);
  const auto A = f.integer("operator", "actions", 2);
  const double gamma = f.number("operator", "gamma", 0.9);
  const auto seed = f.integer("operator", "mdp_seed", 1);
  const double r_max = f.number("operator", "r_max", 1.0);
  try {
    return std::make_shared<TabularMdp>(random_mdp(static_cast<int>(S), static_cast<int>(A), gamma,
                                                   static_cast<std::uint64_t>(seed), r_max));
  } catch (const Error& e) {
    throw SpecError(f.section_line("operator"), e.what());
  }
}

Matrix parse_features(const SpecFile& f, int n_states) {
  const std::string t = f.text("operator", "features", "identity");
  const int line = f.line_of("operator", "features");
  if (t == "identity") return Matrix::Identity(n_states, n_states);
  if (t.rfind("random:", 0) == 0) {
    const auto rest = t.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw SpecError(line, "features: expected random:<d>:<seed>");
    const int d = static_cast<int>(parse_number(rest.substr(0, colon), line, "features"));
    const auto seed = static_cast<std::uint64_t>(parse_number(rest.substr(colon + 1), line, "features"));
    if (d < 1 || d > n_states) throw SpecError(line, "features: d must lie in [1, |S|]");
    Rng rng(seed, 2);
    Matrix Phi(n_states, d);
    rng.fill_normal(Phi);
    return Phi;
  }
  return f.matrix("operator", "features");
}

NormSpec parse_norm(const SpecFile& f, const std::string& fallback) {
  const std::string t = f.text("run", "norm", fallback);
  const int line = f.line_of("run", "norm");
  if (t == "euclidean") return NormSpec::euclidean();
  if (t == "max") return NormSpec::max_norm();
  if (t.rfind("p:", 0) == 0) {
    const double p = parse_number(t.substr(2), line, "norm");
    if (!(p >= 2)) throw SpecError(line, "norm: p must be at least 2");
    return NormSpec::weighted_p(p);
  }
  throw SpecError(line, "unknown norm '" + t + "'");
}

}  // namespace

Experiment build_experiment(const SpecFile& f, const std::string& base_dir) {
  Experiment ex;
  ex.kind = f.text("operator", "kind");
  const int kind_line = f.line_of("operator", "kind");
  std::string default_norm = "euclidean";

  try {
    if (ex.kind == "pair_gaussian") {
      const auto dim = f.integer("operator", "dim", 2);
      if (dim < 2 || dim % 2 != 0)
        throw SpecError(f.line_of("operator", "dim"), "pair_gaussian needs an even dimension of at least 2");
      const double sb = f.number("operator", "sigma_bar", 1.0);
      if (!(sb > 0)) throw SpecError(f.line_of("operator", "sigma_bar"), "sigma_bar must be positive");
      ex.op = make_pair_gaussian_example(dim, sb);
    } else if (ex.kind == "linear_additive") {
      Matrix A = f.matrix("operator", "A");
      const auto bv = f.numbers("operator", "b");
      if (bv.size() != static_cast<std::size_t>(A.rows()))
        throw SpecError(f.line_of("operator", "b"), "b must have one entry per row of A");
      Vector b = Eigen::Map<const Vector>(bv.data(), A.rows());
      const double s = f.number("operator", "noise_scale", 1.0);
      Matrix cov = f.has("operator", "noise_cov") ? f.matrix("operator", "noise_cov")
                                                 : Matrix(s * s * Matrix::Identity(A.rows(), A.rows()));
      ex.op = make_linear_additive(std::move(A), std::move(b), cov);
    } else if (ex.kind == "random_contractive") {
      ex.op = make_random_contractive(f.integer("operator", "dim", 4), f.number("operator", "gamma_c", 0.5),
                                      f.number("operator", "noise_scale", 1.0),
                                      static_cast<std::uint64_t>(f.integer("operator", "seed", 1)));
    } else if (ex.kind == "multiplicative_gaussian") {
      ex.op = make_multiplicative_gaussian();
    } else if (ex.kind == "two_point") {
      ex.op = make_two_point_multiplicative(f.number("operator", "a", 0.5),
                                            static_cast<int>(f.integer("operator", "N", 3)));
    } else if (ex.kind == "td" || ex.kind == "q_learning" || ex.kind == "offpolicy_td") {
      ex.mdp = parse_mdp(f, base_dir);
      const int n = static_cast<int>(f.integer("operator", "n", ex.kind == "offpolicy_td" ? 10 : 1));
      if (ex.kind == "td") {
        ex.op = std::make_shared<TdSampler>(ex.mdp, parse_policy(f, "policy", *ex.mdp, nullptr), n);
        default_norm = "max";
      } else if (ex.kind == "q_learning") {
        ex.op = std::make_shared<QSampler>(ex.mdp, parse_policy(f, "behavior", *ex.mdp, nullptr));
        default_norm = "max";
      } else {
        LfaConfig cfg;
        cfg.pi = parse_policy(f, "policy", *ex.mdp, nullptr);
        cfg.pi_b = parse_policy(f, "behavior", *ex.mdp, &cfg.pi);
        cfg.Phi = parse_features(f, ex.mdp->n_states());
        cfg.n = n;
        const std::string z = f.text("operator", "zeta", "auto");
        if (z == "auto") {
          cfg.zeta = 1.0;
          cfg.zeta = lyapunov_contraction_norm(offpolicy_report(*ex.mdp, cfg).A_bar).zeta_star;
        } else {
          cfg.zeta = parse_number(z, f.line_of("operator", "zeta"), "zeta");
        }
        ex.op = std::make_shared<OffPolicyTdSampler>(ex.mdp, cfg);
      }
    } else {
      throw SpecError(kind_line, "unknown operator kind '" + ex.kind + "'");
    }
  } catch (const SpecError&) {
    throw;
  } catch (const Error& e) {
    throw SpecError(kind_line, e.what());
  }

  const Eigen::Index d = ex.op->dim();
  const Vector x_star = ex.op->fixed_point();

  // Schedule.
  const double alpha = f.number("schedule", "alpha", 1.0);
  const double h = f.number("schedule", "h", 2.0);
  const double xi = f.number("schedule", "xi", 0.0);
  auto sched_line = [&](const char* key) { return f.line_of("schedule", key); };
  if (!(alpha > 0)) throw SpecError(sched_line("alpha"), "alpha must be positive");
  if (!(h > 1)) throw SpecError(sched_line("h"), "h must exceed 1");
  if (!(xi >= 0 && xi < 1)) throw SpecError(sched_line("xi"), "xi must lie in [0, 1)");
  ex.sa.schedule = StepSchedule(alpha, h, xi);

  // Run.
  const std::string x0 = f.text("run", "x0", "zeros");
  const int x0_line = f.line_of("run", "x0");
  if (x0 == "zeros") {
    ex.sa.x0 = Vector::Zero(d);
  } else if (x0 == "fixed_point") {
    ex.sa.x0 = x_star;
  } else if (x0 == "ones") {
    ex.sa.x0 = Vector::Ones(d);
  } else if (x0.rfind("offset:", 0) == 0) {
    ex.sa.x0 = x_star + Vector::Constant(d, parse_number(x0.substr(7), x0_line, "x0"));
  } else {
    const auto v = parse_numbers(x0, x0_line, "x0");
    if (v.size() != static_cast<std::size_t>(d)) throw SpecError(x0_line, "x0 must have " + std::to_string(d) + " entries");
    ex.sa.x0 = Eigen::Map<const Vector>(v.data(), d);
  }
  ex.sa.horizon = f.integer("run", "horizon", 1000);
  if (ex.sa.horizon < 1) throw SpecError(f.line_of("run", "horizon"), "horizon must be positive");
  const std::string cps = f.text("run", "checkpoints", "geometric:2");
  const int cp_line = f.line_of("run", "checkpoints");
  if (cps.rfind("geometric:", 0) == 0) {
    const double r = parse_number(cps.substr(10), cp_line, "checkpoints");
    if (!(r > 1)) throw SpecError(cp_line, "geometric ratio must exceed 1");
    ex.sa.checkpoints = geometric_checkpoints(ex.sa.horizon, r);
  } else {
    for (double v : parse_numbers(cps, cp_line, "checkpoints")) {
      if (v < 0 || v > static_cast<double>(ex.sa.horizon) || v != std::floor(v))
        throw SpecError(cp_line, "checkpoints must be integers in [0, horizon]");
      ex.sa.checkpoints.push_back(static_cast<std::int64_t>(v));
    }
  }
  ex.sa.norm = parse_norm(f, default_norm);
  ex.n_reps = f.integer("run", "reps", 1000);
  if (ex.n_reps < 1) throw SpecError(f.line_of("run", "reps"), "reps must be positive");
  ex.base_seed = static_cast<std::uint64_t>(f.integer("run", "seed", 1));
  ex.acknowledge_warning = f.flag("run", "acknowledge_warning", false);

  // Bound.
  const auto rep = ex.op->assumptions();
  ex.bound_kind = f.text("bound", "kind", "combined");
  const int bound_line = f.line_of("bound", "kind");
  static const std::vector<std::string> kinds{"combined", "main",     "crude",      "infinite",  "zero",
                                              "exact_quantile", "subweibull", "td_plugin", "q_plugin"};
  if (std::find(kinds.begin(), kinds.end(), ex.bound_kind) == kinds.end())
    throw SpecError(bound_line, "unknown bound kind '" + ex.bound_kind + "'");
  if (ex.bound_kind == "exact_quantile" && ex.kind != "pair_gaussian")
    throw SpecError(bound_line, "exact_quantile needs the pair_gaussian operator");
  if (ex.bound_kind == "td_plugin" && ex.kind != "td") throw SpecError(bound_line, "td_plugin needs kind = td");
  if (ex.bound_kind == "q_plugin" && ex.kind != "q_learning")
    throw SpecError(bound_line, "q_plugin needs kind = q_learning");

  auto& p = ex.params;
  auto pick = [&](const char* key, const std::optional<double>& known, double fallback) {
    if (auto v = f.maybe_number("bound", key)) return *v;
    return known.value_or(fallback);
  };
  p.nu = pick("nu", rep.nu, 1.0);
  p.M = pick("M", rep.M, 1.0);
  p.N = pick("N", rep.N, 0.0);
  p.R = pick("R", rep.R, std::numeric_limits<double>::infinity());
  p.sigma_bar_sq = pick("sigma_bar_sq", rep.sigma_bar_sq, 1.0);
  p.sigma_hat_sq = pick("sigma_hat_sq", rep.sigma_hat_sq, 0.0);
  p.u_c2 = pick("u_c2", std::nullopt, equivalence_constants(ex.sa.norm, NormSpec::euclidean(), d).upper);
  p.d = pick("d", std::nullopt, static_cast<double>(d));
  p.schedule = ex.sa.schedule;
  const std::string ue = f.text("bound", "u_exponent", "4");
  if (ue == "4") p.u_exponent = UExponent::four;
  else if (ue == "2") p.u_exponent = UExponent::two;
  else throw SpecError(f.line_of("bound", "u_exponent"), "u_exponent must be 2 or 4");
  const bool uses_params = ex.bound_kind == "combined" || ex.bound_kind == "main" || ex.bound_kind == "crude";
  if (uses_params) {
    try {
      p.validate();
    } catch (const InvalidArgument& e) {
      throw SpecError(f.section_line("bound"), e.what());
    }
  }

  ex.envelope_kind = f.text("bound", "envelope", "constant");
  const int env_line = f.line_of("bound", "envelope");
  const double x0_err_sq = squared_norm(ex.sa.norm, ex.sa.x0 - x_star);
  if (ex.envelope_kind == "additive") {
    const auto gamma_c = rep.gamma_c ? std::optional<double>(*rep.gamma_c) : std::nullopt;
    auto cfg = AdditiveNoiseConfig::same_smoothing_norm(
        f.number("bound", "sigma_sq", p.sigma_bar_sq), pick("gamma_c", gamma_c, 0.5), f.number("bound", "mu", 1.0),
        f.number("bound", "c_d", static_cast<double>(d)), f.number("bound", "x0_err_sq", x0_err_sq),
        f.number("bound", "L", p.M));
    AdditiveConstants kc;
    try {
      kc = additive_constants(cfg, ex.sa.schedule);
    } catch (const Error& e) {
      throw SpecError(env_line, e.what());
    }
    if (!kc.threshold_met && !ex.acknowledge_warning) {
      std::ostringstream msg;
      msg << "h = " << ex.sa.schedule.h() << " is below the envelope threshold " << kc.h_threshold
          << "; raise h or set acknowledge_warning = true";
      throw SpecError(f.line_of("schedule", "h"), msg.str());
    }
    ex.additive = cfg;
  } else if (ex.envelope_kind == "multiplicative") {
    MultiplicativeConfig m;
    m.beta1 = f.number("bound", "beta1", 1.0);
    m.beta2 = f.number("bound", "beta2", 1.0);
    m.beta3 = f.number("bound", "beta3", 1.0);
    m.beta4 = f.number("bound", "beta4", 1.0);
    m.u0 = f.number("bound", "u0", x0_err_sq);
    if (!multiplicative_h_ok(m, ex.sa.schedule) && !ex.acknowledge_warning)
      throw SpecError(f.line_of("schedule", "h"),
                      "h is too small for the multiplicative envelope; raise h or set acknowledge_warning = true");
    ex.multiplicative = m;
  } else if (ex.envelope_kind == "constant") {
    ex.envelope_value = f.number("bound", "envelope_value", 1.0);
  } else {
    throw SpecError(env_line, "unknown envelope '" + ex.envelope_kind + "'");
  }

  if (f.has("bound", "deltas")) {
    ex.deltas = f.numbers("bound", "deltas");
    for (double dl : ex.deltas)
      if (!(dl > 0 && dl < 1)) throw SpecError(f.line_of("bound", "deltas"), "deltas must lie in (0, 1)");
  }
  if (f.has("bound", "ks")) {
    for (double k : f.numbers("bound", "ks")) {
      if (k < 1 || k != std::floor(k)) throw SpecError(f.line_of("bound", "ks"), "ks must be positive integers");
      ex.ks.push_back(static_cast<std::int64_t>(k));
    }
  } else {
    for (auto k : ex.sa.checkpoints)
      if (k >= 1) ex.ks.push_back(k);
  }
  ex.slack = f.number("bound", "slack", 1.0);
  ex.subweibull_c0 = f.maybe_number("bound", "c0");
  ex.subweibull_m = f.number("bound", "m", 1.0);
  ex.fit_delta = f.number("bound", "fit_delta", 0.1);

  f.reject_unused();
  return ex;
}

Experiment load_experiment(const std::string& path) {
  const auto spec = SpecFile::load(path);
  return build_experiment(spec, std::filesystem::path(path).parent_path().string());
}

TailEnvelope Experiment::envelope() const {
  if (additive) return additive_envelope(*additive, sa.schedule);
  if (multiplicative) return multiplicative_envelope(*multiplicative, sa.schedule);
  return TailEnvelope::constant(envelope_value);
}

BoundFn Experiment::bound_fn(const ErrorEnsemble* ens) const {
  if (bound_kind == "infinite") return [](std::int64_t, double) { return std::numeric_limits<double>::infinity(); };
  if (bound_kind == "zero") return [](std::int64_t, double) { return 0.0; };
  if (bound_kind == "exact_quantile") {
    const double s = std::sqrt(*op->assumptions().sigma_bar_sq);
    return [s](std::int64_t k, double delta) {
      const double q = pair_gaussian_exact_quantile(s, k, delta);
      return q * q;
    };
  }
  if (bound_kind == "subweibull") {
    const double m = subweibull_m;
    if (subweibull_c0) {
      const double c0 = *subweibull_c0;
      return [c0, m](std::int64_t, double delta) { return c0 * std::pow(std::log(1 / delta), m); };
    }
    if (!ens) throw InvalidArgument("calibrating the sub-Weibull template needs an ensemble");
    const double fd = fit_delta;
    return [ens, m, fd](std::int64_t k, double delta) {
      const double q = empirical_quantile(ens->y_at(k), 1 - fd).value;
      return q / std::pow(std::log(1 / fd), m) * std::pow(std::log(1 / delta), m);
    };
  }
  if (bound_kind == "td_plugin") {
    auto td = std::dynamic_pointer_cast<const TdSampler>(op);
    const auto s = sa.schedule;
    const Vector x0 = sa.x0;
    return [td, s, x0](std::int64_t k, double delta) { return td_plugin_bound(*td, s, x0, delta, k).bound; };
  }
  if (bound_kind == "q_plugin") {
    auto q = std::dynamic_pointer_cast<const QSampler>(op);
    const auto s = sa.schedule;
    const Vector x0 = sa.x0;
    return [q, s, x0](std::int64_t k, double delta) { return q_plugin_bound(*q, s, x0, delta, k).bound; };
  }
  const auto f = envelope();
  const auto p = params;
  if (bound_kind == "main") return [p, f](std::int64_t k, double delta) { return main_bound(p, f, delta, k); };
  if (bound_kind == "crude") return [p, f](std::int64_t k, double delta) { return crude_bound(p, f, delta, k); };
  return [p, f](std::int64_t k, double delta) { return combined_bound(p, f, delta, k); };
}

}  // namespace salab
