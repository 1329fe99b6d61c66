#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "salab/bounds.hpp"
#include "salab/mdp.hpp"
#include "salab/montecarlo.hpp"
#include "salab/sa.hpp"

namespace salab {

// Flat key = value text with [section] headers and '#' comments. Every value
// remembers its line so validation errors can point at it.
class SpecFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static SpecFile parse(std::istream& is);
  static SpecFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  int line_of(const std::string& section, const std::string& key) const;
  int section_line(const std::string& section) const;

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::string text(const std::string& section, const std::string& key) const;  // required
  double number(const std::string& section, const std::string& key, double fallback) const;
  double number(const std::string& section, const std::string& key) const;
  std::optional<double> maybe_number(const std::string& section, const std::string& key) const;
  std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  // Rows separated by ';'.
  Matrix matrix(const std::string& section, const std::string& key) const;

  // Throws SpecError on the first entry never read.
  void reject_unused() const;

 private:
  std::map<std::string, std::map<std::string, Entry>> entries_;
  std::map<std::string, int> section_lines_;
};

// A fully resolved experiment: operator, run configuration and bound source.
struct Experiment {
  std::string kind;
  OperatorPtr op;
  std::shared_ptr<const TabularMdp> mdp;
  SaConfig sa;
  std::int64_t n_reps = 1000;
  std::uint64_t base_seed = 1;
  bool acknowledge_warning = false;

  std::string bound_kind = "combined";
  BoundParams params;
  std::string envelope_kind = "constant";
  std::optional<AdditiveNoiseConfig> additive;
  std::optional<MultiplicativeConfig> multiplicative;
  double envelope_value = 0.0;
  std::vector<double> deltas{0.05};
  std::vector<std::int64_t> ks;
  double slack = 1.0;
  // Sub-Weibull template c0 log(1/delta)^m; c0 calibrated at fit_delta when absent.
  std::optional<double> subweibull_c0;
  double subweibull_m = 1.0;
  double fit_delta = 0.1;

  TailEnvelope envelope() const;
  // Bound on ||y_k - x*||^2 under the selected kind. Needs the ensemble only
  // for the calibrated sub-Weibull template.
  BoundFn bound_fn(const ErrorEnsemble* ens = nullptr) const;
};

// Throws SpecError with the offending line on any validation failure,
// including a schedule below the additive-envelope threshold on h unless
// acknowledge_warning is set.
Experiment build_experiment(const SpecFile& spec, const std::string& base_dir = ".");
Experiment load_experiment(const std::string& path);

}  // namespace salab
