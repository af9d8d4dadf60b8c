#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakpairs/verify.hpp"

namespace weakpairs {

/// One named statistic of a verification check.
struct CheckStat {
  std::string name;
  double value = 0.0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // human-readable summary, lists failures if any
  std::vector<CheckStat> stats;
};

/// Knobs of the statistical verification suite. The defaults are the
/// pinned acceptance values; smaller settings are for smoke runs only.
struct VerifySuiteConfig {
  std::uint64_t seed = 1;
  std::size_t calibration_datasets = 100;
  std::size_t unbias_pairs = 200;
  std::size_t unbias_reps = 2000;
  std::size_t var_pairs = 200;
  std::size_t var_reps = 2000;
  std::size_t bias_reps = 2000;
  std::size_t weak_label_pairs = 100000;
  std::size_t oracle_samples = 400000;
  double threshold = 4.0;

  /// Canonical 2-D Gaussian task at the given prior.
  GeneratorConfig task(double pi_plus) const {
    GeneratorConfig g;
    g.pi_plus = pi_plus;
    return g;
  }
};

/// Registered check names, in execution order for "all".
std::vector<std::string> verify_check_names();

/// Runs one named check; throws InvalidSpec for unknown names.
CheckResult run_check(const std::string& name, const VerifySuiteConfig& cfg);

std::vector<CheckResult> run_all_checks(const VerifySuiteConfig& cfg);

}  // namespace weakpairs
