#include "weakpairs/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "weakpairs/summation.hpp"
#include "weakpairs/weak_labels.hpp"

namespace weakpairs {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double sample_stderr(const std::vector<double>& values, double mean) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

PairScores score_pairs(const MlpModel& model, const PairDataset& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<double> flat(2 * n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(data[i].x.begin(), data[i].x.end(), flat.begin() + i * d);
    std::copy(data[i].x_prime.begin(), data[i].x_prime.end(),
              flat.begin() + (n + i) * d);
  }
  const std::vector<double> scores = model.forward(flat.data(), 2 * n);
  PairScores out;
  out.x.assign(scores.begin(), scores.begin() + n);
  out.x_prime.assign(scores.begin() + n, scores.end());
  return out;
}

// --- calibration --------------------------------------------------------

// Constant-loss calibration. The Sconf/ConfDiff/Convex coefficient sums
// telescope to 1 for arbitrary (s, c); the SCD-family sums depend on the
// sample means of s and c, so those datasets are drawn with s fixed at
// pi+^2 + pi-^2 (and, for lambda != 1/2, c in cancelling +-a pairs), the
// regime in which the estimator equals the constant exactly.
CheckResult check_calibration(const VerifySuiteConfig& cfg) {
  Rng rng(Rng::derive(cfg.seed, 1));
  double max_residual = 0.0;
  auto track = [&max_residual](double risk, double k) {
    max_residual = std::max(max_residual, std::fabs(risk - k));
  };

  for (std::size_t t = 0; t < cfg.calibration_datasets; ++t) {
    const std::size_t n = 2 * (1 + rng.index(20));  // even, 2..40
    double pi = rng.uniform(0.05, 0.45);
    if (rng.uniform() < 0.5) pi = 1.0 - pi;
    const ClassPrior prior(pi);
    const double k = rng.uniform(0.1, 5.0);
    const LossFn constant_loss(
        std::function<double(double, int)>([k](double, int) { return k; }));

    PairScores scores;
    scores.x.resize(n);
    scores.x_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores.x[i] = rng.uniform(-3.0, 3.0);
      scores.x_prime[i] = rng.uniform(-3.0, 3.0);
    }
    const SlotLosses slots = compute_slot_losses(constant_loss, scores);

    std::vector<double> s_rand(n), c_rand(n);
    for (std::size_t i = 0; i < n; ++i) {
      s_rand[i] = rng.uniform();
      c_rand[i] = rng.uniform(-1.0, 1.0);
    }

    EstimatorSpec spec;
    spec.kind = EstimatorKind::Sconf;
    track(risk_from_slots(s_rand, c_rand, prior, spec, slots), k);
    spec.kind = EstimatorKind::ConfDiff;
    track(risk_from_slots(s_rand, c_rand, prior, spec, slots), k);
    spec.kind = EstimatorKind::Convex;
    for (double gamma : {0.0, 1.0, rng.uniform()}) {
      spec.gamma = gamma;
      track(risk_from_slots(s_rand, c_rand, prior, spec, slots), k);
    }

    const double pim = prior.pi_minus();
    const double s_fixed = pi * pi + pim * pim;
    std::vector<double> s_const(n, s_fixed), c_pairs(n);
    const double c_bound = std::min(1.0, 2.0 * pi * pim);
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      const double a = rng.uniform(0.0, c_bound);
      c_pairs[i] = a;
      c_pairs[i + 1] = -a;
    }
    spec.kind = EstimatorKind::Scd;
    track(risk_from_slots(s_const, c_rand, prior, spec, slots), k);
    spec.kind = EstimatorKind::ScdLambda;
    for (double lambda : {0.0, rng.uniform(), 1.0}) {
      spec.lambda = lambda;
      track(risk_from_slots(s_const, c_pairs, prior, spec, slots), k);
    }
  }

  CheckResult result;
  result.name = "calibration";
  result.pass = max_residual <= 1e-12;
  result.detail = "max |risk - k| = " + fmt(max_residual) +
                  " over " + std::to_string(cfg.calibration_datasets) +
                  " random datasets (tolerance 1e-12)";
  result.stats.push_back({"max_residual", max_residual});
  result.stats.push_back({"tolerance", 1e-12});
  return result;
}

// --- weak-labels --------------------------------------------------------

CheckResult check_weak_labels(const VerifySuiteConfig& cfg) {
  const GeneratorConfig task = cfg.task(0.2);
  TaskGenerator gen(task, Rng::derive(cfg.seed, 2));
  const AnnotatedPairs annotated =
      gen.annotate_pairs_exact(cfg.weak_label_pairs);

  const auto s = annotated.pairs.s_values();
  const auto c = annotated.pairs.c_values();
  const double mean_s = pairwise_mean(s);
  const double mean_c = pairwise_mean(c);
  const double se_s = sample_stderr(s, mean_s);
  const double se_c = sample_stderr(c, mean_c);
  const double expected =
      task.pi_plus * task.pi_plus + (1.0 - task.pi_plus) * (1.0 - task.pi_plus);
  const double z_s = se_s > 0.0 ? (mean_s - expected) / se_s : 0.0;
  const double z_c = se_c > 0.0 ? mean_c / se_c : 0.0;

  std::size_t feasible = 0;
  for (const WeakPair& pair : annotated.pairs.pairs())
    if (feasible_region_check(pair.s, pair.c)) ++feasible;
  const double feasible_fraction =
      static_cast<double>(feasible) / static_cast<double>(s.size());

  CheckResult result;
  result.name = "weak-labels";
  result.pass = std::fabs(z_s) <= cfg.threshold &&
                std::fabs(z_c) <= cfg.threshold && feasible_fraction == 1.0;
  result.detail = "mean s = " + fmt(mean_s) + " vs " + fmt(expected) +
                  " (z = " + fmt(z_s) + "), mean c z = " + fmt(z_c) +
                  ", feasible fraction = " + fmt(feasible_fraction);
  result.stats.push_back({"mean_s", mean_s});
  result.stats.push_back({"expected_mean_s", expected});
  result.stats.push_back({"z_mean_s", z_s});
  result.stats.push_back({"z_mean_c", z_c});
  result.stats.push_back({"feasible_fraction", feasible_fraction});
  return result;
}

// --- unbiasedness -------------------------------------------------------

struct Combo {
  std::string label;
  EstimatorSpec spec;
};

std::vector<Combo> unbiased_combos(bool include_prior_sensitive) {
  std::vector<Combo> combos;
  EstimatorSpec spec;
  if (include_prior_sensitive) {
    spec.kind = EstimatorKind::Sconf;
    combos.push_back({"Sconf", spec});
  }
  spec.kind = EstimatorKind::ConfDiff;
  combos.push_back({"ConfDiff", spec});
  if (include_prior_sensitive) {
    spec.kind = EstimatorKind::Convex;
    spec.gamma = 0.5;
    combos.push_back({"Convex(0.5)", spec});
  }
  spec = EstimatorSpec{};
  spec.kind = EstimatorKind::Scd;
  combos.push_back({"SCD", spec});
  spec.kind = EstimatorKind::ScdLambda;
  spec.lambda = 0.25;
  combos.push_back({"SCD(0.25)", spec});
  return combos;
}

CheckResult check_unbiasedness(const VerifySuiteConfig& cfg) {
  const MlpModel model(2, {8, 8}, 12345);
  CheckResult result;
  result.name = "unbiasedness";
  result.pass = true;
  std::string failures;

  const double priors[] = {0.2, 0.5, 0.8};
  for (std::size_t pi_idx = 0; pi_idx < 3; ++pi_idx) {
    const double pi = priors[pi_idx];
    const GeneratorConfig task = cfg.task(pi);
    const ClassPrior prior(pi);
    const std::uint64_t base = Rng::derive(cfg.seed, 3 + pi_idx);

    TaskGenerator oracle_gen(task, Rng::derive(base, 0x0eac1e));
    const auto [reference, ref_se] = supervised_risk_oracle(
        oracle_gen, model, LossKind::Logistic, cfg.oracle_samples);

    const auto combos = unbiased_combos(!prior.is_degenerate());
    std::vector<std::vector<double>> values(combos.size());
    for (auto& v : values) v.reserve(cfg.unbias_reps);
    for (std::size_t rep = 0; rep < cfg.unbias_reps; ++rep) {
      TaskGenerator gen(task, Rng::derive(base, rep));
      const AnnotatedPairs annotated =
          gen.annotate_pairs_exact(cfg.unbias_pairs);
      const PairScores scores = score_pairs(model, annotated.pairs);
      const SlotLosses slots =
          compute_slot_losses(LossKind::Logistic, scores);
      const auto s = annotated.pairs.s_values();
      const auto c = annotated.pairs.c_values();
      for (std::size_t ci = 0; ci < combos.size(); ++ci)
        values[ci].push_back(
            risk_from_slots(s, c, prior, combos[ci].spec, slots));
    }
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
      const double mean = pairwise_mean(values[ci]);
      const double se = sample_stderr(values[ci], mean);
      const double combined = std::sqrt(se * se + ref_se * ref_se);
      const double z = combined > 0.0 ? (mean - reference) / combined : 0.0;
      const std::string label = "pi" + fmt(pi) + "/" + combos[ci].label;
      result.stats.push_back({"z/" + label, z});
      if (std::fabs(z) > cfg.threshold) {
        result.pass = false;
        failures += (failures.empty() ? "" : ", ") + label +
                    " (z=" + fmt(z) + ")";
      }
    }
  }
  result.detail =
      result.pass
          ? "all uncorrected estimators within " + fmt(cfg.threshold) +
                " sigma of the supervised oracle"
          : "failures: " + failures;
  return result;
}

// --- min-variance -------------------------------------------------------

CheckResult check_min_variance(const VerifySuiteConfig& cfg) {
  const MlpModel model(2, {8, 8}, 12345);
  const std::vector<double> lambdas = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  const auto profile =
      variance_profile(cfg.task(0.2), Rng::derive(cfg.seed, 7), model,
                       lambdas, cfg.var_pairs, cfg.var_reps);

  const auto at = [&](double lambda) -> const VariancePoint& {
    for (const auto& p : profile)
      if (p.lambda == lambda) return p;
    throw InvalidSpec("lambda grid must include " + fmt(lambda));
  };
  const VariancePoint& mid = at(0.5);

  CheckResult result;
  result.name = "min-variance";
  result.pass = true;
  std::string failures;
  for (const auto& point : profile) {
    result.stats.push_back({"var/lambda" + fmt(point.lambda), point.variance});
    result.stats.push_back(
        {"stderr/lambda" + fmt(point.lambda), point.bootstrap_stderr});
    if (point.lambda == 0.5) continue;
    if (mid.variance > point.variance + 3.0 * point.bootstrap_stderr) {
      result.pass = false;
      failures += " Var(0.5)>Var(" + fmt(point.lambda) + ")+3se;";
    }
    const VariancePoint& mirror = at(1.0 - point.lambda);
    const double tol = 3.0 * std::sqrt(point.bootstrap_stderr *
                                           point.bootstrap_stderr +
                                       mirror.bootstrap_stderr *
                                           mirror.bootstrap_stderr);
    if (std::fabs(point.variance - mirror.variance) > tol) {
      result.pass = false;
      failures += " |Var(" + fmt(point.lambda) + ")-Var(" +
                  fmt(mirror.lambda) + ")|>3se;";
    }
  }
  result.detail = result.pass
                      ? "Var(lambda=0.5) minimal and profile symmetric about "
                        "1/2 within 3 bootstrap sigma"
                      : "failures:" + failures;
  return result;
}

// --- gradients ----------------------------------------------------------

CheckResult check_gradients(const VerifySuiteConfig& cfg) {
  TaskGenerator gen(cfg.task(0.2), Rng::derive(cfg.seed, 8));
  const PairDataset data = gen.annotate_pairs_exact(40).pairs;
  const ClassPrior prior(0.2);
  const MlpModel model(2, {8, 8, 8}, 777);

  std::vector<Combo> combos;
  EstimatorSpec spec;
  spec.kind = EstimatorKind::Sconf;
  combos.push_back({"Sconf", spec});
  spec.kind = EstimatorKind::ConfDiff;
  combos.push_back({"ConfDiff", spec});
  spec.kind = EstimatorKind::Convex;
  spec.gamma = 0.3;
  combos.push_back({"Convex(0.3)", spec});
  spec = EstimatorSpec{};
  spec.kind = EstimatorKind::Scd;
  combos.push_back({"SCD", spec});
  spec.kind = EstimatorKind::ScdLambda;
  spec.lambda = 0.7;
  combos.push_back({"SCD(0.7)", spec});
  spec = EstimatorSpec{};
  spec.kind = EstimatorKind::CorrectedScd;
  spec.correction = CorrectionKind::Relu;
  combos.push_back({"SCD-ReLU", spec});
  spec.correction = CorrectionKind::Abs;
  combos.push_back({"SCD-ABS", spec});
  spec.kind = EstimatorKind::CorrectedConvex;
  spec.gamma = 0.3;
  spec.correction = CorrectionKind::Relu;
  combos.push_back({"Convex(0.3)-ReLU", spec});
  spec.correction = CorrectionKind::Abs;
  combos.push_back({"Convex(0.3)-ABS", spec});

  CheckResult result;
  result.name = "gradients";
  result.pass = true;
  double worst = 0.0;
  std::string failures;
  for (const Combo& combo : combos) {
    const double err =
        grad_check(model, data, prior, combo.spec, 1e-5, 150, cfg.seed);
    result.stats.push_back({"max_rel_err/" + combo.label, err});
    worst = std::max(worst, err);
    if (err > 1e-4) {
      result.pass = false;
      failures += " " + combo.label + " (" + fmt(err) + ")";
    }
  }
  result.detail =
      result.pass ? "max relative error " + fmt(worst) + " <= 1e-4"
                  : "estimators over 1e-4:" + failures;
  result.stats.push_back({"max_rel_err", worst});
  return result;
}

// --- bias-sign ----------------------------------------------------------

CheckResult check_bias_sign(const VerifySuiteConfig& cfg) {
  const MlpModel model(2, {8, 8}, 4242);
  const std::size_t sizes[] = {50, 200, 800};
  std::vector<double> biases, ses;

  CheckResult result;
  result.name = "bias-sign";
  result.pass = true;
  std::string failures;
  for (std::size_t i = 0; i < 3; ++i) {
    const McReport report = corrected_bias_report(
        cfg.task(0.2), Rng::derive(cfg.seed, 9 + i), model,
        CorrectionKind::Abs, sizes[i], cfg.bias_reps, cfg.threshold,
        cfg.oracle_samples);
    const double bias = report.mean - report.reference;
    biases.push_back(bias);
    ses.push_back(report.stderr_combined);
    result.stats.push_back(
        {"bias/n" + std::to_string(sizes[i]), bias});
    result.stats.push_back(
        {"stderr/n" + std::to_string(sizes[i]), report.stderr_combined});
    if (bias < -cfg.threshold * report.stderr_combined) {
      result.pass = false;
      failures += " bias(n=" + std::to_string(sizes[i]) + ")=" + fmt(bias) +
                  " below -4se;";
    }
  }
  for (std::size_t i = 0; i + 1 < 3; ++i) {
    const double tol =
        3.0 * std::sqrt(ses[i] * ses[i] + ses[i + 1] * ses[i + 1]);
    if (std::fabs(biases[i + 1]) > std::fabs(biases[i]) + tol) {
      result.pass = false;
      failures += " |bias| increased from n=" + std::to_string(sizes[i]) +
                  " to n=" + std::to_string(sizes[i + 1]) + ";";
    }
  }
  result.detail = result.pass
                      ? "corrected-SCD bias statistically non-negative and "
                        "non-increasing in n"
                      : "failures:" + failures;
  return result;
}

}  // namespace

std::vector<std::string> verify_check_names() {
  return {"calibration", "weak-labels", "unbiasedness",
          "min-variance", "gradients",  "bias-sign"};
}

CheckResult run_check(const std::string& name, const VerifySuiteConfig& cfg) {
  if (name == "calibration") return check_calibration(cfg);
  if (name == "weak-labels") return check_weak_labels(cfg);
  if (name == "unbiasedness") return check_unbiasedness(cfg);
  if (name == "min-variance") return check_min_variance(cfg);
  if (name == "gradients") return check_gradients(cfg);
  if (name == "bias-sign") return check_bias_sign(cfg);
  std::string known;
  for (const auto& n : verify_check_names()) known += " " + n;
  throw InvalidSpec("unknown check '" + name + "'; valid names:" + known);
}

std::vector<CheckResult> run_all_checks(const VerifySuiteConfig& cfg) {
  std::vector<CheckResult> results;
  for (const auto& name : verify_check_names())
    results.push_back(run_check(name, cfg));
  return results;
}

}  // namespace weakpairs
