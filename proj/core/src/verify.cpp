#include "weakpairs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "weakpairs/summation.hpp"

namespace weakpairs {

namespace {

double sample_stderr(const std::vector<double>& values, double mean) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) {
    const double dev = v - mean;
    ss += dev * dev;
  }
  const double var = ss / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

McReport make_report(const std::vector<double>& replicates, double reference,
                     double ref_stderr, double threshold) {
  McReport report;
  report.replicates = replicates.size();
  report.mean = pairwise_mean(replicates);
  const double se = sample_stderr(replicates, report.mean);
  report.stderr_combined = std::sqrt(se * se + ref_stderr * ref_stderr);
  report.reference = reference;
  report.threshold = threshold;
  if (report.stderr_combined > 0.0) {
    report.z = (report.mean - reference) / report.stderr_combined;
  } else {
    report.z = report.mean == reference
                   ? 0.0
                   : std::numeric_limits<double>::infinity();
  }
  report.pass = std::fabs(report.z) <= threshold;
  return report;
}

PairScores score_pairs(const MlpModel& model, const PairDataset& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<double> flat(2 * n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const WeakPair& pair = data[i];
    std::copy(pair.x.begin(), pair.x.end(), flat.begin() + i * d);
    std::copy(pair.x_prime.begin(), pair.x_prime.end(),
              flat.begin() + (n + i) * d);
  }
  const std::vector<double> scores = model.forward(flat.data(), 2 * n);
  PairScores out;
  out.x.assign(scores.begin(), scores.begin() + n);
  out.x_prime.assign(scores.begin() + n, scores.end());
  return out;
}

std::vector<double> replicate_values(
    const GeneratorConfig& gcfg, std::uint64_t seed, const MlpModel& model,
    const EstimatorSpec& spec, std::size_t n_pairs, std::size_t n_reps) {
  std::vector<double> values;
  values.reserve(n_reps);
  const ClassPrior prior(gcfg.pi_plus);
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    TaskGenerator gen(gcfg, Rng::derive(seed, rep));
    const AnnotatedPairs annotated = gen.annotate_pairs_exact(n_pairs);
    const PairScores scores = score_pairs(model, annotated.pairs);
    values.push_back(
        risk_value(annotated.pairs, prior, spec, LossKind::Logistic, scores));
  }
  return values;
}

}  // namespace

std::pair<double, double> supervised_risk_oracle(TaskGenerator& gen,
                                                 const MlpModel& model,
                                                 const LossFn& loss,
                                                 std::size_t n_mc) {
  if (n_mc < 1000) throw InvalidSpec("oracle needs at least 1000 samples");
  const LabeledDataset sample = gen.sample_labeled(n_mc);
  std::vector<double> flat;
  flat.reserve(n_mc * gen.dim());
  for (const auto& x : sample.features())
    flat.insert(flat.end(), x.begin(), x.end());
  const std::vector<double> scores = model.forward(flat.data(), n_mc);
  std::vector<double> losses(n_mc);
  for (std::size_t k = 0; k < n_mc; ++k)
    losses[k] = loss(scores[k], sample.labels()[k]);
  const double mean = pairwise_mean(losses);
  return {mean, sample_stderr(losses, mean)};
}

McReport mc_unbiasedness(const GeneratorConfig& gcfg, std::uint64_t seed,
                         const MlpModel& model, const EstimatorSpec& spec,
                         std::size_t n_pairs, std::size_t n_reps,
                         double threshold, std::size_t oracle_samples) {
  spec.validate();
  if (spec.is_corrected() || spec.correction != CorrectionKind::None)
    throw InvalidSpec(
        "mc_unbiasedness applies to uncorrected estimators only (the "
        "corrected risk is biased yet consistent)");
  if (spec.kind == EstimatorKind::Supervised)
    throw InvalidSpec("mc_unbiasedness checks the weak-pair estimators");
  const ClassPrior prior(gcfg.pi_plus);
  if (spec.requires_distinct_prior() && prior.is_degenerate())
    throw PriorDegenerate(prior.pi_plus());
  if (n_reps < 2) throw InvalidSpec("n_reps must be at least 2");

  TaskGenerator oracle_gen(gcfg, Rng::derive(seed, 0x0eac1e));
  const auto [reference, ref_stderr] =
      supervised_risk_oracle(oracle_gen, model, LossKind::Logistic,
                             oracle_samples);
  const std::vector<double> values =
      replicate_values(gcfg, seed, model, spec, n_pairs, n_reps);
  return make_report(values, reference, ref_stderr, threshold);
}

namespace {

std::vector<VariancePoint> profile_from_matrix(
    const std::vector<double>& lambdas,
    const std::vector<std::vector<double>>& values_per_lambda,
    std::size_t n_reps, std::uint64_t bootstrap_seed) {
  constexpr std::size_t kResamples = 1000;
  // Shared resample index sets keep the per-lambda variance estimates
  // paired.
  Rng rng(bootstrap_seed);
  std::vector<std::vector<std::size_t>> resamples(kResamples);
  for (auto& idx : resamples) {
    idx.resize(n_reps);
    for (auto& v : idx) v = rng.index(n_reps);
  }

  auto variance_of = [](const std::vector<double>& vals) {
    const double mean = pairwise_mean(vals);
    double ss = 0.0;
    for (double v : vals) {
      const double d = v - mean;
      ss += d * d;
    }
    return ss / static_cast<double>(vals.size() - 1);
  };

  std::vector<VariancePoint> profile;
  profile.reserve(lambdas.size());
  std::vector<double> resampled(n_reps);
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const std::vector<double>& vals = values_per_lambda[li];
    VariancePoint point;
    point.lambda = lambdas[li];
    point.variance = variance_of(vals);
    std::vector<double> boot;
    boot.reserve(kResamples);
    for (const auto& idx : resamples) {
      for (std::size_t k = 0; k < n_reps; ++k) resampled[k] = vals[idx[k]];
      boot.push_back(variance_of(resampled));
    }
    const double boot_mean = pairwise_mean(boot);
    double ss = 0.0;
    for (double bv : boot) {
      const double d = bv - boot_mean;
      ss += d * d;
    }
    point.bootstrap_stderr =
        std::sqrt(ss / static_cast<double>(boot.size() - 1));
    profile.push_back(point);
  }
  return profile;
}

}  // namespace

std::vector<VariancePoint> variance_profile(
    const GeneratorConfig& gcfg, std::uint64_t seed, const MlpModel& model,
    const std::vector<double>& lambdas, std::size_t n_pairs,
    std::size_t n_reps) {
  if (n_reps < 2) throw InvalidSpec("n_reps must be at least 2");
  const ClassPrior prior(gcfg.pi_plus);
  std::vector<std::vector<double>> values(lambdas.size());
  for (auto& v : values) v.reserve(n_reps);
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    TaskGenerator gen(gcfg, Rng::derive(seed, rep));
    const AnnotatedPairs annotated = gen.annotate_pairs_exact(n_pairs);
    const PairScores scores = score_pairs(model, annotated.pairs);
    const SlotLosses slots =
        compute_slot_losses(LossKind::Logistic, scores);
    const auto s = annotated.pairs.s_values();
    const auto c = annotated.pairs.c_values();
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      EstimatorSpec spec;
      spec.kind = EstimatorKind::ScdLambda;
      spec.lambda = lambdas[li];
      values[li].push_back(risk_from_slots(s, c, prior, spec, slots));
    }
  }
  return profile_from_matrix(lambdas, values, n_reps, Rng::derive(seed, 0xb0));
}

std::vector<VariancePoint> variance_profile_custom(
    const std::function<PairDataset(std::size_t)>& sampler,
    const ClassPrior& prior, const MlpModel& model,
    const std::vector<double>& lambdas, std::size_t n_reps,
    std::uint64_t bootstrap_seed) {
  if (n_reps < 2) throw InvalidSpec("n_reps must be at least 2");
  std::vector<std::vector<double>> values(lambdas.size());
  for (auto& v : values) v.reserve(n_reps);
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    const PairDataset data = sampler(rep);
    const PairScores scores = score_pairs(model, data);
    const SlotLosses slots = compute_slot_losses(LossKind::Logistic, scores);
    const auto s = data.s_values();
    const auto c = data.c_values();
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      EstimatorSpec spec;
      spec.kind = EstimatorKind::ScdLambda;
      spec.lambda = lambdas[li];
      values[li].push_back(risk_from_slots(s, c, prior, spec, slots));
    }
  }
  return profile_from_matrix(lambdas, values, n_reps, bootstrap_seed);
}

double grad_check(const MlpModel& model, const PairDataset& data,
                  const ClassPrior& prior, const EstimatorSpec& spec,
                  double step, std::size_t max_params, std::uint64_t seed) {
  spec.validate();
  MlpModel work = model;
  const auto evaluate = [&](const MlpModel& m) {
    const PairScores scores = score_pairs(m, data);
    return risk_value(data, prior, spec, LossKind::Logistic, scores);
  };

  // Move the check point off correction kinks: partial sums within 1e-6 of
  // zero flip the subgradient under the finite-difference perturbation.
  if (spec.is_corrected() && spec.correction != CorrectionKind::None) {
    Rng jitter(Rng::derive(seed, 99));
    for (int attempt = 0; attempt < 20; ++attempt) {
      const PairScores scores = score_pairs(work, data);
      const SlotLosses slots =
          compute_slot_losses(LossKind::Logistic, scores);
      const auto s = data.s_values();
      const auto c = data.c_values();
      const std::vector<double> groups =
          corrected_group_sums(s, c, prior, spec, slots);
      double closest = std::numeric_limits<double>::infinity();
      for (double g : groups) closest = std::min(closest, std::fabs(g));
      if (closest > 1e-6) break;
      for (double& p : work.mutable_parameters()) p += 1e-3 * jitter.normal();
    }
  }

  const PairScores scores = score_pairs(work, data);
  const SlotLosses slots = compute_slot_losses(LossKind::Logistic, scores);
  const auto s = data.s_values();
  const auto c = data.c_values();
  const TermWeights weights =
      term_weights_from_slots(s, c, prior, spec, slots);

  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<double> flat(2 * n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(data[i].x.begin(), data[i].x.end(), flat.begin() + i * d);
    std::copy(data[i].x_prime.begin(), data[i].x_prime.end(),
              flat.begin() + (n + i) * d);
  }
  MlpModel::Tape tape;
  const std::vector<double> all_scores =
      work.forward(flat.data(), 2 * n, tape);
  std::vector<double> w_pos(weights.pos_x);
  w_pos.insert(w_pos.end(), weights.pos_xp.begin(), weights.pos_xp.end());
  std::vector<double> w_neg(weights.neg_x);
  w_neg.insert(w_neg.end(), weights.neg_xp.begin(), weights.neg_xp.end());
  const std::vector<double> analytic =
      work.backward_weighted(tape, all_scores, w_pos, w_neg);

  std::vector<std::size_t> param_ids(work.parameter_count());
  std::iota(param_ids.begin(), param_ids.end(), 0);
  if (param_ids.size() > max_params) {
    Rng rng(seed);
    rng.shuffle(param_ids);
    param_ids.resize(max_params);
  }

  double max_rel = 0.0;
  std::vector<double>& params = work.mutable_parameters();
  for (std::size_t id : param_ids) {
    const double original = params[id];
    params[id] = original + step;
    const double up = evaluate(work);
    params[id] = original - step;
    const double down = evaluate(work);
    params[id] = original;
    const double fd = (up - down) / (2.0 * step);
    const double bp = analytic[id];
    const double denom = std::max({std::fabs(fd), std::fabs(bp), 1e-8});
    const double rel = std::fabs(fd - bp) / denom;
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

McReport corrected_bias_report(const GeneratorConfig& gcfg,
                               std::uint64_t seed, const MlpModel& model,
                               CorrectionKind correction, std::size_t n_pairs,
                               std::size_t n_reps, double threshold,
                               std::size_t oracle_samples) {
  const ClassPrior prior(gcfg.pi_plus);
  TaskGenerator oracle_gen(gcfg, Rng::derive(seed, 0x0eac1e));
  const auto [reference, ref_stderr] = supervised_risk_oracle(
      oracle_gen, model, LossKind::Logistic, oracle_samples);
  EstimatorSpec spec;
  spec.kind = EstimatorKind::CorrectedScd;
  spec.correction = correction;
  std::vector<double> values;
  values.reserve(n_reps);
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    TaskGenerator gen(gcfg, Rng::derive(seed, rep));
    const AnnotatedPairs annotated = gen.annotate_pairs_exact(n_pairs);
    const PairScores scores = score_pairs(model, annotated.pairs);
    values.push_back(
        risk_value(annotated.pairs, prior, spec, LossKind::Logistic, scores));
  }
  return make_report(values, reference, ref_stderr, threshold);
}

}  // namespace weakpairs
