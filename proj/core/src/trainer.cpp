#include "weakpairs/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "weakpairs/loss.hpp"
#include "weakpairs/summation.hpp"

namespace weakpairs {

void TrainConfig::validate() const {
  estimator.validate();
  if (tail_epochs < 1) throw InvalidSpec("tail_epochs must be at least 1");
  if (epochs < tail_epochs)
    throw InvalidSpec("epochs must be at least tail_epochs");
  if (batch_pairs < 1) throw InvalidSpec("batch_pairs must be at least 1");
  if (eval_every < 1) throw InvalidSpec("eval_every must be at least 1");
  if (!(lr > 0.0)) throw InvalidSpec("lr must be positive");
  if (!(weight_decay >= 0.0))
    throw InvalidSpec("weight_decay must be non-negative");
}

namespace {

double tail_mean(const std::vector<double>& values, int tail) {
  if (values.empty()) return 0.0;
  const std::size_t take =
      std::min<std::size_t>(values.size(), static_cast<std::size_t>(tail));
  return pairwise_mean(
      std::span<const double>(values).last(take));
}

void finish_result(RunResult& result, const MlpModel& model,
                   const LabeledDataset& test, const TrainConfig& config) {
  if (result.test_accuracy.empty())
    result.test_accuracy.push_back(evaluate_accuracy(model, test));
  result.final_accuracy = tail_mean(result.test_accuracy, config.tail_epochs);
}

}  // namespace

RunResult train(const TrainConfig& config, const PairDataset& data,
                const ClassPrior& prior, const LabeledDataset& test) {
  config.validate();
  if (config.estimator.kind == EstimatorKind::Supervised)
    throw InvalidSpec("the supervised estimator trains on labeled data; "
                      "use train_supervised");
  if (config.estimator.requires_distinct_prior() && prior.is_degenerate())
    throw PriorDegenerate(prior.pi_plus());
  if (data.empty()) throw EmptyDataset();
  if (test.empty()) throw EmptyDataset();
  if (test.dim() != data.dim())
    throw DimensionMismatch(data.dim(), test.dim());

  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  MlpModel model(d, config.hidden, Rng::derive(config.seed, 0));
  AdamState adam(model.parameter_count(), config.lr, config.weight_decay);
  Rng shuffle_rng(Rng::derive(config.seed, 1));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  RunResult result;
  result.min_batch_risk = std::numeric_limits<double>::infinity();
  const std::size_t batch_pairs = static_cast<std::size_t>(config.batch_pairs);

  std::vector<double> batch_x, batch_s, batch_c, w_pos, w_neg;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_risk = 0.0;
    for (std::size_t start = 0; start < n; start += batch_pairs) {
      const std::size_t b = std::min(batch_pairs, n - start);
      batch_x.assign(2 * b * d, 0.0);
      batch_s.resize(b);
      batch_c.resize(b);
      for (std::size_t j = 0; j < b; ++j) {
        const WeakPair& pair = data[order[start + j]];
        std::copy(pair.x.begin(), pair.x.end(), batch_x.begin() + j * d);
        std::copy(pair.x_prime.begin(), pair.x_prime.end(),
                  batch_x.begin() + (b + j) * d);
        batch_s[j] = pair.s;
        batch_c[j] = pair.c;
      }
      MlpModel::Tape tape;
      const std::vector<double> scores = model.forward(batch_x.data(), 2 * b, tape);
      PairScores pair_scores;
      pair_scores.x.assign(scores.begin(), scores.begin() + b);
      pair_scores.x_prime.assign(scores.begin() + b, scores.end());
      const SlotLosses slots =
          compute_slot_losses(LossKind::Logistic, pair_scores);
      const double risk =
          risk_from_slots(batch_s, batch_c, prior, config.estimator, slots);
      if (!std::isfinite(risk)) throw NonFiniteRisk(epoch);
      result.min_batch_risk = std::min(result.min_batch_risk, risk);
      epoch_risk += risk * static_cast<double>(b);

      const TermWeights weights = term_weights_from_slots(
          batch_s, batch_c, prior, config.estimator, slots);
      w_pos.assign(weights.pos_x.begin(), weights.pos_x.end());
      w_pos.insert(w_pos.end(), weights.pos_xp.begin(), weights.pos_xp.end());
      w_neg.assign(weights.neg_x.begin(), weights.neg_x.end());
      w_neg.insert(w_neg.end(), weights.neg_xp.begin(), weights.neg_xp.end());
      const std::vector<double> grad =
          model.backward_weighted(tape, scores, w_pos, w_neg);
      adam_step(adam, model, grad);
    }
    epoch_risk /= static_cast<double>(n);
    result.train_risk.push_back(epoch_risk);
    if (epoch_risk < 0.0 && !result.first_negative_epoch)
      result.first_negative_epoch = epoch;
    if (epoch % config.eval_every == 0 || epoch == config.epochs)
      result.test_accuracy.push_back(evaluate_accuracy(model, test));
  }
  finish_result(result, model, test, config);
  return result;
}

RunResult train_supervised(const TrainConfig& config,
                           const LabeledDataset& data,
                           const LabeledDataset& test) {
  config.validate();
  if (data.empty() || test.empty()) throw EmptyDataset();
  if (test.dim() != data.dim())
    throw DimensionMismatch(data.dim(), test.dim());

  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  MlpModel model(d, config.hidden, Rng::derive(config.seed, 0));
  AdamState adam(model.parameter_count(), config.lr, config.weight_decay);
  Rng shuffle_rng(Rng::derive(config.seed, 1));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  RunResult result;
  result.min_batch_risk = std::numeric_limits<double>::infinity();
  // one pair of points per weak batch <=> 2x examples per supervised batch
  const std::size_t batch_size =
      2 * static_cast<std::size_t>(config.batch_pairs);

  std::vector<double> batch_x, losses, w_pos, w_neg;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_risk = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t b = std::min(batch_size, n - start);
      batch_x.assign(b * d, 0.0);
      losses.resize(b);
      w_pos.assign(b, 0.0);
      w_neg.assign(b, 0.0);
      const double inv_b = 1.0 / static_cast<double>(b);
      MlpModel::Tape tape;
      for (std::size_t j = 0; j < b; ++j) {
        const auto& x = data.features()[order[start + j]];
        std::copy(x.begin(), x.end(), batch_x.begin() + j * d);
      }
      const std::vector<double> scores =
          model.forward(batch_x.data(), b, tape);
      for (std::size_t j = 0; j < b; ++j) {
        const int y = data.labels()[order[start + j]];
        losses[j] = logistic_loss(scores[j], y) * inv_b;
        (y > 0 ? w_pos[j] : w_neg[j]) = inv_b;
      }
      const double risk = pairwise_sum(losses);
      if (!std::isfinite(risk)) throw NonFiniteRisk(epoch);
      result.min_batch_risk = std::min(result.min_batch_risk, risk);
      epoch_risk += risk * static_cast<double>(b);
      const std::vector<double> grad =
          model.backward_weighted(tape, scores, w_pos, w_neg);
      adam_step(adam, model, grad);
    }
    epoch_risk /= static_cast<double>(n);
    result.train_risk.push_back(epoch_risk);
    if (epoch_risk < 0.0 && !result.first_negative_epoch)
      result.first_negative_epoch = epoch;
    if (epoch % config.eval_every == 0 || epoch == config.epochs)
      result.test_accuracy.push_back(evaluate_accuracy(model, test));
  }
  finish_result(result, model, test, config);
  return result;
}

double evaluate_accuracy(const MlpModel& model, const LabeledDataset& test) {
  if (test.empty()) throw EmptyDataset();
  const std::size_t d = test.dim();
  std::vector<double> flat;
  flat.reserve(test.size() * d);
  for (const auto& x : test.features())
    flat.insert(flat.end(), x.begin(), x.end());
  const std::vector<double> scores = model.forward(flat.data(), test.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < test.size(); ++k) {
    const int predicted = scores[k] >= 0.0 ? +1 : -1;
    if (predicted == test.labels()[k]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

namespace {

PairDataset take_fraction(const PairDataset& data, double fraction) {
  if (fraction >= 1.0) return data;
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(data.size())));
  if (keep == data.size()) return data;
  if (keep == 0) throw InvalidSpec("fraction keeps zero pairs");
  PairDataset subset(data.dim());
  for (std::size_t i = 0; i < keep; ++i) subset.add(data[i]);
  return subset;
}

RunResult run_one_seed(const TrainConfig& config, const DataPlan& plan,
                       std::uint64_t run_seed) {
  TaskGenerator gen(plan.generator, Rng::derive(run_seed, 1));
  TrainConfig cfg = config;
  cfg.seed = Rng::derive(run_seed, 2);

  if (config.estimator.kind == EstimatorKind::Supervised) {
    const auto n_points = 2 * static_cast<std::size_t>(std::ceil(
                                  plan.fraction *
                                  static_cast<double>(plan.n_pairs)));
    const LabeledDataset train_set = gen.sample_labeled(n_points);
    const LabeledDataset test = gen.sample_labeled(plan.n_test);
    return train_supervised(cfg, train_set, test);
  }

  PairDataset pairs =
      plan.learned_annotator
          ? gen.annotate_pairs_learned(plan.n_pairs, plan.probe_size)
          : gen.annotate_pairs_exact(plan.n_pairs).pairs;
  const LabeledDataset test = gen.sample_labeled(plan.n_test);
  pairs = take_fraction(pairs, plan.fraction);
  ClassPrior prior = gen.prior();
  if (plan.noise) {
    NoiseConfig noise = *plan.noise;
    noise.seed = Rng::derive(run_seed, 3);
    auto [noisy, corrupted] = corrupt(pairs, prior, noise);
    pairs = std::move(noisy);
    prior = corrupted;
  }
  return train(cfg, pairs, prior, test);
}

template <typename RunFn>
ExperimentResult run_parallel(int n_seeds, int threads, RunFn&& run_one) {
  if (n_seeds < 2) throw InvalidSpec("n_seeds must be at least 2");
  std::vector<RunResult> runs(n_seeds);
  std::vector<std::string> failures(n_seeds);
  const int workers = std::max(1, std::min(threads, n_seeds));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= n_seeds) return;
      try {
        runs[k] = run_one(k);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int k = 0; k < n_seeds; ++k) {
    if (!failures[k].empty())
      throw Error("seed " + std::to_string(k) + " failed: " + failures[k]);
  }
  ExperimentResult result;
  result.runs = std::move(runs);
  std::vector<double> accs;
  accs.reserve(n_seeds);
  for (const RunResult& run : result.runs) accs.push_back(run.final_accuracy);
  result.mean_accuracy = pairwise_mean(accs);
  double ss = 0.0;
  for (double a : accs) {
    const double dev = a - result.mean_accuracy;
    ss += dev * dev;
  }
  result.std_accuracy = std::sqrt(ss / static_cast<double>(n_seeds));
  return result;
}

}  // namespace

ExperimentResult run_experiment(const TrainConfig& config,
                                const DataPlan& plan, int n_seeds,
                                int threads) {
  config.validate();
  plan.generator.validate();
  if (plan.n_pairs == 0) throw InvalidSpec("n_pairs must be positive");
  if (plan.n_test == 0) throw InvalidSpec("n_test must be positive");
  if (!(plan.fraction > 0.0 && plan.fraction <= 1.0))
    throw InvalidSpec("fraction must lie in (0,1]");
  return run_parallel(n_seeds, threads, [&](int k) {
    return run_one_seed(config, plan, Rng::derive(config.seed, k));
  });
}

ExperimentResult run_experiment(const TrainConfig& config,
                                const PairDataset& data,
                                const ClassPrior& prior,
                                const LabeledDataset& test, int n_seeds,
                                int threads) {
  config.validate();
  return run_parallel(n_seeds, threads, [&](int k) {
    TrainConfig cfg = config;
    cfg.seed = Rng::derive(Rng::derive(config.seed, k), 2);
    return train(cfg, data, prior, test);
  });
}

std::vector<SweepCell> sweep(const TrainConfig& base, const DataPlan& plan,
                             const SweepAxis& axis, int n_seeds, int threads) {
  struct Cell {
    double v1, v2;
    TrainConfig config;
    DataPlan plan;
  };
  std::vector<Cell> cells;
  switch (axis.kind) {
    case SweepAxisKind::Fraction:
      for (double f : axis.values) {
        if (!(f > 0.0 && f <= 1.0))
          throw InvalidSpec("fraction values must lie in (0,1]");
        Cell cell{f, 0.0, base, plan};
        cell.plan.fraction = f;
        cells.push_back(std::move(cell));
      }
      break;
    case SweepAxisKind::Noise:
      if (axis.epsilons.empty() || axis.sigmas.empty())
        throw InvalidSpec("noise axis requires epsilon and sigma grids");
      for (double eps : axis.epsilons) {
        for (double sig : axis.sigmas) {
          Cell cell{eps, sig, base, plan};
          cell.plan.noise = NoiseConfig{eps, sig, 0};
          cells.push_back(std::move(cell));
        }
      }
      break;
    case SweepAxisKind::Gamma:
      if (base.estimator.kind != EstimatorKind::Convex &&
          base.estimator.kind != EstimatorKind::CorrectedConvex)
        throw InvalidSpec("gamma axis requires a convex estimator");
      for (double g : axis.values) {
        if (!(g >= 0.0 && g <= 1.0))
          throw InvalidSpec("gamma values must lie in [0,1]");
        Cell cell{g, 0.0, base, plan};
        cell.config.estimator.gamma = g;
        cells.push_back(std::move(cell));
      }
      break;
    case SweepAxisKind::Lambda:
      if (base.estimator.kind != EstimatorKind::Scd &&
          base.estimator.kind != EstimatorKind::ScdLambda)
        throw InvalidSpec("lambda axis requires the scd-lambda estimator");
      for (double l : axis.values) {
        if (!(l >= 0.0 && l <= 1.0))
          throw InvalidSpec("lambda values must lie in [0,1]");
        Cell cell{l, 0.0, base, plan};
        cell.config.estimator.kind = EstimatorKind::ScdLambda;
        cell.config.estimator.lambda = l;
        cells.push_back(std::move(cell));
      }
      break;
    case SweepAxisKind::Prior:
      for (double p : axis.values) {
        Cell cell{p, 0.0, base, plan};
        cell.plan.generator.pi_plus = p;
        cells.push_back(std::move(cell));
      }
      break;
  }

  std::vector<SweepCell> out;
  out.reserve(cells.size());
  for (const Cell& cell : cells) {
    SweepCell row;
    row.value1 = cell.v1;
    row.value2 = cell.v2;
    row.estimator = cell.config.estimator.display_name();
    try {
      const ExperimentResult res =
          run_experiment(cell.config, cell.plan, n_seeds, threads);
      row.ok = true;
      row.mean_accuracy = res.mean_accuracy;
      row.std_accuracy = res.std_accuracy;
      for (const RunResult& run : res.runs)
        row.per_seed.push_back(run.final_accuracy);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

const char* to_string(SweepAxisKind kind) {
  switch (kind) {
    case SweepAxisKind::Fraction:
      return "fraction";
    case SweepAxisKind::Noise:
      return "noise";
    case SweepAxisKind::Gamma:
      return "gamma";
    case SweepAxisKind::Lambda:
      return "lambda";
    case SweepAxisKind::Prior:
      return "prior";
  }
  return "?";
}

SweepAxisKind parse_sweep_axis(const std::string& name) {
  if (name == "fraction") return SweepAxisKind::Fraction;
  if (name == "noise") return SweepAxisKind::Noise;
  if (name == "gamma") return SweepAxisKind::Gamma;
  if (name == "lambda") return SweepAxisKind::Lambda;
  if (name == "prior") return SweepAxisKind::Prior;
  throw InvalidSpec("unknown sweep axis '" + name +
                    "' (expected fraction, noise, gamma, lambda or prior)");
}

}  // namespace weakpairs
