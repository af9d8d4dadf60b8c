#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakpairs/data.hpp"
#include "weakpairs/estimators.hpp"
#include "weakpairs/model.hpp"
#include "weakpairs/types.hpp"

namespace weakpairs {

/// Hyperparameters of one training run. Defaults mirror the experimental
/// protocol: 200 epochs, 256 pairs per batch, Adam at 1e-3 with weight
/// decay 1e-5, test accuracy averaged over the last 10 epochs.
struct TrainConfig {
  EstimatorSpec estimator;
  int epochs = 200;
  int batch_pairs = 256;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::uint64_t seed = 0;
  int eval_every = 1;
  int tail_epochs = 10;
  std::vector<std::size_t> hidden = {300, 300, 300};

  void validate() const;
};

struct RunResult {
  std::vector<double> train_risk;     // one entry per epoch
  std::vector<double> test_accuracy;  // one entry per evaluated epoch
  double final_accuracy = 0.0;        // mean of the last tail entries
  std::optional<int> first_negative_epoch;  // 1-based, epoch-level risk < 0
  double min_batch_risk = 0.0;
};

/// Mini-batch ERM on weak pairs with the configured estimator. Reshuffles
/// the pairs each epoch; deterministic per (config, seed). Throws
/// NonFiniteRisk when a batch risk is NaN/Inf and PriorDegenerate when the
/// estimator forbids the prior.
RunResult train(const TrainConfig& config, const PairDataset& data,
                const ClassPrior& prior, const LabeledDataset& test);

/// Supervised baseline: same loop on hard-labeled data with the plain
/// logistic risk (the Supervised estimator kind routes here).
RunResult train_supervised(const TrainConfig& config,
                           const LabeledDataset& data,
                           const LabeledDataset& test);

/// Fraction of test points with sign(g(x)) == y; g(x) == 0 predicts +1.
double evaluate_accuracy(const MlpModel& model, const LabeledDataset& test);

/// How run_experiment prepares data for each seed.
struct DataPlan {
  GeneratorConfig generator;
  std::size_t n_pairs = 2000;
  std::size_t n_test = 2000;
  bool learned_annotator = false;
  std::size_t probe_size = 1000;
  std::optional<NoiseConfig> noise;  // seed field is re-derived per run
  double fraction = 1.0;             // kept pairs, applied after sampling
};

struct ExperimentResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population formula (divide by n_seeds)
  std::vector<RunResult> runs;
};

/// Repeats the sampling-and-training procedure n_seeds times with
/// independent per-seed streams derived from config.seed, in parallel up
/// to `threads` workers. Aggregation order is fixed by seed index, so the
/// result is independent of scheduling.
ExperimentResult run_experiment(const TrainConfig& config,
                                const DataPlan& plan, int n_seeds = 5,
                                int threads = 1);

/// Same protocol on fixed datasets (only the training stream varies per
/// seed).
ExperimentResult run_experiment(const TrainConfig& config,
                                const PairDataset& data,
                                const ClassPrior& prior,
                                const LabeledDataset& test, int n_seeds = 5,
                                int threads = 1);

enum class SweepAxisKind { Fraction, Noise, Gamma, Lambda, Prior };

struct SweepAxis {
  SweepAxisKind kind = SweepAxisKind::Gamma;
  std::vector<double> values;  // fraction / gamma / lambda / pi_plus
  // Noise axis: full epsilon x sigma grid.
  std::vector<double> epsilons;
  std::vector<double> sigmas;
};

struct SweepCell {
  double value1 = 0.0;  // axis value (epsilon for the noise axis)
  double value2 = 0.0;  // sigma for the noise axis, 0 otherwise
  std::string estimator;
  bool ok = false;
  std::string error;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> per_seed;
};

/// One run_experiment per cell; a failing cell records its error and the
/// sweep continues. Cells share per-seed streams so that identity cells
/// (fraction=1, or epsilon=1 and sigma=0) reproduce the plain experiment.
std::vector<SweepCell> sweep(const TrainConfig& base, const DataPlan& plan,
                             const SweepAxis& axis, int n_seeds = 5,
                             int threads = 1);

const char* to_string(SweepAxisKind kind);
SweepAxisKind parse_sweep_axis(const std::string& name);

}  // namespace weakpairs
