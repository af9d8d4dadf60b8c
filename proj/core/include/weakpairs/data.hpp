#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "weakpairs/random.hpp"
#include "weakpairs/types.hpp"

namespace weakpairs {

/// Parameters of the two-isotropic-Gaussian task. The positive class is
/// N(mu_plus, sigma^2 I), the negative class N(mu_minus, sigma^2 I), so the
/// posterior p(y=+1|x) is available in closed form and the generator can
/// serve as an exact annotation oracle.
struct GeneratorConfig {
  double pi_plus = 0.2;
  std::vector<double> mu_plus = {2.0, 0.0};
  std::vector<double> mu_minus = {-2.0, 0.0};
  double sigma = 1.0;

  std::size_t dim() const { return mu_plus.size(); }
  void validate() const;
};

/// Pair dataset plus the exact posteriors it was annotated from, retained
/// for oracle use (they are not part of the serialized schema).
struct AnnotatedPairs {
  PairDataset pairs;
  std::vector<PosteriorPair> posteriors;
};

/// Linear logistic scorer fitted on a labeled probe; the learned annotator
/// of the data-generation protocol.
struct LinearScorer {
  std::vector<double> w;
  double b = 0.0;

  double score(std::span<const double> x) const;
  double posterior(std::span<const double> x) const;  // sigmoid(score)
};

class TaskGenerator {
 public:
  TaskGenerator(GeneratorConfig config, std::uint64_t seed);

  const GeneratorConfig& config() const { return config_; }
  const ClassPrior& prior() const { return prior_; }
  std::size_t dim() const { return config_.dim(); }
  std::uint64_t seed() const { return seed_; }

  /// Exact p(y=+1|x) for this task.
  double posterior(std::span<const double> x) const;

  /// n labeled draws: y ~ Bernoulli(pi_plus), x ~ N(mu_y, sigma^2 I).
  LabeledDataset sample_labeled(std::size_t n);

  /// n i.i.d. draws from the feature marginal (the class mixture).
  std::vector<std::vector<double>> sample_marginal(std::size_t n);

  /// 2*n_pairs marginal draws paired in order, annotated with the exact
  /// posteriors; every emitted (s, c) is feasible.
  AnnotatedPairs annotate_pairs_exact(std::size_t n_pairs);

  /// Fits a logistic-regression probe on probe_size labeled draws, then
  /// annotates fresh pairs with the probe's predicted posteriors.
  PairDataset annotate_pairs_learned(std::size_t n_pairs,
                                     std::size_t probe_size);

  Rng& rng() { return rng_; }

 private:
  GeneratorConfig config_;
  ClassPrior prior_;
  std::uint64_t seed_;
  Rng rng_;
};

/// Full-batch gradient descent on the logistic loss until the gradient
/// norm drops below 1e-6 or 1e4 steps elapse. Throws DegenerateProbe when
/// the probe holds a single class.
LinearScorer fit_logistic_probe(const LabeledDataset& probe);

/// Pairs consecutive points (0,1), (2,3), ... and annotates them with the
/// scorer's predicted posteriors.
PairDataset annotate_pairs_with_scorer(
    const LinearScorer& scorer, const std::vector<std::vector<double>>& points);

/// Multiplicative label noise and prior corruption. epsilon scales the
/// prior (pi_bar = epsilon * pi_plus); per-pair factors eps', eps'' ~
/// N(1, sigma_noise^2) scale s and c. Noisy labels are deliberately not
/// clamped back into their clean ranges.
struct NoiseConfig {
  double epsilon = 1.0;
  double sigma_noise = 0.0;
  std::uint64_t seed = 0;
};

std::pair<PairDataset, ClassPrior> corrupt(const PairDataset& data,
                                           const ClassPrior& prior,
                                           const NoiseConfig& cfg);

// --- Serialization ------------------------------------------------------

/// Labeled CSV: d feature columns then a label column in {-1,+1} (or
/// {0,1}, with 0 mapped to -1). No header row.
LabeledDataset load_labeled_csv(const std::filesystem::path& path);
void save_labeled_csv(const LabeledDataset& data,
                      const std::filesystem::path& path);

/// Pair CSV with header x1..xd,xp1..xpd,s,c and 17-significant-digit
/// decimals for a lossless round-trip.
PairDataset load_pairs_csv(const std::filesystem::path& path);
void save_pairs_csv(const PairDataset& data,
                    const std::filesystem::path& path);

/// Seeded shuffle-and-split; first element holds `fraction` of the data.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double fraction,
                                                std::uint64_t seed);

}  // namespace weakpairs
