#include "weakpairs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "weakpairs/loss.hpp"
#include "weakpairs/summation.hpp"
#include "weakpairs/weak_labels.hpp"

namespace weakpairs {

void GeneratorConfig::validate() const {
  if (!(pi_plus > 0.0 && pi_plus < 1.0)) throw PriorOutOfRange(pi_plus);
  if (mu_plus.empty()) throw InvalidSpec("mu_plus must be non-empty");
  if (mu_plus.size() != mu_minus.size())
    throw DimensionMismatch(mu_plus.size(), mu_minus.size());
  if (!(sigma > 0.0)) throw InvalidSpec("sigma must be positive");
}

double LinearScorer::score(std::span<const double> x) const {
  if (x.size() != w.size()) throw DimensionMismatch(w.size(), x.size());
  double acc = b;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

double LinearScorer::posterior(std::span<const double> x) const {
  const double z = score(x);
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

TaskGenerator::TaskGenerator(GeneratorConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      prior_(config_.pi_plus),
      seed_(seed),
      rng_(seed) {
  config_.validate();
}

double TaskGenerator::posterior(std::span<const double> x) const {
  if (x.size() != config_.dim()) throw DimensionMismatch(config_.dim(), x.size());
  // log-likelihood ratio of the two isotropic Gaussians plus log prior
  // odds, squashed through a stable sigmoid.
  double d_plus = 0.0;
  double d_minus = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dp = x[i] - config_.mu_plus[i];
    const double dm = x[i] - config_.mu_minus[i];
    d_plus += dp * dp;
    d_minus += dm * dm;
  }
  const double llr = (d_minus - d_plus) / (2.0 * config_.sigma * config_.sigma) +
                     std::log(prior_.pi_plus() / prior_.pi_minus());
  if (llr >= 0.0) return 1.0 / (1.0 + std::exp(-llr));
  const double e = std::exp(llr);
  return e / (1.0 + e);
}

LabeledDataset TaskGenerator::sample_labeled(std::size_t n) {
  LabeledDataset out(config_.dim());
  for (std::size_t k = 0; k < n; ++k) {
    const int y = rng_.uniform() < prior_.pi_plus() ? +1 : -1;
    const auto& mu = y > 0 ? config_.mu_plus : config_.mu_minus;
    std::vector<double> x(config_.dim());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = rng_.normal(mu[i], config_.sigma);
    out.add(std::move(x), y);
  }
  return out;
}

std::vector<std::vector<double>> TaskGenerator::sample_marginal(
    std::size_t n) {
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int y = rng_.uniform() < prior_.pi_plus() ? +1 : -1;
    const auto& mu = y > 0 ? config_.mu_plus : config_.mu_minus;
    std::vector<double> x(config_.dim());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = rng_.normal(mu[i], config_.sigma);
    out.push_back(std::move(x));
  }
  return out;
}

AnnotatedPairs TaskGenerator::annotate_pairs_exact(std::size_t n_pairs) {
  auto points = sample_marginal(2 * n_pairs);
  AnnotatedPairs out{PairDataset(config_.dim()), {}};
  out.posteriors.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    PosteriorPair pp{posterior(points[2 * k]), posterior(points[2 * k + 1])};
    const auto [s, c] = weak_labels_from_posteriors(pp);
    out.pairs.add(WeakPair{std::move(points[2 * k]),
                           std::move(points[2 * k + 1]), s, c});
    out.posteriors.push_back(pp);
  }
  return out;
}

PairDataset TaskGenerator::annotate_pairs_learned(std::size_t n_pairs,
                                                  std::size_t probe_size) {
  if (probe_size < 10) throw InvalidSpec("probe_size must be at least 10");
  const LabeledDataset probe = sample_labeled(probe_size);
  const LinearScorer scorer = fit_logistic_probe(probe);
  return annotate_pairs_with_scorer(scorer, sample_marginal(2 * n_pairs));
}

LinearScorer fit_logistic_probe(const LabeledDataset& probe) {
  if (probe.empty()) throw DegenerateProbe();
  const auto& ys = probe.labels();
  const bool has_pos = std::find(ys.begin(), ys.end(), +1) != ys.end();
  const bool has_neg = std::find(ys.begin(), ys.end(), -1) != ys.end();
  if (!has_pos || !has_neg) throw DegenerateProbe();

  const std::size_t n = probe.size();
  const std::size_t d = probe.dim();
  const auto& xs = probe.features();

  // Fixed step size from the logistic-Hessian bound 0.25 * mean ||x,1||^2.
  double sq = 0.0;
  for (const auto& x : xs) {
    for (double v : x) sq += v * v;
    sq += 1.0;
  }
  const double lipschitz = 0.25 * sq / static_cast<double>(n);
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  LinearScorer scorer;
  scorer.w.assign(d, 0.0);
  scorer.b = 0.0;
  std::vector<double> gw(d);
  const int max_steps = 10000;
  for (int it = 0; it < max_steps; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double gz = logistic_loss_grad(scorer.score(xs[k]), ys[k]);
      for (std::size_t i = 0; i < d; ++i) gw[i] += gz * xs[k][i];
      gb += gz;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      gw[i] *= inv_n;
      norm_sq += gw[i] * gw[i];
    }
    gb *= inv_n;
    norm_sq += gb * gb;
    if (std::sqrt(norm_sq) < 1e-6) break;
    for (std::size_t i = 0; i < d; ++i) scorer.w[i] -= step * gw[i];
    scorer.b -= step * gb;
  }
  return scorer;
}

PairDataset annotate_pairs_with_scorer(
    const LinearScorer& scorer,
    const std::vector<std::vector<double>>& points) {
  if (points.size() % 2 != 0)
    throw InvalidSpec("point list must have even length");
  if (points.empty()) throw EmptyDataset();
  PairDataset out(points.front().size());
  for (std::size_t k = 0; k + 1 < points.size(); k += 2) {
    PosteriorPair pp{scorer.posterior(points[k]),
                     scorer.posterior(points[k + 1])};
    const auto [s, c] = weak_labels_from_posteriors(pp);
    out.add(WeakPair{points[k], points[k + 1], s, c});
  }
  return out;
}

std::pair<PairDataset, ClassPrior> corrupt(const PairDataset& data,
                                           const ClassPrior& prior,
                                           const NoiseConfig& cfg) {
  const double corrupted = cfg.epsilon * prior.pi_plus();
  if (!(corrupted > 0.0 && corrupted < 1.0)) throw PriorOutOfRange(corrupted);
  if (!(cfg.sigma_noise >= 0.0))
    throw InvalidSpec("sigma_noise must be non-negative");
  Rng rng(cfg.seed);
  PairDataset noisy(data.dim());
  for (const WeakPair& pair : data.pairs()) {
    WeakPair copy = pair;
    copy.s = pair.s * rng.normal(1.0, cfg.sigma_noise);
    copy.c = pair.c * rng.normal(1.0, cfg.sigma_noise);
    noisy.add(std::move(copy));
  }
  return {std::move(noisy), ClassPrior(corrupted)};
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_real(const std::string& field, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  // tolerate surrounding spaces
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' ||
                          last[-1] == '\r'))
    --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError(row, col, "invalid real '" + field + "'");
  return value;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

LabeledDataset load_labeled_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labeled CSV: " + path.string());
  std::string line;
  std::size_t row = 0;
  std::optional<LabeledDataset> data;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() < 2)
      throw ParseError(row, 1, "need at least one feature and a label");
    if (!data) data.emplace(fields.size() - 1);
    if (fields.size() - 1 != data->dim())
      throw ParseError(row, fields.size(), "inconsistent column count");
    std::vector<double> x(data->dim());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = parse_real(fields[i], row, i + 1);
    const double raw = parse_real(fields.back(), row, fields.size());
    int y = 0;
    if (raw == 1.0)
      y = +1;
    else if (raw == -1.0)
      y = -1;
    else if (raw == 0.0)
      y = -1;  // {0,1} encoding
    else
      throw LabelDomainError(row, fields.back());
    data->add(std::move(x), y);
  }
  if (!data || data->empty())
    throw ParseError(row == 0 ? 1 : row, 1, "empty dataset");
  return std::move(*data);
}

void save_labeled_csv(const LabeledDataset& data,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open labeled CSV for writing: " + path.string());
  for (std::size_t k = 0; k < data.size(); ++k) {
    for (double v : data.features()[k]) out << format_real(v) << ',';
    out << data.labels()[k] << '\n';
  }
  if (!out) throw IoError("labeled CSV write failed: " + path.string());
}

PairDataset load_pairs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pair CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 1, "missing header row");
  const auto header = split_line(line);
  if (header.size() < 4 || header.size() % 2 != 0)
    throw ParseError(1, 1, "header must be x1..xd,xp1..xpd,s,c");
  const std::size_t d = (header.size() - 2) / 2;
  PairDataset data(d);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw ParseError(row, fields.size(), "inconsistent column count");
    WeakPair pair;
    pair.x.resize(d);
    pair.x_prime.resize(d);
    for (std::size_t i = 0; i < d; ++i)
      pair.x[i] = parse_real(fields[i], row, i + 1);
    for (std::size_t i = 0; i < d; ++i)
      pair.x_prime[i] = parse_real(fields[d + i], row, d + i + 1);
    pair.s = parse_real(fields[2 * d], row, 2 * d + 1);
    pair.c = parse_real(fields[2 * d + 1], row, 2 * d + 2);
    data.add(std::move(pair));
  }
  if (data.empty()) throw ParseError(row, 1, "empty pair dataset");
  return data;
}

void save_pairs_csv(const PairDataset& data,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open pair CSV for writing: " + path.string());
  for (std::size_t i = 1; i <= data.dim(); ++i) out << 'x' << i << ',';
  for (std::size_t i = 1; i <= data.dim(); ++i) out << "xp" << i << ',';
  out << "s,c\n";
  for (const WeakPair& pair : data.pairs()) {
    for (double v : pair.x) out << format_real(v) << ',';
    for (double v : pair.x_prime) out << format_real(v) << ',';
    out << format_real(pair.s) << ',' << format_real(pair.c) << '\n';
  }
  if (!out) throw IoError("pair CSV write failed: " + path.string());
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double fraction,
                                                std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw InvalidSpec("split fraction must lie in [0,1]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const auto head = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(data.size())));
  LabeledDataset first(data.dim());
  LabeledDataset second(data.dim());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t idx = order[k];
    if (k < head)
      first.add(data.features()[idx], data.labels()[idx]);
    else
      second.add(data.features()[idx], data.labels()[idx]);
  }
  return {std::move(first), std::move(second)};
}

}  // namespace weakpairs
