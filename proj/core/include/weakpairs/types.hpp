#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "weakpairs/errors.hpp"

namespace weakpairs {

/// Positive-class prior pi_plus with derived pi_minus = 1 - pi_plus.
class ClassPrior {
 public:
  explicit ClassPrior(double pi_plus) : pi_plus_(pi_plus) {
    if (!(pi_plus > 0.0) || !(pi_plus < 1.0)) throw PriorOutOfRange(pi_plus);
  }

  double pi_plus() const { return pi_plus_; }
  double pi_minus() const { return 1.0 - pi_plus_; }

  /// True when |pi_plus - 0.5| < 1e-12, the threshold below which the
  /// Sconf denominator pi_minus - pi_plus is unusable.
  bool is_degenerate() const {
    const double d = pi_plus_ - 0.5;
    return d < 1e-12 && d > -1e-12;
  }

 private:
  double pi_plus_;
};

/// Exact positive-class posteriors of the two points of a pair.
struct PosteriorPair {
  double p = 0.0;        // p(y = +1 | x)
  double p_prime = 0.0;  // p(y' = +1 | x')
};

/// One unlabeled pair with similarity-confidence s and confidence-difference
/// c. Clean annotations satisfy the feasibility bounds; pairs produced by
/// the noise model may leave them by design.
struct WeakPair {
  std::vector<double> x;
  std::vector<double> x_prime;
  double s = 0.0;
  double c = 0.0;
};

/// Ordered collection of weak pairs sharing one feature dimension.
class PairDataset {
 public:
  explicit PairDataset(std::size_t dim) : dim_(dim) {}

  void add(WeakPair pair) {
    if (pair.x.size() != dim_) throw DimensionMismatch(dim_, pair.x.size());
    if (pair.x_prime.size() != dim_)
      throw DimensionMismatch(dim_, pair.x_prime.size());
    pairs_.push_back(std::move(pair));
  }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t dim() const { return dim_; }

  const WeakPair& operator[](std::size_t i) const { return pairs_[i]; }
  const std::vector<WeakPair>& pairs() const { return pairs_; }

  std::vector<double> s_values() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.s);
    return out;
  }

  std::vector<double> c_values() const {
    std::vector<double> out;
    out.reserve(pairs_.size());
    for (const auto& p : pairs_) out.push_back(p.c);
    return out;
  }

 private:
  std::vector<WeakPair> pairs_;
  std::size_t dim_;
};

/// Hard-labeled examples with labels in {-1,+1}.
class LabeledDataset {
 public:
  explicit LabeledDataset(std::size_t dim) : dim_(dim) {}

  void add(std::vector<double> x, int y) {
    if (x.size() != dim_) throw DimensionMismatch(dim_, x.size());
    if (y != 1 && y != -1)
      throw LabelDomainError(xs_.size() + 1, std::to_string(y));
    xs_.push_back(std::move(x));
    ys_.push_back(y);
  }

  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }
  std::size_t dim() const { return dim_; }

  const std::vector<std::vector<double>>& features() const { return xs_; }
  const std::vector<int>& labels() const { return ys_; }

 private:
  std::vector<std::vector<double>> xs_;
  std::vector<int> ys_;
  std::size_t dim_;
};

enum class EstimatorKind {
  Sconf,
  ConfDiff,
  Convex,
  Scd,
  ScdLambda,
  CorrectedScd,
  CorrectedConvex,
  Supervised,
};

enum class CorrectionKind { None, Relu, Abs };

/// Which risk estimator a run uses, with its mixing weights and correction.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Scd;
  double gamma = 0.5;   // Convex / CorrectedConvex mixing weight
  double lambda = 0.5;  // ScdLambda forward/reverse weight
  CorrectionKind correction = CorrectionKind::None;

  /// Validates the [0,1] ranges and the correction field.
  void validate() const;

  /// True for kinds whose weights divide by pi_minus - pi_plus, i.e. that
  /// must reject a balanced prior: Sconf and the convex kinds with gamma>0.
  bool requires_distinct_prior() const;

  bool is_corrected() const {
    return kind == EstimatorKind::CorrectedScd ||
           kind == EstimatorKind::CorrectedConvex;
  }

  /// Display name following the paper's tables, e.g. "SCD-ABS",
  /// "Convex(gamma=0.50)".
  std::string display_name() const;
};

/// Parses names like "scd-abs", "convex-relu", "sconf", "supervised".
/// gamma/lambda keep their defaults and can be set afterwards.
EstimatorSpec parse_estimator(const std::string& name);

const char* to_string(EstimatorKind kind);
const char* to_string(CorrectionKind kind);

}  // namespace weakpairs
